//! Flat `key = value` configuration files.
//!
//! ```text
//! # 5 SUs, static channel
//! n_su = 5
//! p_max_dbm = 23
//! learner = cgcpm
//! mcs = BPSK 1/2, 5
//! mcs = 16QAM 1/2, 13
//! ```
//!
//! Any `mcs` line replaces the default ladder; entries must be listed in
//! ascending γ order.

use std::str::FromStr;

use super::{ConfigError, FadingConfig, ScenarioConfig};
use crate::engine::{FeedbackKind, LearnerKind};
use crate::pu_link::{AcmProtocol, McsEntry};

pub const KNOWN_KEYS: &[&str] = &[
    "n_su",
    "seed",
    "su_range_m",
    "d_min_m",
    "p_max_dbm",
    "pu_noise_dbm",
    "pu_clear_sinr_db",
    "mcs",
    "d_th",
    "prior_g_ub",
    "hr_samples",
    "hr_burn_in",
    "newton_tol",
    "newton_max_iter",
    "fading.t_c",
    "fading.n_blocks",
    "su_link_dist_m",
    "su_noise_dbm",
    "sensing.p_correct",
    "learner",
    "feedback",
    "flops",
    "n_topologies",
];

/// A scenario plus the run settings the CLI needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub learner: LearnerKind,
    pub feedback: FeedbackKind,
    pub flops: usize,
    pub n_topologies: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::new(5),
            learner: LearnerKind::Cgcpm,
            feedback: FeedbackKind::Mcc,
            flops: 200,
            n_topologies: 1,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_pair(key: &str, value: &str) -> Result<(String, String), ConfigError> {
    let (a, b) = value.rsplit_once(',').ok_or_else(|| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "expected two comma-separated fields".to_string(),
    })?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, mcs_rows: &mut Vec<McsEntry>) -> Result<(), ConfigError> {
        let s = &mut self.scenario;
        match key {
            "n_su" => s.n_su = parse_num(key, value)?,
            "seed" => s.seed = parse_num(key, value)?,
            "su_range_m" => s.su_range_m = parse_num(key, value)?,
            "d_min_m" => s.d_min_m = parse_num(key, value)?,
            "p_max_dbm" => s.p_max_dbm = parse_num(key, value)?,
            "pu_noise_dbm" => s.pu_noise_dbm = parse_num(key, value)?,
            "pu_clear_sinr_db" => s.pu_clear_sinr_db = parse_num(key, value)?,
            "d_th" => s.d_th = parse_num(key, value)?,
            "prior_g_ub" => s.prior_g_ub = Some(parse_num(key, value)?),
            "hr_samples" => s.hr_samples = Some(parse_num(key, value)?),
            "hr_burn_in" => s.hr_burn_in = Some(parse_num(key, value)?),
            "newton_tol" => s.newton_tol = parse_num(key, value)?,
            "newton_max_iter" => s.newton_max_iter = parse_num(key, value)?,
            "fading.t_c" => {
                let t_c = parse_num(key, value)?;
                let n_blocks = s.fading.map_or(3, |f| f.n_blocks);
                s.fading = Some(FadingConfig { t_c, n_blocks });
            }
            "fading.n_blocks" => {
                let n_blocks = parse_num(key, value)?;
                let t_c = s.fading.map_or(250, |f| f.t_c);
                s.fading = Some(FadingConfig { t_c, n_blocks });
            }
            "su_link_dist_m" => {
                let (lo, hi) = parse_pair(key, value)?;
                s.su_link_dist_m = (parse_num(key, &lo)?, parse_num(key, &hi)?);
            }
            "su_noise_dbm" => s.su_noise_dbm = parse_num(key, value)?,
            "sensing.p_correct" => s.sensing_p_correct = parse_num(key, value)?,
            "mcs" => {
                let (label, gamma) = parse_pair(key, value)?;
                mcs_rows.push(McsEntry { label, gamma_db: parse_num(key, &gamma)? });
            }
            "learner" => self.learner = value.parse()?,
            "feedback" => self.feedback = value.parse()?,
            "flops" => self.flops = parse_num(key, value)?,
            "n_topologies" => self.n_topologies = parse_num(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses config text, then applies `overrides` (`key=value`) in order.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut mcs_rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: idx + 1, text: raw.to_string() })?;
            cfg.set(key.trim(), value.trim(), &mut mcs_rows)?;
        }
        for ov in overrides {
            let (key, value) = ov
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: 0, text: ov.clone() })?;
            cfg.set(key.trim(), value.trim(), &mut mcs_rows)?;
        }
        if !mcs_rows.is_empty() {
            cfg.scenario.protocol =
                AcmProtocol::new(mcs_rows).map_err(|e| ConfigError::InvalidValue {
                    key: "mcs".to_string(),
                    value: String::new(),
                    reason: e.to_string(),
                })?;
        }
        if cfg.flops == 0 {
            return Err(ConfigError::Invalid { key: "flops", reason: "must be at least 1".into() });
        }
        if cfg.n_topologies == 0 {
            return Err(ConfigError::Invalid {
                key: "n_topologies",
                reason: "must be at least 1".into(),
            });
        }
        cfg.scenario.validate()?;
        Ok(cfg)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::parse_with_overrides(text, &[])
}
