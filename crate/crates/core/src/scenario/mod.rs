//! Scenario configuration, SU topology generation and block fading.

mod config_file;

pub use config_file::{parse_config, ExperimentConfig, KNOWN_KEYS};

use rand::Rng;
use thiserror::Error;

use crate::pu_link::{interference_thresholds, select_mcs, AcmProtocol, Mcs};
use crate::units::dbm_to_mw;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("invalid configuration: `{key}` {reason}")]
    Invalid { key: &'static str, reason: String },
}

/// Coherence-block layout of a slow-fading run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FadingConfig {
    /// Flops per coherence block.
    pub t_c: usize,
    pub n_blocks: usize,
}

impl FadingConfig {
    /// Inequality-pair window `⌊t_c / N⌋`.
    pub fn window(&self, n_su: usize) -> usize {
        self.t_c / n_su
    }

    pub fn total_flops(&self) -> usize {
        self.t_c * self.n_blocks
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n_su: usize,
    pub seed: u64,
    /// Radius of the SU dispersal disc around the PU receiver.
    pub su_range_m: f64,
    /// Floor on SU–PU distance.
    pub d_min_m: f64,
    pub p_max_dbm: f64,
    pub pu_noise_dbm: f64,
    pub pu_clear_sinr_db: f64,
    pub protocol: AcmProtocol,
    /// Exploration cutoff on `d_max / ‖ĝ‖`.
    pub d_th: f64,
    /// Prior upper bound on every normalized gain (mW⁻¹). `None` derives it
    /// from the closest admissible SU, see [`ScenarioConfig::prior_g_ub`].
    pub prior_g_ub: Option<f64>,
    pub hr_samples: Option<usize>,
    pub hr_burn_in: Option<usize>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub fading: Option<FadingConfig>,
    pub su_link_dist_m: (f64, f64),
    pub su_noise_dbm: f64,
    pub sensing_p_correct: f64,
}

impl ScenarioConfig {
    pub fn new(n_su: usize) -> Self {
        Self {
            n_su,
            seed: 1,
            su_range_m: 3000.0,
            d_min_m: 50.0,
            p_max_dbm: 23.0,
            pu_noise_dbm: -103.0,
            pu_clear_sinr_db: 20.0,
            protocol: AcmProtocol::default_ladder(),
            d_th: 0.05,
            prior_g_ub: None,
            hr_samples: None,
            hr_burn_in: None,
            newton_tol: 1e-10,
            newton_max_iter: 100,
            fading: None,
            su_link_dist_m: (100.0, 500.0),
            su_noise_dbm: -103.0,
            sensing_p_correct: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key, reason: &str| Err(ConfigError::Invalid { key, reason: reason.to_string() });
        if self.n_su == 0 {
            return bad("n_su", "must be at least 1");
        }
        if !self.p_max_dbm.is_finite() {
            return bad("p_max_dbm", "must be finite");
        }
        if !(self.d_th > 0.0) {
            return bad("d_th", "must be positive");
        }
        if let Some(ub) = self.prior_g_ub {
            if !(ub > 0.0) || !ub.is_finite() {
                return bad("prior_g_ub", "must be positive and finite");
            }
        }
        if !(self.d_min_m > 0.0) || !(self.su_range_m > self.d_min_m) {
            return bad("su_range_m", "must exceed d_min_m > 0");
        }
        let (lo, hi) = self.su_link_dist_m;
        if !(lo > 0.0 && hi >= lo) {
            return bad("su_link_dist_m", "needs 0 < lo <= hi");
        }
        if !(self.sensing_p_correct > 0.0 && self.sensing_p_correct <= 1.0) {
            return bad("sensing.p_correct", "must lie in (0, 1]");
        }
        if self.hr_samples == Some(0) {
            return bad("hr_samples", "must be at least 1");
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("newton_tol", "tolerance and iteration cap must be positive");
        }
        if let Some(f) = self.fading {
            if f.t_c < self.n_su {
                return bad("fading.t_c", "must be at least n_su so the window is non-empty");
            }
            if f.n_blocks == 0 {
                return bad("fading.n_blocks", "must be at least 1");
            }
        }
        if let Mcs::Outage = self.reference_mcs() {
            return bad("pu_clear_sinr_db", "leaves the silent PU in outage");
        }
        Ok(())
    }

    pub fn p_max_mw(&self) -> f64 {
        dbm_to_mw(self.p_max_dbm)
    }

    pub fn received_pu_power_dbm(&self) -> f64 {
        self.pu_noise_dbm + self.pu_clear_sinr_db
    }

    /// MCS the PU runs with a silent CRN.
    pub fn reference_mcs(&self) -> Mcs {
        select_mcs(self.pu_clear_sinr_db, &self.protocol)
    }

    pub fn hr_samples(&self) -> usize {
        self.hr_samples.unwrap_or_else(|| (500 * self.n_su).max(2000))
    }

    pub fn hr_burn_in(&self) -> usize {
        self.hr_burn_in.unwrap_or(100 * self.n_su)
    }

    /// Prior box bound on each normalized gain. Defaults to the normalized
    /// gain of an SU sitting at the distance floor, the largest any generated
    /// topology can produce.
    pub fn prior_g_ub(&self) -> f64 {
        if let Some(ub) = self.prior_g_ub {
            return ub;
        }
        let i_th_ref = match self.reference_mcs() {
            Mcs::Level(k) => interference_thresholds(
                &self.protocol,
                self.received_pu_power_dbm(),
                self.pu_noise_dbm,
            )
            .ok()
            .map(|th| dbm_to_mw(th[k])),
            Mcs::Outage => None,
        };
        match i_th_ref {
            Some(i) => path_gain(self.d_min_m) / i,
            None => 1.0,
        }
    }
}

/// Power-law gain `d⁻⁴`.
pub fn path_gain(d_m: f64) -> f64 {
    d_m.powi(-4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub su_pu_dist_m: Vec<f64>,
    /// SU→PU interference gains.
    pub g: Vec<f64>,
    /// SU link gains.
    pub h: Vec<f64>,
    pub received_pu_power_dbm: f64,
    pub pu_noise_dbm: f64,
}

impl Topology {
    pub fn n_su(&self) -> usize {
        self.g.len()
    }
}

fn sample_disc_distance<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> f64 {
    // uniform in the disc, rejected inside the floor: uniform on the annulus
    loop {
        let r = cfg.su_range_m * rng.gen::<f64>().sqrt();
        if r >= cfg.d_min_m {
            return r;
        }
    }
}

pub fn generate_topology<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Topology {
    let su_pu_dist_m: Vec<f64> = (0..cfg.n_su).map(|_| sample_disc_distance(cfg, rng)).collect();
    let (lo, hi) = cfg.su_link_dist_m;
    let h = (0..cfg.n_su)
        .map(|_| path_gain(if hi > lo { rng.gen_range(lo..=hi) } else { lo }))
        .collect();
    Topology {
        g: su_pu_dist_m.iter().map(|&d| path_gain(d)).collect(),
        su_pu_dist_m,
        h,
        received_pu_power_dbm: cfg.received_pu_power_dbm(),
        pu_noise_dbm: cfg.pu_noise_dbm,
    }
}

/// Redraws every SU position (and so every interference gain) for a new
/// coherence block. SU links and the PU side stay as they were.
pub fn evolve_block_fading<R: Rng + ?Sized>(
    topo: &Topology,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Topology {
    let su_pu_dist_m: Vec<f64> =
        (0..topo.n_su()).map(|_| sample_disc_distance(cfg, rng)).collect();
    Topology {
        g: su_pu_dist_m.iter().map(|&d| path_gain(d)).collect(),
        su_pu_dist_m,
        ..topo.clone()
    }
}
