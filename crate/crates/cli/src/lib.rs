//! Command implementations behind the `underlay` binary: config loading,
//! trace files and the replication ensembles.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use underlay_core::constraints::gamma_ratios;
use underlay_core::engine::{
    derive_seed, run_ensemble, run_seeded, EngineError, FeedbackKind, LearnerKind,
};
use underlay_core::pu_link::{interference_thresholds, Mcs};
use underlay_core::scenario::{ConfigError, ExperimentConfig, FadingConfig};

pub use underlay_core::trace::{format_trace, parse_trace, TraceParseError, TraceRow, TRACE_HEADER};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("run failed: {0}")]
    Engine(#[from] EngineError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("unknown figure `{0}` (expected fig3, fig8 or fig11)")]
    UnknownFigure(String),
    #[error("{0}")]
    Protocol(String),
}

impl CliError {
    /// 1 for anything wrong with the inputs, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } | CliError::UnknownFigure(_) | CliError::Protocol(_) => 1,
            CliError::Engine(EngineError::Config(_) | EngineError::TruthOutsidePrior { .. }) => 1,
            CliError::Engine(_) | CliError::Write { .. } => 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunManifest {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn load(&self) -> Result<ExperimentConfig, CliError> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|source| CliError::ReadConfig { path: path.clone(), source })?,
            None => String::new(),
        };
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        Ok(ExperimentConfig::parse_with_overrides(&text, &overrides)?)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Single run; writes `<out>/trace.csv` and returns the summary block.
pub fn cmd_run(manifest: &RunManifest) -> Result<String, CliError> {
    let cfg = manifest.load()?;
    let (_, trace) = run_seeded(&cfg.scenario, cfg.learner, cfg.feedback, cfg.flops, derive_seed(cfg.scenario.seed, 0))?;
    let path = manifest.out.join("trace.csv");
    write_file(&path, &format_trace(&TraceRow::from_trace(&trace)))?;
    let s = &trace.summary;
    let mut out = String::new();
    let _ = writeln!(out, "learner          {}", cfg.learner);
    let _ = writeln!(out, "feedback         {}", cfg.feedback);
    let _ = writeln!(out, "n_su             {}", cfg.scenario.n_su);
    let _ = writeln!(out, "flops            {}", trace.records.len());
    let _ = writeln!(
        out,
        "flops_to_1pct    {}",
        s.flops_to_1pct.map_or_else(|| "not reached".to_string(), |f| f.to_string())
    );
    let _ = writeln!(out, "final_error      {:.6}", trace.records.last().map_or(f64::NAN, |r| r.rel_error));
    let _ = writeln!(out, "mean_i_pu_dbm    {:.3}", s.mean_i_pu_dbm);
    let _ = writeln!(out, "mean_capacity    {:.4} bit/s/Hz", s.mean_capacity);
    let _ = writeln!(out, "recoveries       {}", s.recoveries);
    let _ = writeln!(out, "trace            {}", path.display());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig8,
    Fig11,
}

impl std::str::FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig8" => Ok(Figure::Fig8),
            "fig11" => Ok(Figure::Fig11),
            other => Err(CliError::UnknownFigure(other.to_string())),
        }
    }
}

/// One ensemble to run for a figure.
#[derive(Clone, Debug, PartialEq)]
pub struct Combo {
    pub name: String,
    pub n_su: usize,
    pub learner: LearnerKind,
    pub feedback: FeedbackKind,
    pub fading: Option<FadingConfig>,
    pub flops: usize,
}

pub fn figure_combos(fig: Figure, flops: usize) -> Vec<Combo> {
    use FeedbackKind::{Binary, Mcc};
    use LearnerKind::{Accpm, Cgcpm};
    let combo = |n_su, learner, feedback, fading: Option<FadingConfig>, flops| {
        let prefix = match fig {
            Figure::Fig3 => "fig3".to_string(),
            Figure::Fig8 => "fig8".to_string(),
            Figure::Fig11 => format!("fig11_n{n_su}"),
        };
        Combo { name: format!("{prefix}_{learner}_{feedback}"), n_su, learner, feedback, fading, flops }
    };
    match fig {
        Figure::Fig3 => [(Cgcpm, Mcc), (Accpm, Mcc), (Cgcpm, Binary), (Accpm, Binary)]
            .into_iter()
            .map(|(l, f)| combo(5, l, f, None, flops))
            .collect(),
        Figure::Fig8 => {
            let fading = FadingConfig { t_c: 250, n_blocks: 3 };
            [Cgcpm, Accpm].into_iter().map(|l| combo(5, l, Mcc, Some(fading), fading.total_flops())).collect()
        }
        Figure::Fig11 => [5, 10]
            .into_iter()
            .flat_map(|n| [Cgcpm, Accpm].into_iter().map(move |l| (n, l)))
            .map(|(n, l)| combo(n, l, Mcc, None, flops))
            .collect(),
    }
}

/// Runs every ensemble of `fig` and writes `<out>/<combo>.csv` with the
/// per-flop mean error. Returns one summary line per combo.
pub fn cmd_replicate(fig: Figure, manifest: &RunManifest) -> Result<String, CliError> {
    let base = manifest.load()?;
    let mut report = String::new();
    for combo in figure_combos(fig, base.flops) {
        let mut scenario = base.scenario.clone();
        scenario.n_su = combo.n_su;
        scenario.fading = combo.fading;
        scenario.validate()?;
        let (ens, _) = run_ensemble(&scenario, combo.learner, combo.feedback, base.n_topologies, combo.flops)?;
        let mut text = String::from("flop,mean_error,mean_i_pu_dbm,mean_capacity\n");
        for t in 0..combo.flops {
            let _ = writeln!(
                text,
                "{t},{},{},{}",
                ens.mean_error[t], ens.mean_i_pu_dbm[t], ens.mean_capacity[t]
            );
        }
        write_file(&manifest.out.join(format!("{}.csv", combo.name)), &text)?;
        let (hits, mean) = ens.mean_flops_to_1pct();
        let _ = writeln!(
            report,
            "{:<24} runs {:>4}  reached_1pct {:>4}  mean_flops_to_1pct {:>8}  mean_i_pu_dbm {:>9.3}  mean_capacity {:.4}",
            combo.name,
            ens.summaries.len(),
            hits,
            mean.map_or_else(|| "-".to_string(), |m| format!("{m:.1}")),
            ens.mean_i_pu_dbm_overall(),
            ens.mean_capacity_overall(),
        );
    }
    Ok(report)
}

/// Threshold table: label, γ, I_th and c_j against the reference MCS.
pub fn cmd_thresholds(manifest: &RunManifest) -> Result<String, CliError> {
    let cfg = manifest.load()?;
    let s = &cfg.scenario;
    let rx = s.received_pu_power_dbm();
    let th = interference_thresholds(&s.protocol, rx, s.pu_noise_dbm).map_err(|e| CliError::Protocol(e.to_string()))?;
    let k = match s.reference_mcs() {
        Mcs::Level(k) => k,
        Mcs::Outage => return Err(CliError::Protocol("reference MCS is outage".into())),
    };
    let ratios = gamma_ratios(&s.protocol, k);
    let mut out = String::new();
    let _ = writeln!(out, "{:<14} {:>8} {:>12} {:>9}", "mcs", "gamma_db", "i_th_dbm", "c");
    for (j, e) in s.protocol.entries().iter().enumerate() {
        let marker = if j == k { "  (reference)" } else { "" };
        let _ = writeln!(out, "{:<14} {:>8.2} {:>12.2} {:>9.5}{marker}", e.label, e.gamma_db, th[j], ratios.c[j]);
    }
    Ok(out)
}
