//! The learning loop: probe, sense, cut, re-center. Static and windowed
//! slow-fading variants, per-flop traces and seeded ensembles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constraints::{binary_to_pair, feedback_to_pair, gamma_ratios, ConstraintSet, GammaRatios};
use crate::control::{capacity, epsilon, exploit_waterfill, explore_sample};
use crate::polytope::{
    analytic_center, center_of_gravity, chebyshev_center, d_max, extremes, BoundingBox, CgParams,
    GeometryError, NewtonParams, Polyhedron,
};
use crate::pu_link::{interference_thresholds, pu_sinr, select_mcs, Mcs};
use crate::scenario::{evolve_block_fading, generate_topology, ConfigError, ScenarioConfig, Topology};
use crate::sensing::{sense, SensingModel};
use crate::units::{dbm_to_mw, dot, mw_to_dbm, norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    Accpm,
    Cgcpm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeedbackKind {
    Binary,
    Mcc,
}

impl FromStr for LearnerKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accpm" => Ok(Self::Accpm),
            "cgcpm" => Ok(Self::Cgcpm),
            _ => Err(ConfigError::InvalidValue {
                key: "learner".into(),
                value: s.into(),
                reason: "expected accpm or cgcpm".into(),
            }),
        }
    }
}

impl FromStr for FeedbackKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(Self::Binary),
            "mcc" => Ok(Self::Mcc),
            _ => Err(ConfigError::InvalidValue {
                key: "feedback".into(),
                value: s.into(),
                reason: "expected binary or mcc".into(),
            }),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Accpm => "accpm",
            Self::Cgcpm => "cgcpm",
        })
    }
}

impl fmt::Display for FeedbackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Binary => "binary",
            Self::Mcc => "mcc",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("normalized gain of SU {su} is {value:e}, outside the prior box [0, {bound:e}]")]
    TruthOutsidePrior { su: usize, value: f64, bound: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("fading run needs a fading configuration")]
    MissingFading,
    #[error("reference sensing at flop 0 reported outage")]
    ReferenceOutage,
}

/// What the loop did when the polyhedron lost its interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// The newest pair was dropped.
    DroppedNewest,
    /// Windowed runs: the oldest pairs were dropped so the newest fits.
    DroppedOldest,
    /// Even without it the set was unusable; back to the prior box.
    PriorReset,
    /// The center routine failed; the Chebyshev center was used instead.
    ChebyshevFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlopRecord {
    pub flop: usize,
    pub g_est: Vec<f64>,
    pub rel_error: f64,
    pub i_pu_dbm: f64,
    pub capacity: f64,
    pub epsilon: f64,
    /// Fused (sensed) MCS.
    pub mcs: Mcs,
    pub explored: bool,
    pub pair_stored: bool,
    pub recovery: Option<Recovery>,
    /// Stored inequalities the current truth violates.
    pub truth_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub flops_to_1pct: Option<usize>,
    /// Linear-mean interference over the run, in dBm.
    pub mean_i_pu_dbm: f64,
    pub mean_capacity: f64,
    pub recoveries: usize,
    pub max_truth_violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<FlopRecord>,
    pub summary: RunSummary,
}

impl RunTrace {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rel_error).collect()
    }
}

/// `‖ĝ − g̃‖ / ‖g̃‖`.
pub fn error_metric(g_est: &[f64], g_true: &[f64]) -> f64 {
    assert_eq!(g_est.len(), g_true.len(), "dimension mismatch");
    let diff: f64 = g_est.iter().zip(g_true).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    diff / norm(g_true)
}

const DEBOUNCE_FLOPS: usize = 5;

/// First flop with error ≤ 1% whose next five flops stay ≤ 2% (fewer if
/// the trace ends first).
pub fn flops_to_1pct(errors: &[f64]) -> Option<usize> {
    (0..errors.len()).find(|&t| {
        errors[t] <= 0.01 && errors[t + 1..errors.len().min(t + 1 + DEBOUNCE_FLOPS)].iter().all(|e| *e <= 0.02)
    })
}

/// Normalized truth `g / I_th_ref`.
pub fn normalized_truth(cfg: &ScenarioConfig, topo: &Topology) -> Result<Vec<f64>, EngineError> {
    let i_th = reference_threshold_mw(cfg, topo)?;
    Ok(topo.g.iter().map(|g| g / i_th).collect())
}

fn reference_threshold_mw(cfg: &ScenarioConfig, topo: &Topology) -> Result<f64, EngineError> {
    let k = match select_mcs(topo.received_pu_power_dbm - topo.pu_noise_dbm, &cfg.protocol) {
        Mcs::Level(k) => k,
        Mcs::Outage => return Err(EngineError::ReferenceOutage),
    };
    let th = interference_thresholds(&cfg.protocol, topo.received_pu_power_dbm, topo.pu_noise_dbm)
        .map_err(|e| ConfigError::Invalid { key: "mcs", reason: e.to_string() })?;
    Ok(dbm_to_mw(th[k]))
}

fn check_prior(truth: &[f64], bound: f64) -> Result<(), EngineError> {
    match truth.iter().position(|v| !(*v >= 0.0 && *v <= bound)) {
        Some(su) => Err(EngineError::TruthOutsidePrior { su, value: truth[su], bound }),
        None => Ok(()),
    }
}

/// Chebyshev radius, in unit-box coordinates, below which the newest cut is
/// treated as beyond numerical resolution.
const RESOLUTION_RADIUS: f64 = 1e-9;

/// Origin and per-axis scale mapping `bbox` onto the unit cube.
fn frame(bbox: &BoundingBox) -> (Vec<f64>, Vec<f64>) {
    let top = bbox.hi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-12 * top).max(f64::MIN_POSITIVE);
    (bbox.lo.clone(), bbox.widths().iter().map(|w| w.max(floor)).collect())
}

/// Per-learner state carried across flops.
struct Localizer {
    learner: LearnerKind,
    dim: usize,
    prior_ub: f64,
    cg: CgParams,
    newton: NewtonParams,
    center: Vec<f64>,
    bbox: BoundingBox,
}

impl Localizer {
    fn new(cfg: &ScenarioConfig, learner: LearnerKind) -> Self {
        let n = cfg.n_su;
        let prior_ub = cfg.prior_g_ub();
        Self {
            learner,
            dim: n,
            prior_ub,
            cg: CgParams { samples: cfg.hr_samples(), burn_in: cfg.hr_burn_in() },
            newton: NewtonParams { tol: cfg.newton_tol, max_iter: cfg.newton_max_iter },
            center: vec![0.5 * prior_ub; n],
            bbox: BoundingBox { lo: vec![0.0; n], hi: vec![prior_ub; n] },
        }
    }

    /// New center and box for `poly`; `Err` when it has no usable interior.
    ///
    /// Geometry runs in coordinates where the bounding box is the unit cube,
    /// so LP and interiority tolerances act relative to the current
    /// uncertainty rather than to the absolute gain scale. Both centers are
    /// affine-equivariant, so mapping back loses nothing.
    fn locate<R: Rng + ?Sized>(
        &self,
        poly: &Polyhedron,
        rng: &mut R,
    ) -> Result<(Vec<f64>, BoundingBox, bool), GeometryError> {
        let (bbox, origin, scale, unit, cheb) = self.frame_poly(poly)?;
        let found = match self.learner {
            LearnerKind::Accpm => {
                let warm: Vec<f64> = (0..self.dim).map(|i| (self.center[i] - origin[i]) / scale[i]).collect();
                match analytic_center(&unit, Some(&warm), self.newton) {
                    Ok(ac) => Some(ac.point),
                    Err(GeometryError::MaxIterationsExceeded { best }) if unit.is_interior(&best) => Some(best),
                    Err(_) => None,
                }
            }
            LearnerKind::Cgcpm => center_of_gravity(&unit, self.cg, None, rng).ok().filter(|c| unit.is_interior(c)),
        };
        let fallback = found.is_none();
        let y = found.unwrap_or(cheb);
        let center = (0..self.dim).map(|i| origin[i] + scale[i] * y[i]).collect();
        Ok((center, bbox, fallback))
    }

    /// New bounding box, unit-cube frame and Chebyshev center of `poly`.
    #[allow(clippy::type_complexity)]
    fn frame_poly(
        &self,
        poly: &Polyhedron,
    ) -> Result<(BoundingBox, Vec<f64>, Vec<f64>, Polyhedron, Vec<f64>), GeometryError> {
        let (o1, s1) = frame(&self.bbox);
        let coarse = extremes(&poly.rescaled(&o1, &s1))?;
        let bbox = BoundingBox {
            lo: (0..self.dim).map(|i| (o1[i] + s1[i] * coarse.lo[i]).max(0.0)).collect(),
            hi: (0..self.dim).map(|i| o1[i] + s1[i] * coarse.hi[i]).collect(),
        };
        let (origin, scale) = frame(&bbox);
        let unit = poly.rescaled(&origin, &scale);
        let (cheb, radius) = chebyshev_center(&unit)?;
        if radius < RESOLUTION_RADIUS {
            return Err(GeometryError::DegeneratePolyhedron { radius });
        }
        Ok((bbox, origin, scale, unit, cheb))
    }

    /// Re-centers on `set`, dropping the newest pair or resetting to the
    /// prior box when the polyhedron has no interior.
    fn update<R: Rng + ?Sized>(&mut self, set: &mut ConstraintSet, windowed: bool, rng: &mut R) -> Option<Recovery> {
        let build = |s: &ConstraintSet| Polyhedron::from_constraints(s, self.dim, self.prior_ub);
        let mut recovery = None;
        let located = match self.locate(&build(set), rng) {
            Ok(r) => r,
            Err(_) => {
                // a windowed set favours fresh pairs: trim from the old end
                // as little as keeps the newest pair usable
                let n = set.len();
                let usable = |k: usize| {
                    let mut trimmed = set.clone();
                    trimmed.drop_oldest(k);
                    self.frame_poly(&build(&trimmed)).is_ok()
                };
                if windowed && n > 1 && usable(n - 1) {
                    let (mut lo, mut hi) = (1, n - 1);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if usable(mid) {
                            hi = mid;
                        } else {
                            lo = mid + 1;
                        }
                    }
                    set.drop_oldest(lo);
                    recovery = Some(Recovery::DroppedOldest);
                } else {
                    set.pop();
                    recovery = Some(Recovery::DroppedNewest);
                }
                match self.locate(&build(set), rng) {
                    Ok(r) => r,
                    Err(_) => {
                        set.clear();
                        recovery = Some(Recovery::PriorReset);
                        self.locate(&build(set), rng).expect("prior box has an interior")
                    }
                }
            }
        };
        let (center, bbox, fallback) = located;
        if fallback && recovery.is_none() {
            recovery = Some(Recovery::ChebyshevFallback);
        }
        self.center = center;
        self.bbox = bbox;
        recovery
    }
}

/// A learning run that advances one flop per `step`.
///
/// Flop 0 happens in `new`: the CRN stays silent and senses the reference
/// MCS. `C` drives channel redraws and is only used in fading runs.
pub struct Session<R: Rng, C: Rng> {
    cfg: ScenarioConfig,
    feedback: FeedbackKind,
    topo: Topology,
    truth: Vec<f64>,
    p_max: Vec<f64>,
    su_noise: Vec<f64>,
    model: SensingModel,
    loc: Localizer,
    set: ConstraintSet,
    reference: Mcs,
    ratios: GammaRatios,
    fading: Option<(usize, usize, C)>,
    rng: R,
    t: usize,
    last_probe: Vec<f64>,
}

impl<R: Rng> Session<R, R> {
    pub fn new_static(
        cfg: &ScenarioConfig,
        topo: &Topology,
        learner: LearnerKind,
        feedback: FeedbackKind,
        rng: R,
    ) -> Result<(Self, FlopRecord), EngineError> {
        Self::start(cfg, topo, learner, feedback, None, rng)
    }
}

impl<R: Rng, C: Rng> Session<R, C> {
    /// Slow-fading session: gains are redrawn every `t_c` flops from
    /// `channel_rng` and only the latest `⌊t_c/N⌋` pairs shape the polyhedron.
    pub fn new_fading(
        cfg: &ScenarioConfig,
        topo: &Topology,
        learner: LearnerKind,
        feedback: FeedbackKind,
        channel_rng: C,
        rng: R,
    ) -> Result<(Self, FlopRecord), EngineError> {
        let f = cfg.fading.ok_or(EngineError::MissingFading)?;
        Self::start(cfg, topo, learner, feedback, Some((f.t_c, f.window(cfg.n_su), channel_rng)), rng)
    }

    fn start(
        cfg: &ScenarioConfig,
        topo: &Topology,
        learner: LearnerKind,
        feedback: FeedbackKind,
        fading: Option<(usize, usize, C)>,
        mut rng: R,
    ) -> Result<(Self, FlopRecord), EngineError> {
        let n = cfg.n_su;
        let truth = normalized_truth(cfg, topo)?;
        check_prior(&truth, cfg.prior_g_ub())?;
        let model = SensingModel { p_correct: cfg.sensing_p_correct, n_levels: cfg.protocol.len() };

        let true_ref = select_mcs(pu_sinr(topo, &vec![0.0; n]), &cfg.protocol);
        let reference = sense(true_ref, n, &model, &mut rng);
        let k = match reference {
            Mcs::Level(k) => k,
            Mcs::Outage => return Err(EngineError::ReferenceOutage),
        };
        let loc = Localizer::new(cfg, learner);
        let first = FlopRecord {
            flop: 0,
            g_est: loc.center.clone(),
            rel_error: error_metric(&loc.center, &truth),
            i_pu_dbm: f64::NEG_INFINITY,
            capacity: 0.0,
            epsilon: 1.0,
            mcs: reference,
            explored: false,
            pair_stored: false,
            recovery: None,
            truth_violations: 0,
        };
        let session = Self {
            cfg: cfg.clone(),
            feedback,
            topo: topo.clone(),
            truth,
            p_max: vec![cfg.p_max_mw(); n],
            su_noise: vec![dbm_to_mw(cfg.su_noise_dbm); n],
            model,
            loc,
            set: ConstraintSet::new(),
            reference,
            ratios: gamma_ratios(&cfg.protocol, k),
            fading,
            rng,
            t: 0,
            last_probe: vec![0.0; n],
        };
        Ok((session, first))
    }

    /// Flop `t + 1`: choose a probe, sense, cut, re-center.
    pub fn step(&mut self) -> Result<FlopRecord, EngineError> {
        let t = self.t + 1;
        let window = match &mut self.fading {
            None => None,
            Some((t_c, t_w, ch_rng)) => {
                if t % *t_c == 0 {
                    self.topo = evolve_block_fading(&self.topo, &self.cfg, ch_rng);
                    self.truth = normalized_truth(&self.cfg, &self.topo)?;
                    check_prior(&self.truth, self.cfg.prior_g_ub())?;
                }
                Some((t, *t_w))
            }
        };
        let rng = &mut self.rng;

        let g_est = self.loc.center.clone();
        let eps = epsilon(d_max(&g_est, &self.loc.bbox), norm(&g_est), self.cfg.d_th).unwrap_or(1.0);
        let mut explored = false;
        let exploit = || exploit_waterfill(&g_est, &self.topo.h, &self.su_noise, &self.p_max).p;
        let p = if rng.gen::<f64>() < eps {
            match explore_sample(&g_est, &self.p_max, self.cfg.hr_burn_in(), rng) {
                Ok(pv) => {
                    explored = true;
                    pv.p
                }
                Err(_) => exploit(),
            }
        } else {
            exploit()
        };

        let i_pu = dot(&self.topo.g, &p);
        let true_mcs = select_mcs(pu_sinr(&self.topo, &p), &self.cfg.protocol);
        let sensed = sense(true_mcs, self.cfg.n_su, &self.model, rng);
        let pair = match self.feedback {
            FeedbackKind::Mcc => feedback_to_pair(&p, sensed, &self.ratios, t).ok(),
            FeedbackKind::Binary => Some(binary_to_pair(&p, sensed < self.reference, t)),
        };
        let pair_stored = pair.is_some();
        if let Some(pair) = pair {
            self.set.push(pair);
        }
        if let Some((t, t_w)) = window {
            self.set.retain_window(t, t_w);
        }
        let recovery = self.loc.update(&mut self.set, window.is_some(), rng);
        self.t = t;

        let record = FlopRecord {
            flop: t,
            g_est: self.loc.center.clone(),
            rel_error: error_metric(&self.loc.center, &self.truth),
            i_pu_dbm: mw_to_dbm(i_pu),
            capacity: capacity(&p, &self.topo.h, &self.su_noise),
            epsilon: eps,
            mcs: sensed,
            explored,
            pair_stored: pair_stored && !matches!(recovery, Some(Recovery::DroppedNewest | Recovery::PriorReset)),
            recovery,
            truth_violations: self.set.violations(&self.truth, 1e-12),
        };
        self.last_probe = p;
        Ok(record)
    }

    /// Current normalized truth.
    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn estimate(&self) -> &[f64] {
        &self.loc.center
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.loc.bbox
    }

    /// Power vector of the latest probe.
    pub fn last_probe(&self) -> &[f64] {
        &self.last_probe
    }

    pub fn flop(&self) -> usize {
        self.t
    }

    /// The polyhedron the current estimate was located in.
    pub fn polyhedron(&self) -> Polyhedron {
        let mut set = self.set.clone();
        if let Some((_, t_w, _)) = &self.fading {
            set.retain_window(self.t, *t_w);
        }
        Polyhedron::from_constraints(&set, self.cfg.n_su, self.cfg.prior_g_ub())
    }
}

fn run_session<R: Rng, C: Rng>(
    started: Result<(Session<R, C>, FlopRecord), EngineError>,
    flops: usize,
) -> Result<RunTrace, EngineError> {
    let (mut session, first) = started?;
    let mut records = Vec::with_capacity(flops);
    if flops > 0 {
        records.push(first);
    }
    for _ in 1..flops {
        records.push(session.step()?);
    }
    let summary = summarize(&records);
    Ok(RunTrace { records, summary })
}

fn summarize(records: &[FlopRecord]) -> RunSummary {
    let errors: Vec<f64> = records.iter().map(|r| r.rel_error).collect();
    let len = records.len().max(1) as f64;
    let mean_i_mw = records.iter().map(|r| dbm_to_mw(r.i_pu_dbm)).sum::<f64>() / len;
    RunSummary {
        flops_to_1pct: flops_to_1pct(&errors),
        mean_i_pu_dbm: mw_to_dbm(mean_i_mw),
        mean_capacity: records.iter().map(|r| r.capacity).sum::<f64>() / len,
        recoveries: records.iter().filter(|r| r.recovery.is_some()).count(),
        max_truth_violations: records.iter().map(|r| r.truth_violations).max().unwrap_or(0),
    }
}

/// Static-channel run on `topo`.
pub fn run_static<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    topo: &Topology,
    learner: LearnerKind,
    feedback: FeedbackKind,
    flops: usize,
    rng: &mut R,
) -> Result<RunTrace, EngineError> {
    run_session(Session::new_static(cfg, topo, learner, feedback, rng), flops)
}

/// Slow-fading run; see [`Session::new_fading`].
pub fn run_fading<R: Rng + ?Sized, C: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    topo: &Topology,
    learner: LearnerKind,
    feedback: FeedbackKind,
    flops: usize,
    channel_rng: &mut C,
    rng: &mut R,
) -> Result<RunTrace, EngineError> {
    run_session(Session::new_fading(cfg, topo, learner, feedback, channel_rng, rng), flops)
}

/// Seed of run `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TOPOLOGY_STREAM: u64 = 0;
const CHANNEL_STREAM: u64 = 1;
const LEARNER_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One seeded run: topology, channel evolution and learner randomness all
/// come from independent streams of `seed`, so every learner/feedback combo
/// sees the same topology and the same fading sequence.
pub fn run_seeded(
    cfg: &ScenarioConfig,
    learner: LearnerKind,
    feedback: FeedbackKind,
    flops: usize,
    seed: u64,
) -> Result<(Topology, RunTrace), EngineError> {
    let topo = generate_topology(cfg, &mut stream(seed, TOPOLOGY_STREAM));
    let mut rng = stream(seed, LEARNER_STREAM);
    let trace = if cfg.fading.is_some() {
        run_fading(cfg, &topo, learner, feedback, flops, &mut stream(seed, CHANNEL_STREAM), &mut rng)?
    } else {
        run_static(cfg, &topo, learner, feedback, flops, &mut rng)?
    };
    Ok((topo, trace))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleTrace {
    pub mean_error: Vec<f64>,
    pub mean_i_pu_dbm: Vec<f64>,
    pub mean_capacity: Vec<f64>,
    pub mean_epsilon: Vec<f64>,
    pub summaries: Vec<RunSummary>,
}

impl EnsembleTrace {
    /// Runs that reached the 1% criterion and their mean flop count.
    pub fn mean_flops_to_1pct(&self) -> (usize, Option<f64>) {
        let hits: Vec<f64> = self.summaries.iter().filter_map(|s| s.flops_to_1pct).map(|f| f as f64).collect();
        let mean = (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64);
        (hits.len(), mean)
    }

    pub fn mean_i_pu_dbm_overall(&self) -> f64 {
        let n = self.summaries.len().max(1) as f64;
        mw_to_dbm(self.summaries.iter().map(|s| dbm_to_mw(s.mean_i_pu_dbm)).sum::<f64>() / n)
    }

    pub fn mean_capacity_overall(&self) -> f64 {
        self.summaries.iter().map(|s| s.mean_capacity).sum::<f64>() / self.summaries.len().max(1) as f64
    }
}

fn collect_runs<F>(n: usize, f: F) -> Vec<Result<RunTrace, EngineError>>
where
    F: Fn(usize) -> Result<RunTrace, EngineError> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Independent runs with seeds derived from `cfg.seed`, averaged per flop.
pub fn run_ensemble(
    cfg: &ScenarioConfig,
    learner: LearnerKind,
    feedback: FeedbackKind,
    n_topologies: usize,
    flops: usize,
) -> Result<(EnsembleTrace, Vec<RunTrace>), EngineError> {
    let seeds: Vec<u64> = (0..n_topologies as u64).map(|i| derive_seed(cfg.seed, i)).collect();
    run_seeds(cfg, learner, feedback, flops, &seeds)
}

/// One run per seed, averaged per flop. Results are merged in seed order
/// whatever the scheduling.
pub fn run_seeds(
    cfg: &ScenarioConfig,
    learner: LearnerKind,
    feedback: FeedbackKind,
    flops: usize,
    seeds: &[u64],
) -> Result<(EnsembleTrace, Vec<RunTrace>), EngineError> {
    let runs: Vec<RunTrace> = collect_runs(seeds.len(), |i| {
        run_seeded(cfg, learner, feedback, flops, seeds[i]).map(|(_, t)| t)
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    Ok((aggregate(&runs, flops), runs))
}

/// Whether full power from every SU would break the reference threshold.
/// If not, no probe can ever be degraded and the gains stay unidentifiable.
pub fn constraint_binds(cfg: &ScenarioConfig, topo: &Topology) -> Result<bool, EngineError> {
    let total: f64 = normalized_truth(cfg, topo)?.iter().sum();
    Ok(total * cfg.p_max_mw() > 1.0)
}

/// Channel of every coherence block a seeded run will see (one block for a
/// static channel).
pub fn seeded_blocks(cfg: &ScenarioConfig, seed: u64) -> Vec<Topology> {
    let mut topo = generate_topology(cfg, &mut stream(seed, TOPOLOGY_STREAM));
    let Some(f) = cfg.fading else { return vec![topo] };
    let mut ch = stream(seed, CHANNEL_STREAM);
    let mut blocks = vec![topo.clone()];
    for _ in 1..f.n_blocks {
        topo = evolve_block_fading(&topo, cfg, &mut ch);
        blocks.push(topo.clone());
    }
    blocks
}

/// Per-flop arithmetic means. Interference is averaged in mW.
pub fn aggregate(runs: &[RunTrace], flops: usize) -> EnsembleTrace {
    let k = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&FlopRecord) -> f64| -> Vec<f64> {
        (0..flops).map(|t| runs.iter().map(|r| f(&r.records[t])).sum::<f64>() / k).collect()
    };
    EnsembleTrace {
        mean_error: mean(&|r| r.rel_error),
        mean_i_pu_dbm: mean(&|r| dbm_to_mw(r.i_pu_dbm)).into_iter().map(mw_to_dbm).collect(),
        mean_capacity: mean(&|r| r.capacity),
        mean_epsilon: mean(&|r| r.epsilon),
        summaries: runs.iter().map(|r| r.summary.clone()).collect(),
    }
}
