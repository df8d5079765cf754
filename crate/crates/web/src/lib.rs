//! Browser demo: step a two-user localizer and watch the polyhedron shrink,
//! try the capped waterfilling, and plot a full error curve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use underlay_core::control::{capacity, exploit_waterfill};
use underlay_core::engine::{normalized_truth, run_seeded, FeedbackKind, LearnerKind, Session};
use underlay_core::polytope::Polyhedron;
use underlay_core::scenario::{path_gain, ScenarioConfig, Topology};
use wasm_bindgen::prelude::*;

fn kinds(learner: &str, feedback: &str) -> Result<(LearnerKind, FeedbackKind), String> {
    let l = learner.parse::<LearnerKind>().map_err(|e| e.to_string())?;
    let f = feedback.parse::<FeedbackKind>().map_err(|e| e.to_string())?;
    Ok((l, f))
}

/// SU links fixed at 200 m.
fn two_users(cfg: &ScenarioConfig, d1: f64, d2: f64) -> Topology {
    Topology {
        su_pu_dist_m: vec![d1, d2],
        g: vec![path_gain(d1), path_gain(d2)],
        h: vec![path_gain(200.0); 2],
        received_pu_power_dbm: cfg.received_pu_power_dbm(),
        pu_noise_dbm: cfg.pu_noise_dbm,
    }
}

/// Clips the rectangle `[lo, hi]` by every row of `poly` and returns the
/// polygon as `x0, y0, x1, y1, …`.
pub fn clip_polygon(poly: &Polyhedron, lo: [f64; 2], hi: [f64; 2]) -> Vec<f64> {
    let mut pts = vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    for (a, b) in poly.rows() {
        let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
        let mut next = Vec::with_capacity(pts.len() + 1);
        for i in 0..pts.len() {
            let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
            let (sp, sq) = (side(&p), side(&q));
            if sp <= 0.0 {
                next.push(p);
            }
            if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                let t = sp / (sp - sq);
                next.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        pts = next;
        if pts.is_empty() {
            break;
        }
    }
    pts.into_iter().flatten().collect()
}

/// Two SUs at the given distances from the PU receiver.
#[wasm_bindgen]
pub struct Demo {
    session: Session<ChaCha8Rng, ChaCha8Rng>,
    last_error: f64,
}

impl Demo {
    pub fn create(d1: f64, d2: f64, learner: &str, feedback: &str, seed: u64) -> Result<Demo, String> {
        let (l, f) = kinds(learner, feedback)?;
        let cfg = ScenarioConfig::new(2);
        let topo = two_users(&cfg, d1, d2);
        let (session, first) =
            Session::new_static(&cfg, &topo, l, f, ChaCha8Rng::seed_from_u64(seed)).map_err(|e| e.to_string())?;
        Ok(Demo { session, last_error: first.rel_error })
    }

    pub fn advance(&mut self) -> Result<f64, String> {
        let rec = self.session.step().map_err(|e| e.to_string())?;
        self.last_error = rec.rel_error;
        Ok(rec.rel_error)
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(d1: f64, d2: f64, learner: &str, feedback: &str, seed: u64) -> Result<Demo, JsError> {
        Self::create(d1, d2, learner, feedback, seed).map_err(|e| JsError::new(&e))
    }

    /// One flop; returns the new relative error.
    pub fn step(&mut self) -> Result<f64, JsError> {
        self.advance().map_err(|e| JsError::new(&e))
    }

    pub fn flop(&self) -> usize {
        self.session.flop()
    }

    pub fn error(&self) -> f64 {
        self.last_error
    }

    pub fn estimate(&self) -> Vec<f64> {
        self.session.estimate().to_vec()
    }

    pub fn truth(&self) -> Vec<f64> {
        self.session.truth().to_vec()
    }

    pub fn probe(&self) -> Vec<f64> {
        self.session.last_probe().to_vec()
    }

    /// `[lo_x, lo_y, hi_x, hi_y]`.
    #[wasm_bindgen(js_name = boundingBox)]
    pub fn bounding_box(&self) -> Vec<f64> {
        let bb = self.session.bounding_box();
        vec![bb.lo[0], bb.lo[1], bb.hi[0], bb.hi[1]]
    }

    /// Current polyhedron as a flat vertex list.
    pub fn polygon(&self) -> Vec<f64> {
        let bb = self.session.bounding_box();
        clip_polygon(&self.session.polyhedron(), [bb.lo[0], bb.lo[1]], [bb.hi[0], bb.hi[1]])
    }
}

/// Capped waterfilling under `ĝᵀp ≤ 1`; the capacity is appended after the
/// powers.
#[wasm_bindgen]
pub fn waterfill(g: &[f64], h: &[f64], noise: &[f64], p_max: &[f64]) -> Result<Vec<f64>, JsError> {
    let n = g.len();
    if [h.len(), noise.len(), p_max.len()].iter().any(|&l| l != n) {
        return Err(JsError::new("all four vectors need the same length"));
    }
    let p = exploit_waterfill(g, h, noise, p_max).p;
    let c = capacity(&p, h, noise);
    Ok(p.into_iter().chain(std::iter::once(c)).collect())
}

pub fn error_curve_for(n_su: usize, learner: &str, feedback: &str, flops: usize, seed: u64) -> Result<Vec<f64>, String> {
    let (l, f) = kinds(learner, feedback)?;
    let cfg = ScenarioConfig::new(n_su);
    cfg.validate().map_err(|e| e.to_string())?;
    let (_, trace) = run_seeded(&cfg, l, f, flops, seed).map_err(|e| e.to_string())?;
    Ok(trace.errors())
}

/// Relative error per flop of one seeded run on a random topology.
#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve(n_su: usize, learner: &str, feedback: &str, flops: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    error_curve_for(n_su, learner, feedback, flops, seed).map_err(|e| JsError::new(&e))
}

/// Normalized gains `g / I_th` of two SUs at the given distances.
#[wasm_bindgen(js_name = normalizedGains)]
pub fn normalized_gains(d1: f64, d2: f64) -> Vec<f64> {
    let cfg = ScenarioConfig::new(2);
    normalized_truth(&cfg, &two_users(&cfg, d1, d2)).unwrap_or_default()
}
