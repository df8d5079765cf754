//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::fs;
use std::time::Instant;

use common::{golden_min, random_polytope, vertices};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use underlay_core::control::exploit_waterfill;
use underlay_core::engine::*;
use underlay_core::polytope::{
    analytic_center, center_of_gravity, d_max, hit_and_run, lp_solve, BoundingBox, CgParams, NewtonParams,
    Polyhedron, Sense, Side,
};
use underlay_core::pu_link::{interference_thresholds, AcmProtocol, Mcs};
use underlay_core::scenario::{FadingConfig, ScenarioConfig};
use underlay_core::trace::{format_trace, TraceRow};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, started: Instant, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {verdict} {name}: {} [{:.0?}]", o.detail, started.elapsed());
}

/// First `count` seeds under `master` whose every coherence block has a
/// binding interference constraint.
fn binding_seeds(cfg: &ScenarioConfig, master: u64, count: usize) -> Vec<u64> {
    (0u64..)
        .map(|i| derive_seed(master, i))
        .filter(|&s| seeded_blocks(cfg, s).iter().all(|t| constraint_binds(cfg, t).unwrap()))
        .take(count)
        .collect()
}

/// Flops to 1% per run, with runs that never get there counted at `budget`.
fn censored(runs: &[RunTrace], budget: usize) -> Vec<f64> {
    runs.iter().map(|r| r.summary.flops_to_1pct.unwrap_or(budget) as f64).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn threshold_algebra() -> Outcome {
    let protocol = AcmProtocol::default_ladder();
    let cfg = ScenarioConfig::new(5);
    let th = interference_thresholds(&protocol, cfg.received_pu_power_dbm(), cfg.pu_noise_dbm).unwrap();
    let Some(Mcs::Level(k)) = protocol.find("16QAM 1/2") else {
        return Outcome { pass: false, detail: "16QAM 1/2 missing from the ladder".into() };
    };
    Outcome { pass: (th[k] + 96.97).abs() <= 0.1, detail: format!("I_th(16QAM 1/2) = {:.3} dBm", th[k]) }
}

struct StaticRuns {
    budget: usize,
    /// Censored flops-to-1% per topology: cg/mcc, ac/mcc, cg/bin, ac/bin.
    flops: [Vec<f64>; 4],
    converged: [usize; 4],
}

const COMBOS: [(LearnerKind, FeedbackKind); 4] = [
    (LearnerKind::Cgcpm, FeedbackKind::Mcc),
    (LearnerKind::Accpm, FeedbackKind::Mcc),
    (LearnerKind::Cgcpm, FeedbackKind::Binary),
    (LearnerKind::Accpm, FeedbackKind::Binary),
];

fn static_runs(n_su: usize, count: usize, budget: usize, combos: &[(LearnerKind, FeedbackKind)]) -> StaticRuns {
    let cfg = ScenarioConfig::new(n_su);
    let seeds = binding_seeds(&cfg, 2024, count);
    let mut flops: [Vec<f64>; 4] = Default::default();
    let mut converged = [0; 4];
    for (i, &(l, f)) in combos.iter().enumerate() {
        let (_, runs) = run_seeds(&cfg, l, f, budget, &seeds).unwrap();
        flops[i] = censored(&runs, budget);
        converged[i] = runs.iter().filter(|r| r.summary.flops_to_1pct.is_some()).count();
    }
    StaticRuns { budget, flops, converged }
}

fn ordering_holds(m: &[f64; 4]) -> bool {
    let [cg_mcc, ac_mcc, cg_bin, ac_bin] = *m;
    cg_mcc < ac_mcc && ac_mcc < ac_bin && cg_bin < ac_bin
}

fn static_ordering(runs: &StaticRuns) -> Outcome {
    let n = runs.flops[0].len();
    let means: [f64; 4] = std::array::from_fn(|i| mean(&runs.flops[i]));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let b = 1000;
    let hits = (0..b)
        .filter(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let m: [f64; 4] = std::array::from_fn(|i| idx.iter().map(|&j| runs.flops[i][j]).sum::<f64>() / n as f64);
            ordering_holds(&m)
        })
        .count();
    let confidence = hits as f64 / b as f64;
    let in_range = means.iter().all(|m| (30.0..=100.0).contains(m));
    let names = ["cg/mcc", "ac/mcc", "cg/bin", "ac/bin"];
    let parts: Vec<String> = (0..4)
        .map(|i| format!("{} {:.1} ({}/{} hit)", names[i], means[i], runs.converged[i], n))
        .collect();
    Outcome {
        pass: in_range && confidence >= 0.8,
        detail: format!(
            "{n} topologies, budget {}, means {}; ordering confidence {:.2}",
            runs.budget,
            parts.join(", "),
            confidence
        ),
    }
}

fn dimension_gain(n5: &StaticRuns) -> Outcome {
    let n10 = static_runs(10, 20, 600, &COMBOS[..2]);
    let gap5 = mean(&n5.flops[1]) - mean(&n5.flops[0]);
    let (cg10, ac10) = (mean(&n10.flops[0]), mean(&n10.flops[1]));
    let gap10 = ac10 - cg10;
    Outcome {
        pass: cg10 < ac10 && gap10 > gap5,
        detail: format!(
            "N=10 cg {cg10:.1} ({}/20 hit) ac {ac10:.1} ({}/20 hit), gap {gap10:.1} vs N=5 gap {gap5:.1}",
            n10.converged[0], n10.converged[1]
        ),
    }
}

struct FadingRuns {
    t_c: usize,
    t_w: usize,
    ens: [EnsembleTrace; 2],
}

fn fading_runs() -> FadingRuns {
    let mut cfg = ScenarioConfig::new(5);
    let fading = FadingConfig { t_c: 250, n_blocks: 3 };
    cfg.fading = Some(fading);
    let seeds = binding_seeds(&cfg, 808, 50);
    let flops = fading.total_flops();
    let run = |l| run_seeds(&cfg, l, FeedbackKind::Mcc, flops, &seeds).unwrap().0;
    FadingRuns { t_c: fading.t_c, t_w: fading.window(5), ens: [run(LearnerKind::Cgcpm), run(LearnerKind::Accpm)] }
}

fn fading_reconvergence(f: &FadingRuns) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, ens) in ["cg", "ac"].iter().zip(&f.ens) {
        for change in [f.t_c, 2 * f.t_c] {
            let block = &ens.mean_error[change..change + f.t_c];
            let high = block.iter().filter(|e| **e > 0.5).count();
            let low = block.iter().cloned().fold(f64::INFINITY, f64::min);
            pass &= high <= f.t_w + 20 && low < 0.1;
            parts.push(format!("{name}@{change}: {high} flops >50%, min {:.3}", low));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn fading_direction(f: &FadingRuns) -> Outcome {
    let [cg, ac] = &f.ens;
    let (i_cg, i_ac) = (cg.mean_i_pu_dbm_overall(), ac.mean_i_pu_dbm_overall());
    let (c_cg, c_ac) = (cg.mean_capacity_overall(), ac.mean_capacity_overall());
    Outcome {
        pass: i_cg <= i_ac && c_cg >= c_ac,
        detail: format!(
            "{} seeds: I_PU cg {i_cg:.2} / ac {i_ac:.2} dBm, capacity cg {c_cg:.4} / ac {c_ac:.4}",
            cg.summaries.len()
        ),
    }
}

fn grunbaum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut good = 0;
    let mut worst: f64 = 0.5;
    for _ in 0..100 {
        let cuts = rng.gen_range(3..8);
        let poly = random_polytope(2, cuts, &mut rng);
        let cg = center_of_gravity(&poly, CgParams::for_dim(2), None, &mut rng).unwrap();
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a = [theta.cos(), theta.sin()];
        let level = a[0] * cg[0] + a[1] * cg[1];
        let (mut inside, mut kept) = (0usize, 0usize);
        while inside < 20_000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            if poly.contains(&x, 0.0) {
                inside += 1;
                kept += (a[0] * x[0] + a[1] * x[1] <= level) as usize;
            }
        }
        let frac = kept as f64 / inside as f64;
        if (0.3..=0.7).contains(&frac) {
            good += 1;
        }
        if (frac - 0.5).abs() > (worst - 0.5).abs() {
            worst = frac;
        }
    }
    Outcome { pass: good >= 95, detail: format!("{good}/100 cuts kept 30-70%, most lopsided {worst:.3}") }
}

fn oracle_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();

    let mut lp_dev: f64 = 0.0;
    for dim in [2, 3] {
        for _ in 0..40 {
            let poly = random_polytope(dim, 5, &mut rng);
            let verts = vertices(&poly);
            for _ in 0..3 {
                let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let best = verts.iter().map(|v| common::dot(&c, v)).fold(f64::NEG_INFINITY, f64::max);
                let got = lp_solve(&c, Sense::Max, &poly).map(|s| s.value).unwrap_or(f64::NAN);
                lp_dev = lp_dev.max((got - best).abs());
            }
        }
    }
    let lp_ok = lp_dev <= 1e-7;
    notes.push(format!("LP dev {lp_dev:.1e}"));

    let mut ac_dev: f64 = 0.0;
    for _ in 0..20 {
        let mut poly = Polyhedron::new(1);
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for _ in 0..rng.gen_range(1..4) {
            let l = rng.gen_range(-2.0..0.0);
            poly.push(&[1.0], Side::Ge, l);
            lo.push(l);
        }
        for _ in 0..rng.gen_range(1..4) {
            let u = rng.gen_range(0.5..3.0);
            poly.push(&[1.0], Side::Le, u);
            hi.push(u);
        }
        let f = |x: f64| -lo.iter().map(|l| (x - l).ln()).sum::<f64>() - hi.iter().map(|u| (u - x).ln()).sum::<f64>();
        let a = lo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b = hi.iter().cloned().fold(f64::INFINITY, f64::min);
        let oracle = golden_min(f, a + 1e-12, b - 1e-12);
        let got = analytic_center(&poly, None, NewtonParams::default()).map(|c| c.point[0]).unwrap_or(f64::NAN);
        ac_dev = ac_dev.max((got - oracle).abs());
    }
    let ac_ok = ac_dev <= 1e-3;
    notes.push(format!("AC dev {ac_dev:.1e}"));

    let mut wf_gap = f64::NEG_INFINITY;
    for _ in 0..10 {
        let g: [f64; 2] = [rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0)];
        let h: [f64; 2] = [rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0)];
        let noise: [f64; 2] = [rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)];
        let p_max: [f64; 2] = [rng.gen_range(0.5..6.0), rng.gen_range(0.5..6.0)];
        let mut best = f64::NEG_INFINITY;
        for a in 0..200 {
            let p0 = p_max[0] * a as f64 / 199.0;
            let mut consider = |p1: f64| {
                if g[0] * p0 + g[1] * p1 <= 1.0 + 1e-12 {
                    best = best.max(common::capacity(&[p0, p1], &h, &noise));
                }
            };
            for b in 0..200 {
                consider(p_max[1] * b as f64 / 199.0);
            }
            consider(((1.0 - g[0] * p0) / g[1]).clamp(0.0, p_max[1]));
        }
        let p = exploit_waterfill(&g, &h, &noise, &p_max);
        wf_gap = wf_gap.max(best - common::capacity(&p.p, &h, &noise));
    }
    let wf_ok = wf_gap <= 1e-6;
    notes.push(format!("grid beats waterfill by at most {wf_gap:.1e}"));

    let square = Polyhedron::prior_box(2, 1.0);
    let chains = 400;
    let pts: Vec<Vec<f64>> =
        (0..chains).map(|_| hit_and_run(&square, 1, 30, &[0.5, 0.5], &mut rng).unwrap().remove(0)).collect();
    let sigma = (1.0f64 / 12.0 / chains as f64).sqrt();
    let sigma2 = (4.0f64 / 45.0 / chains as f64).sqrt();
    let mut z: f64 = 0.0;
    for i in 0..2 {
        let m1 = pts.iter().map(|p| p[i]).sum::<f64>() / chains as f64;
        let m2 = pts.iter().map(|p| p[i] * p[i]).sum::<f64>() / chains as f64;
        z = z.max(((m1 - 0.5) / sigma).abs()).max(((m2 - 1.0 / 3.0) / sigma2).abs());
    }
    let hr_ok = z <= 3.0;
    notes.push(format!("HR max |z| {z:.2}"));

    let mut dm_ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..3.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..6.0)).collect();
        let enumerated = (0..1u32 << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        let v = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
                        (c[i] - v) * (c[i] - v)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        dm_ok &= d_max(&c, &BoundingBox { lo: lo.clone(), hi: hi.clone() }) == enumerated;
    }
    notes.push(format!("d_max exact {dm_ok}"));

    Outcome { pass: lp_ok && ac_ok && wf_ok && hr_ok && dm_ok, detail: notes.join(", ") }
}

fn feedback_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut total = 0;
    let mut runs = Vec::new();
    for k in 0..8 {
        let n = rng.gen_range(1..=6);
        let mut cfg = ScenarioConfig::new(n);
        cfg.sensing_p_correct = 1.0;
        cfg.d_th = rng.gen_range(0.005..0.05);
        let learner = if k % 2 == 0 { LearnerKind::Cgcpm } else { LearnerKind::Accpm };
        let feedback = if k % 4 < 2 { FeedbackKind::Mcc } else { FeedbackKind::Binary };
        let (_, trace) = run_seeded(&cfg, learner, feedback, 1000, rng.gen()).unwrap();
        let worst = trace.summary.max_truth_violations;
        total += worst;
        runs.push(format!("N={n} {learner}/{feedback}: {worst}"));
    }
    Outcome { pass: total == 0, detail: format!("max violated inequalities per run [{}]", runs.join(", ")) }
}

fn bisection_envelope() -> Outcome {
    let cfg = ScenarioConfig::new(1);
    let u = cfg.prior_g_ub();
    let seeds = binding_seeds(&cfg, 5150, 10);
    let mut worst_err: f64 = 0.0;
    let (mut min_width, mut max_width): (f64, f64) = (1.0, 1.0);
    for &seed in &seeds {
        let topo = seeded_blocks(&cfg, seed).remove(0);
        let truth = normalized_truth(&cfg, &topo).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut s, _) =
            Session::new_static(&cfg, &topo, LearnerKind::Cgcpm, FeedbackKind::Binary, &mut rng).unwrap();
        for t in 1..=20 {
            let rec = s.step().unwrap();
            let width = u * 0.5f64.powi(t);
            // the midpoint of an interval of this width is at most half of it off
            worst_err = worst_err.max(rec.rel_error / (0.5 * width / truth));
            let bb = s.bounding_box();
            let ratio = (bb.hi[0] - bb.lo[0]) / width;
            min_width = min_width.min(ratio);
            max_width = max_width.max(ratio);
        }
    }
    Outcome {
        // widths may drop below the envelope when a probe saturates at p_max
        pass: worst_err <= 2.0 && max_width <= 2.0,
        detail: format!(
            "{} topologies, t<=20: error/envelope max {worst_err:.2}, width/2^-t in [{min_width:.2}, {max_width:.2}]",
            seeds.len()
        ),
    }
}

fn ensemble_files(cfg: &ScenarioConfig, threads: usize, dir: &std::path::Path) -> Vec<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let (_, runs) = pool.install(|| run_ensemble(cfg, LearnerKind::Cgcpm, FeedbackKind::Mcc, 6, 60)).unwrap();
    fs::create_dir_all(dir).unwrap();
    runs.iter()
        .enumerate()
        .map(|(i, r)| {
            let path = dir.join(format!("trace_{i}.csv"));
            fs::write(&path, format_trace(&TraceRow::from_trace(r))).unwrap();
            fs::read(&path).unwrap()
        })
        .collect()
}

fn determinism() -> Outcome {
    let mut cfg = ScenarioConfig::new(4);
    cfg.seed = 31;
    cfg.hr_samples = Some(800);
    let root = std::env::temp_dir().join(format!("underlay-determinism-{}", std::process::id()));
    let serial = ensemble_files(&cfg, 1, &root.join("serial"));
    let (a, b) = std::thread::scope(|s| {
        let a = s.spawn(|| ensemble_files(&cfg, 4, &root.join("a")));
        let b = s.spawn(|| ensemble_files(&cfg, 3, &root.join("b")));
        (a.join().unwrap(), b.join().unwrap())
    });
    let _ = fs::remove_dir_all(&root);
    let same = serial == a && serial == b;
    Outcome { pass: same, detail: format!("{} trace files identical across 1/4/3-thread pools: {same}", serial.len()) }
}

fn main() {
    // optional criterion ids on the command line select a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: usize| only.is_empty() || only.contains(&id);
    let mut passed = 0;
    let mut ran = 0;
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(id) {
            return;
        }
        let t = Instant::now();
        let o = f();
        report(id, name, t, &o);
        ran += 1;
        passed += o.pass as usize;
    };

    run(1, "threshold algebra", &mut threshold_algebra);
    let mut n5 = None;
    let static_n5 = || static_runs(5, 50, 300, &COMBOS);
    run(2, "static convergence ordering", &mut || {
        let r = static_n5();
        let o = static_ordering(&r);
        n5 = Some(r);
        o
    });
    run(3, "dimension-scaling gain", &mut || dimension_gain(n5.get_or_insert_with(static_n5)));
    let mut fading = None;
    run(4, "fading re-convergence", &mut || fading_reconvergence(fading.get_or_insert_with(fading_runs)));
    run(5, "fading comparison direction", &mut || fading_direction(fading.get_or_insert_with(fading_runs)));
    run(6, "Grünbaum property", &mut grunbaum);
    run(7, "oracle suites", &mut oracle_suites);
    run(8, "feedback consistency", &mut feedback_consistency);
    run(9, "1-D bisection equivalence", &mut bisection_envelope);
    run(10, "determinism", &mut determinism);

    println!("acceptance: {passed}/{ran} criteria pass");
    if passed < ran {
        std::process::exit(1);
    }
}
