#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use underlay_core::polytope::{Polyhedron, Side};

/// Unit box cut by `cuts` random halfspaces that keep the middle of the box
/// strictly inside.
pub fn random_polytope<R: Rng>(dim: usize, cuts: usize, rng: &mut R) -> Polyhedron {
    let mut p = Polyhedron::prior_box(dim, 1.0);
    for _ in 0..cuts {
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mid: f64 = a.iter().map(|v| 0.5 * v).sum();
        p.push(&a, Side::Le, mid + rng.gen_range(0.05..0.4));
    }
    p
}

/// Every vertex: each `dim`-subset of rows solved as equalities, kept when
/// feasible.
pub fn vertices(poly: &Polyhedron) -> Vec<Vec<f64>> {
    let n = poly.dim();
    let m = poly.n_rows();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| poly.row(idx[r]).0[c]);
        let b = DVector::from_fn(n, |r, _| poly.row(idx[r]).1);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().all(|v| v.is_finite()) && poly.contains(&x, 1e-9) {
                out.push(x);
            }
        }
        // next combination
        let mut k = n;
        while k > 0 && idx[k - 1] == m - n + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        idx[k - 1] += 1;
        for j in k..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shannon-style capacity of SU links, by hand.
pub fn capacity(p: &[f64], h: &[f64], noise: &[f64]) -> f64 {
    p.iter().zip(h).zip(noise).map(|((p, h), n)| (1.0 + p * h / n).log2()).sum()
}

/// Golden-section minimizer on `[lo, hi]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - r * (hi - lo);
        let b = lo + r * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}
