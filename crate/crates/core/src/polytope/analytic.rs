//! Analytic center by damped Newton on the log barrier `−Σ log(b_i − a_iᵀx)`.
//!
//! With unit-norm rows each barrier term differs from the corresponding
//! `−log(g̃ᵀp − 1)` / `−log(1 − g̃ᵀp)` / `−log g̃_i` term only by an additive
//! constant, so the minimizer is the same.

use nalgebra::{DMatrix, DVector};

use super::{chebyshev_center, GeometryError, Polyhedron};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonParams {
    /// Stop once `λ²/2` drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCenter {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Final `λ²/2`.
    pub decrement: f64,
}

const ALPHA: f64 = 0.25;
const BETA: f64 = 0.5;

fn barrier(poly: &Polyhedron, x: &[f64]) -> Option<f64> {
    let mut f = 0.0;
    for (a, b) in poly.rows() {
        let s = b - crate::units::dot(a, x);
        if s <= 0.0 {
            return None;
        }
        f -= s.ln();
    }
    Some(f)
}

/// Gradient and Hessian of the barrier at a strictly interior `x`.
pub(crate) fn barrier_derivatives(poly: &Polyhedron, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = poly.dim();
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for (a, b) in poly.rows() {
        let s = b - crate::units::dot(a, x);
        let inv = 1.0 / s;
        for i in 0..n {
            grad[i] += a[i] * inv;
            let ai = a[i] * inv * inv;
            for j in 0..=i {
                hess[(i, j)] += ai * a[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            hess[(j, i)] = hess[(i, j)];
        }
    }
    (grad, hess)
}

/// Newton step `−H⁻¹g`, solved after Jacobi scaling of `H`.
fn newton_step(grad: &DVector<f64>, hess: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = grad.len();
    let d = DVector::from_iterator(n, (0..n).map(|i| 1.0 / hess[(i, i)].max(f64::MIN_POSITIVE).sqrt()));
    let mut scaled = hess.clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    let rhs = -grad.component_mul(&d);
    let sol = match scaled.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            for i in 0..n {
                scaled[(i, i)] += 1e-12;
            }
            scaled.cholesky()?.solve(&rhs)
        }
    };
    Some(sol.component_mul(&d))
}

/// Minimizer of the barrier of `poly`, started from `warm_start` when it is
/// strictly interior and from the Chebyshev center otherwise.
pub fn analytic_center(
    poly: &Polyhedron,
    warm_start: Option<&[f64]>,
    params: NewtonParams,
) -> Result<AnalyticCenter, GeometryError> {
    let mut x = match warm_start {
        Some(w) if poly.is_interior(w) => w.to_vec(),
        _ => chebyshev_center(poly)?.0,
    };
    let mut f = barrier(poly, &x).ok_or(GeometryError::NotInterior)?;
    for iter in 0..params.max_iter {
        let (grad, hess) = barrier_derivatives(poly, &x);
        let Some(step) = newton_step(&grad, &hess) else {
            return Err(GeometryError::MaxIterationsExceeded { best: x });
        };
        let slope = grad.dot(&step);
        let decrement = -slope / 2.0;
        if decrement < params.tol {
            return Ok(AnalyticCenter { point: x, iterations: iter, decrement });
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, di)| xi + t * di).collect();
            if let Some(ft) = barrier(poly, &trial) {
                if ft <= f + ALPHA * t * slope {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            t *= BETA;
        }
        if !accepted {
            // rounding floor: the decrease is below what f can resolve
            if decrement < 1e-6 {
                return Ok(AnalyticCenter { point: x, iterations: iter, decrement });
            }
            return Err(GeometryError::MaxIterationsExceeded { best: x });
        }
    }
    Err(GeometryError::MaxIterationsExceeded { best: x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Side;

    /// Golden-section minimization of a 1-D barrier on `(lo, hi)`.
    fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
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

    #[test]
    fn one_dimensional_oracle() {
        // 4g > 1, 2g ≤ 1, g > 0
        let mut p = Polyhedron::new(1);
        p.push(&[4.0], Side::Ge, 1.0);
        p.push(&[2.0], Side::Le, 1.0);
        p.push(&[1.0], Side::Ge, 0.0);
        let oracle = golden_min(
            |g| -(4.0 * g - 1.0).ln() - (1.0 - 2.0 * g).ln() - g.ln(),
            0.25 + 1e-12,
            0.5 - 1e-12,
        );
        let ac = analytic_center(&p, None, NewtonParams::default()).unwrap();
        assert!((ac.point[0] - oracle).abs() < 1e-6, "{} vs {oracle}", ac.point[0]);
        assert!((ac.point[0] - 0.3944).abs() < 1e-3);
    }

    #[test]
    fn unit_interval_is_symmetric() {
        let p = Polyhedron::prior_box(1, 1.0);
        let ac = analytic_center(&p, Some(&[0.9]), NewtonParams::default()).unwrap();
        assert!((ac.point[0] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn gradient_vanishes_and_matches_finite_differences() {
        let mut p = Polyhedron::prior_box(3, 5.0);
        p.push(&[1.0, 2.0, 0.5], Side::Le, 3.0);
        p.push(&[0.3, 0.2, 1.0], Side::Ge, 0.4);
        let ac = analytic_center(&p, None, NewtonParams::default()).unwrap();
        let (grad, hess) = barrier_derivatives(&p, &ac.point);
        let scaled: f64 = (0..3).map(|i| (grad[i] / hess[(i, i)].sqrt()).powi(2)).sum::<f64>().sqrt();
        assert!(scaled < 1e-6, "{scaled}");

        // analytic gradient vs central differences at an off-center point
        let x = [1.0, 0.5, 0.8];
        let (g, _) = barrier_derivatives(&p, &x);
        for i in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (barrier(&p, &xp).unwrap() - barrier(&p, &xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-4 * g[i].abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }
}
