//! Dense linear programming over `{x : Ax ≤ b}` with few variables.
//!
//! The primal `max cᵀx s.t. Ax ≤ b` (x free) is solved through its dual
//! `min bᵀy s.t. Aᵀy = c, y ≥ 0` with a revised simplex whose basis is only
//! `n × n`, so the cost per pivot grows linearly in the number of rows.
//! The simplex multipliers of the dual are the primal point. Pricing uses
//! Dantzig's rule and falls back to Bland's rule after a run of degenerate
//! pivots.

use nalgebra::{DMatrix, DVector};

use super::{GeometryError, Polyhedron, DEGENERATE_RADIUS, LP_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
}

const DEGENERATE_STREAK: usize = 20;

struct DualSimplex<'a> {
    n: usize,
    m: usize,
    a: &'a [f64],
    b: &'a [f64],
    /// Sign of each artificial column `±e_j`.
    art_sign: Vec<f64>,
    objective: DVector<f64>,
    basis: Vec<usize>,
    level: Vec<f64>,
}

impl<'a> DualSimplex<'a> {
    fn column(&self, idx: usize, out: &mut [f64]) {
        if idx < self.m {
            out.copy_from_slice(&self.a[idx * self.n..(idx + 1) * self.n]);
        } else {
            out.fill(0.0);
            let j = idx - self.m;
            out[j] = self.art_sign[j];
        }
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let mut mat = DMatrix::zeros(self.n, self.n);
        let mut col = vec![0.0; self.n];
        for (k, &idx) in self.basis.iter().enumerate() {
            self.column(idx, &mut col);
            for r in 0..self.n {
                mat[(r, k)] = col[r];
            }
        }
        mat
    }

    fn cost(&self, idx: usize, phase_one: bool) -> f64 {
        match (phase_one, idx < self.m) {
            (true, true) => 0.0,
            (true, false) => 1.0,
            (false, true) => self.b[idx],
            (false, false) => 0.0,
        }
    }

    /// Runs simplex iterations for one phase. Returns the multipliers.
    fn run(&mut self, phase_one: bool) -> Result<DVector<f64>, GeometryError> {
        let n = self.n;
        let limit = 50 * (self.m + n) + 100;
        let mut degenerate = 0usize;
        let mut col = vec![0.0; n];
        for _ in 0..limit {
            let mat = self.basis_matrix();
            let cost_b = DVector::from_iterator(n, self.basis.iter().map(|&i| self.cost(i, phase_one)));
            let pi = mat.transpose().lu().solve(&cost_b).ok_or(GeometryError::Unbounded)?;
            let lu = mat.lu();

            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering: Option<(usize, f64)> = None;
            // artificials never re-enter
            for i in 0..self.m {
                if self.basis.contains(&i) {
                    continue;
                }
                self.column(i, &mut col);
                let rc = self.cost(i, phase_one) - col.iter().zip(pi.iter()).map(|(x, y)| x * y).sum::<f64>();
                if rc < -LP_TOL {
                    match entering {
                        None => entering = Some((i, rc)),
                        Some((_, best)) if !bland && rc < best => entering = Some((i, rc)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((e, _)) = entering else {
                return Ok(pi);
            };

            self.column(e, &mut col);
            let dir = lu.solve(&DVector::from_column_slice(&col)).ok_or(GeometryError::Unbounded)?;
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..n {
                if dir[k] > LP_TOL {
                    let ratio = self.level[k] / dir[k];
                    let better = match leave {
                        None => true,
                        Some((lk, lr)) => {
                            ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[k] < self.basis[lk])
                        }
                    };
                    if better {
                        leave = Some((k, ratio));
                    }
                }
            }
            let Some((lk, step)) = leave else {
                // dual unbounded below, so the primal has no feasible point
                return Err(GeometryError::EmptyPolyhedron);
            };
            let step = step.max(0.0);
            degenerate = if step <= LP_TOL { degenerate + 1 } else { 0 };
            for k in 0..n {
                self.level[k] -= step * dir[k];
                if self.level[k] < 0.0 {
                    self.level[k] = 0.0;
                }
            }
            self.level[lk] = step;
            self.basis[lk] = e;
        }
        Err(GeometryError::LpIterationLimit)
    }

    /// Swaps zero-level artificials out of the basis after phase one.
    fn purge_artificials(&mut self) -> Result<(), GeometryError> {
        let mut col = vec![0.0; self.n];
        for k in 0..self.n {
            if self.basis[k] < self.m {
                continue;
            }
            let lu = self.basis_matrix().lu();
            let mut swapped = false;
            for i in 0..self.m {
                if self.basis.contains(&i) {
                    continue;
                }
                self.column(i, &mut col);
                let Some(d) = lu.solve(&DVector::from_column_slice(&col)) else {
                    return Err(GeometryError::Unbounded);
                };
                if d[k].abs() > 1e-9 {
                    self.basis[k] = i;
                    self.level[k] = 0.0;
                    swapped = true;
                    break;
                }
            }
            if !swapped {
                // rows of A do not span R^n: the primal has a free direction
                return Err(GeometryError::Unbounded);
            }
        }
        // recompute levels for the new basis
        let c = self.objective.clone();
        let y = self.basis_matrix().lu().solve(&c).ok_or(GeometryError::Unbounded)?;
        for k in 0..self.n {
            self.level[k] = y[k].max(0.0);
        }
        Ok(())
    }
}

/// `max cᵀx` subject to `Ax ≤ b` with `A` row-major `m × n` and `x` free.
pub fn maximize(a: &[f64], b: &[f64], c: &[f64]) -> Result<LpSolution, GeometryError> {
    let n = c.len();
    let m = b.len();
    assert_eq!(a.len(), m * n, "matrix shape");
    let art_sign: Vec<f64> = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut s = DualSimplex {
        n,
        m,
        a,
        b,
        basis: (m..m + n).collect(),
        level: c.iter().map(|v| v.abs()).collect(),
        art_sign,
        objective: DVector::from_column_slice(c),
    };
    s.run(true)?;
    let infeasibility: f64 = s
        .basis
        .iter()
        .zip(&s.level)
        .filter(|(&i, _)| i >= m)
        .map(|(_, &l)| l)
        .sum();
    let c_scale = c.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-9 * c_scale {
        return Err(GeometryError::Unbounded);
    }
    s.purge_artificials()?;
    let x = s.run(false)?;
    let point: Vec<f64> = x.iter().copied().collect();
    let value = point.iter().zip(c).map(|(x, c)| x * c).sum();
    Ok(LpSolution { value, point })
}

/// Optimizes a linear objective over the polyhedron.
pub fn lp_solve(objective: &[f64], sense: Sense, poly: &Polyhedron) -> Result<LpSolution, GeometryError> {
    if poly.is_trivially_infeasible() {
        return Err(GeometryError::EmptyPolyhedron);
    }
    let (a, b) = poly.matrix();
    match sense {
        Sense::Max => maximize(a, b, objective),
        Sense::Min => {
            let neg: Vec<f64> = objective.iter().map(|v| -v).collect();
            let mut sol = maximize(a, b, &neg)?;
            sol.value = -sol.value;
            Ok(sol)
        }
    }
}

/// Center and radius of the largest ball inside the polyhedron.
pub fn chebyshev_center(poly: &Polyhedron) -> Result<(Vec<f64>, f64), GeometryError> {
    if poly.is_trivially_infeasible() {
        return Err(GeometryError::EmptyPolyhedron);
    }
    let n = poly.dim();
    let ext = n + 1;
    let mut a = Vec::with_capacity((poly.n_rows() + 1) * ext);
    let mut b = Vec::with_capacity(poly.n_rows() + 1);
    for (row, off) in poly.rows() {
        a.extend_from_slice(row);
        a.push(1.0); // rows are unit-norm
        b.push(off);
    }
    a.extend(std::iter::repeat(0.0).take(n));
    a.push(-1.0);
    b.push(0.0);
    let mut c = vec![0.0; ext];
    c[n] = 1.0;
    let sol = maximize(&a, &b, &c)?;
    let radius = sol.value;
    if radius <= DEGENERATE_RADIUS {
        return Err(GeometryError::DegeneratePolyhedron { radius });
    }
    Ok((sol.point[..n].to_vec(), radius))
}
