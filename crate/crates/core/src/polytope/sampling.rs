//! Hit-and-Run sampling and the Monte-Carlo center of gravity.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{chebyshev_center, BoundingBox, GeometryError, Polyhedron, MIN_CHORD};

/// Sample budget for the center-of-gravity estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CgParams {
    pub samples: usize,
    pub burn_in: usize,
}

impl CgParams {
    pub fn for_dim(n: usize) -> Self {
        Self { samples: (500 * n).max(2000), burn_in: 100 * n }
    }
}

/// Runs the walk, handing every post-burn-in point to `visit`.
///
/// Directions are isotropic in the coordinates `x_i / scale_i`; a diagonal
/// affine change of variables keeps the stationary law uniform.
fn walk<R, F>(
    poly: &Polyhedron,
    n_samples: usize,
    burn_in: usize,
    start: &[f64],
    scale: Option<&[f64]>,
    rng: &mut R,
    mut visit: F,
) -> Result<(), GeometryError>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]),
{
    let n = poly.dim();
    if !poly.is_interior(start) {
        return Err(GeometryError::NotInterior);
    }
    let (a, b) = poly.matrix();
    let m = b.len();
    let mut x = start.to_vec();
    let mut slack = poly.slacks(&x);
    let mut dir = vec![0.0; n];
    let mut ad = vec![0.0; m];
    for step in 0..burn_in + n_samples {
        if step % 64 == 63 {
            slack = poly.slacks(&x);
        }
        for (i, d) in dir.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *d = z * scale.map_or(1.0, |s| s[i]);
        }
        let dir_norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let mut t_lo = f64::NEG_INFINITY;
        let mut t_hi = f64::INFINITY;
        for r in 0..m {
            let row = &a[r * n..(r + 1) * n];
            let v: f64 = row.iter().zip(&dir).map(|(p, q)| p * q).sum();
            ad[r] = v;
            if v > 0.0 {
                t_hi = t_hi.min(slack[r] / v);
            } else if v < 0.0 {
                t_lo = t_lo.max(slack[r] / v);
            }
        }
        if !(t_hi.is_finite() && t_lo.is_finite()) || (t_hi - t_lo) * dir_norm < MIN_CHORD {
            return Err(GeometryError::ChordCollapse);
        }
        // open chord: redraw if rounding lands on the boundary
        let mut tries = 0;
        loop {
            let u: f64 = rng.gen();
            let t = t_lo + u * (t_hi - t_lo);
            if ad.iter().zip(&slack).all(|(v, s)| s - t * v > 0.0) {
                for (xi, di) in x.iter_mut().zip(&dir) {
                    *xi += t * di;
                }
                for (s, v) in slack.iter_mut().zip(&ad) {
                    *s -= t * v;
                }
                break;
            }
            tries += 1;
            if tries > 32 {
                return Err(GeometryError::ChordCollapse);
            }
        }
        if step >= burn_in {
            visit(&x);
        }
    }
    Ok(())
}

/// `n_samples` Hit-and-Run points after discarding `burn_in` steps.
pub fn hit_and_run<R: Rng + ?Sized>(
    poly: &Polyhedron,
    n_samples: usize,
    burn_in: usize,
    start: &[f64],
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, GeometryError> {
    hit_and_run_scaled(poly, n_samples, burn_in, start, None, rng)
}

/// As [`hit_and_run`] with per-coordinate direction scales.
pub fn hit_and_run_scaled<R: Rng + ?Sized>(
    poly: &Polyhedron,
    n_samples: usize,
    burn_in: usize,
    start: &[f64],
    scale: Option<&[f64]>,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, GeometryError> {
    let mut out = Vec::with_capacity(n_samples);
    walk(poly, n_samples, burn_in, start, scale, rng, |x| out.push(x.to_vec()))?;
    Ok(out)
}

/// Mean of Hit-and-Run samples started at the Chebyshev center.
///
/// Passing the polyhedron's bounding box rounds the walk to its extents,
/// which matters once `P_t` becomes thin along some axes.
pub fn center_of_gravity<R: Rng + ?Sized>(
    poly: &Polyhedron,
    params: CgParams,
    bbox: Option<&BoundingBox>,
    rng: &mut R,
) -> Result<Vec<f64>, GeometryError> {
    let (start, _) = chebyshev_center(poly)?;
    let scale: Option<Vec<f64>> = bbox.map(|bb| {
        bb.widths().iter().map(|w| if *w > 0.0 { *w } else { 1.0 }).collect()
    });
    let mut sum = vec![0.0; poly.dim()];
    let mut count = 0usize;
    walk(poly, params.samples, params.burn_in, &start, scale.as_deref(), rng, |x| {
        for (s, v) in sum.iter_mut().zip(x) {
            *s += v;
        }
        count += 1;
    })?;
    Ok(sum.into_iter().map(|s| s / count.max(1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::Side;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean(xs: &[Vec<f64>], i: usize) -> f64 {
        xs.iter().map(|x| x[i]).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn unit_square_moments() {
        let sq = Polyhedron::prior_box(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = hit_and_run(&sq, 20_000, 200, &[0.5, 0.5], &mut rng).unwrap();
        assert!(xs.iter().all(|x| sq.is_interior(x)));
        for i in 0..2 {
            assert!((mean(&xs, i) - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn interval_mean() {
        let mut p = Polyhedron::new(1);
        p.push(&[1.0], Side::Ge, 0.25);
        p.push(&[1.0], Side::Le, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs = hit_and_run(&p, 20_000, 10, &[0.3], &mut rng).unwrap();
        assert!((mean(&xs, 0) - 0.375).abs() < 0.005);
    }

    #[test]
    fn rejects_boundary_start() {
        let sq = Polyhedron::prior_box(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(hit_and_run(&sq, 10, 0, &[0.0, 0.5], &mut rng), Err(GeometryError::NotInterior));
    }

    #[test]
    fn center_of_gravity_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params = CgParams { samples: 20_000, burn_in: 200 };
        let mut simplex = Polyhedron::prior_box(2, 10.0);
        simplex.push(&[1.0, 1.0], Side::Le, 1.0);
        let cg = center_of_gravity(&simplex, params, None, &mut rng).unwrap();
        assert!((cg[0] - 1.0 / 3.0).abs() < 0.01 && (cg[1] - 1.0 / 3.0).abs() < 0.01, "{cg:?}");

        let sq = Polyhedron::prior_box(2, 1.0);
        let cg = center_of_gravity(&sq, params, None, &mut rng).unwrap();
        assert!((cg[0] - 0.5).abs() < 0.01 && (cg[1] - 0.5).abs() < 0.01);

        let mut seg = Polyhedron::new(1);
        seg.push(&[1.0], Side::Ge, 0.25);
        seg.push(&[1.0], Side::Le, 0.5);
        let cg = center_of_gravity(&seg, params, None, &mut rng).unwrap();
        assert!((cg[0] - 0.375).abs() < 0.005);
    }

    #[test]
    fn scaled_walk_stays_uniform_in_thin_box() {
        // 1000:1 aspect ratio; scaled directions should still give the midpoint
        let mut p = Polyhedron::new(2);
        p.push(&[1.0, 0.0], Side::Ge, 0.0);
        p.push(&[1.0, 0.0], Side::Le, 1000.0);
        p.push(&[0.0, 1.0], Side::Ge, 0.0);
        p.push(&[0.0, 1.0], Side::Le, 1.0);
        let bb = BoundingBox { lo: vec![0.0, 0.0], hi: vec![1000.0, 1.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cg = center_of_gravity(&p, CgParams { samples: 20_000, burn_in: 200 }, Some(&bb), &mut rng)
            .unwrap();
        assert!((cg[0] / 1000.0 - 0.5).abs() < 0.02 && (cg[1] - 0.5).abs() < 0.02, "{cg:?}");
    }
}
