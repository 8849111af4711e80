use nalgebra::{DVector, Point3};

use crate::error::{Error, Result};
use crate::geometry::NearestNeighborIndex;
use crate::model::GlobalPcaModel;

/// Correspondences frozen for one outer iteration: nearest cloud point per
/// model vertex plus the truncation mask at the expansion point.
pub(crate) struct Correspondences {
    pub points: Vec<Point3<f64>>,
    /// False where the match distance exceeded tau.
    pub active: Vec<bool>,
    pub truncated: usize,
}

/// One nearest-neighbor pass (`vertices.len()` queries). Returns the frozen
/// correspondences and the true robust energy `sum_i min(d_i^2, tau^2)`.
pub(crate) fn refresh(
    vertices: &[Point3<f64>],
    tree: &NearestNeighborIndex,
    tau: f64,
) -> (Correspondences, f64) {
    let tau2 = tau * tau;
    let mut points = Vec::with_capacity(vertices.len());
    let mut active = Vec::with_capacity(vertices.len());
    let mut truncated = 0usize;
    let mut energy = 0.0;
    for v in vertices {
        let (j, d2) = tree.nearest_squared(v);
        points.push(tree.points()[j]);
        if d2 <= tau2 {
            active.push(true);
            energy += d2;
        } else {
            active.push(false);
            truncated += 1;
            energy += tau2;
        }
    }
    (
        Correspondences {
            points,
            active,
            truncated,
        },
        energy,
    )
}

/// Robust data energy of a vertex set against a target cloud:
/// `sum_i min(||v_i - nn(v_i)||^2, tau^2)`. Costs one query per vertex.
pub fn energy(vertices: &[Point3<f64>], target: &NearestNeighborIndex, tau: f64) -> Result<f64> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }
    Ok(refresh(vertices, target, tau).1)
}

/// Gradient of the robust energy for a global model, with nearest neighbors
/// and the truncation mask frozen at `params`: `2 * Phi^T r`, truncated
/// residuals zeroed. The energy itself is only piecewise smooth; away from
/// neighbor switches and the truncation boundary this matches central
/// finite differences.
pub fn energy_gradient(
    model: &GlobalPcaModel,
    params: &DVector<f64>,
    target: &NearestNeighborIndex,
    tau: f64,
) -> Result<DVector<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tau must be positive and finite, got {tau}"
        )));
    }
    let vertices = model.generate_vector(params)?;
    let (corr, _) = refresh(&vertices, target, tau);
    let mut r = DVector::<f64>::zeros(3 * vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        if corr.active[i] {
            let d = v - corr.points[i];
            r[3 * i] = d.x;
            r[3 * i + 1] = d.y;
            r[3 * i + 2] = d.z;
        }
    }
    Ok(model.basis().tr_mul(&r) * 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;
    use crate::model::{train_global, ShapeModel, TrainingSet};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn simple_model(seed: u64) -> GlobalPcaModel {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = 30;
        let shapes: Vec<Vec<Point3<f64>>> = (0..10)
            .map(|_| {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                (0..n)
                    .map(|i| {
                        Point3::new(
                            i as f64,
                            a * (i as f64 * 0.3).sin(),
                            b * (i as f64 * 0.7).cos(),
                        )
                    })
                    .collect()
            })
            .collect();
        train_global(&TrainingSet::new_aligned(shapes), None).unwrap()
    }

    #[test]
    fn energy_matches_brute_force() {
        let model = simple_model(1);
        let mut rng = StdRng::seed_from_u64(2);
        let cloud: Vec<Point3<f64>> = (0..120)
            .map(|_| {
                Point3::new(
                    rng.gen_range(0.0..30.0),
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.5..1.5),
                )
            })
            .collect();
        let tree = NearestNeighborIndex::build(&PointCloud::new(cloud.clone()).unwrap()).unwrap();
        let tau = 0.8;
        let got = energy(model.mean(), &tree, tau).unwrap();
        let want: f64 = model
            .mean()
            .iter()
            .map(|v| {
                cloud
                    .iter()
                    .map(|p| (v - p).norm_squared())
                    .fold(f64::INFINITY, f64::min)
                    .min(tau * tau)
            })
            .sum();
        assert_eq!(got, want);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let model = simple_model(3);
        let d = model.parameter_count();
        let mut rng = StdRng::seed_from_u64(4);
        let cloud: Vec<Point3<f64>> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(0.0..30.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let tree = NearestNeighborIndex::build(&PointCloud::new(cloud).unwrap()).unwrap();
        let tau = 2.0;
        let sig = model.sigmas().to_vec();

        let mut checked = 0;
        for trial in 0..30 {
            let params = DVector::from_fn(d, |j, _| {
                rng.gen_range(-0.5..0.5) * sig[j] * ((trial + j) as f64 * 0.1).cos().abs()
            });
            let g = energy_gradient(&model, &params, &tree, tau).unwrap();
            for j in 0..d {
                let h = 1e-5 * sig[j].max(1e-6);
                let mut p = params.clone();
                p[j] = params[j] + h;
                let e_plus = energy(&model.generate_vector(&p).unwrap(), &tree, tau).unwrap();
                p[j] = params[j] - h;
                let e_minus = energy(&model.generate_vector(&p).unwrap(), &tree, tau).unwrap();
                let fd = (e_plus - e_minus) / (2.0 * h);
                let denom = fd.abs().max(g[j].abs());
                if denom < 1e-7 {
                    continue; // both negligible
                }
                let rel = (g[j] - fd).abs() / denom;
                // Generic points only: skip spots where the finite-difference
                // stencil straddles a neighbor switch or the truncation edge.
                if rel < 1e-5 {
                    checked += 1;
                } else {
                    let e0 = energy(&model.generate_vector(&params).unwrap(), &tree, tau).unwrap();
                    let curvature = (e_plus + e_minus - 2.0 * e0).abs() / (h * h);
                    assert!(
                        curvature > 10.0,
                        "gradient mismatch at a smooth point: {} vs {} (rel {rel})",
                        g[j],
                        fd
                    );
                }
            }
        }
        assert!(checked > 50, "too few generic points checked: {checked}");
    }

    #[test]
    fn gradient_is_zero_at_exact_fit_and_under_full_truncation() {
        let model = simple_model(5);
        let d = model.parameter_count();
        let params = DVector::zeros(d);
        let cloud = PointCloud::new(model.mean().to_vec()).unwrap();
        let tree = NearestNeighborIndex::build(&cloud).unwrap();
        let g = energy_gradient(&model, &params, &tree, 1.0).unwrap();
        assert_eq!(g.amax(), 0.0);

        // Cloud far beyond tau: every term truncated, gradient identically 0.
        let far = PointCloud::new(vec![Point3::new(1e6, 1e6, 1e6); 4]).unwrap();
        let far_tree = NearestNeighborIndex::build(&far).unwrap();
        let g = energy_gradient(&model, &params, &far_tree, 1.0).unwrap();
        assert_eq!(g.amax(), 0.0);
        let e = energy(model.mean(), &far_tree, 1.0).unwrap();
        assert_eq!(e, model.vertex_count() as f64);
    }
}
