use nalgebra::DVector;

use crate::align::SimilarityTransform;
use crate::error::Result;
use crate::fit::config::{FitConfig, FitResult};
use crate::fit::energy::refresh;
use crate::fit::lbfgs::{minimize_box, BoxBounds};
use crate::geometry::{NearestNeighborIndex, PointCloud};
use crate::model::{GlobalPcaModel, ShapeModel, ShapeParameters};

const INNER_ITERATIONS: usize = 100;
const INNER_GRADIENT_TOL: f64 = 1e-10;

/// Fit a global PCA model to a point cloud.
///
/// Iterated closest points: each outer iteration refreshes vertex-to-cloud
/// correspondences with one nearest-neighbor pass, then minimizes the frozen
/// truncated quadratic over the hyper-box `|s_j| <= c * sigma_j` with a
/// projected quasi-Newton solve. The frozen surrogate equals the true energy
/// at the expansion point and bounds it above everywhere else, so the
/// recorded energy trace never increases. Total queries stay within
/// `(max_iterations + 1) * n` for `n` model vertices.
pub fn fit_global(
    model: &GlobalPcaModel,
    cloud: &PointCloud,
    init: &SimilarityTransform,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    let started = std::time::Instant::now();
    let inv = init.inverse();
    let local_cloud = PointCloud::new(inv.apply_all(&cloud.points))?;
    let tree = NearestNeighborIndex::build(&local_cloud)?;
    let tau = config.tau / init.scale;
    let tau2 = tau * tau;
    let to_target = init.scale * init.scale;

    let d = model.parameter_count();
    let bounds = BoxBounds::symmetric(
        &model
            .sigmas()
            .iter()
            .map(|s| config.c * s)
            .collect::<Vec<_>>(),
    );

    let mean_flat = DVector::from_iterator(
        3 * model.vertex_count(),
        model.mean().iter().flat_map(|p| [p.x, p.y, p.z]),
    );

    let mut s = DVector::<f64>::zeros(d);
    let mut vertices = model.generate_vector(&s)?;
    let (mut corr, mut energy) = refresh(&vertices, &tree, tau);
    let mut trace = vec![energy * to_target];
    let mut iterations = 0;
    let mut converged = false;
    let mut inner_evaluations = 0u64;

    for _ in 0..config.max_iterations {
        iterations += 1;

        // Frozen surrogate: active residuals quadratic, truncated terms a
        // constant. Evaluated in flattened vertex space, O(n d) per call.
        let p_flat = DVector::from_iterator(
            3 * corr.points.len(),
            corr.points.iter().flat_map(|p| [p.x, p.y, p.z]),
        );
        let constant = corr.truncated as f64 * tau2;
        let active = corr.active.clone();
        let inner = minimize_box(
            s.clone(),
            &bounds,
            INNER_ITERATIONS,
            INNER_GRADIENT_TOL,
            |sv| {
                let mut r = &mean_flat + model.basis() * sv - &p_flat;
                let mut f = constant;
                for (i, ok) in active.iter().enumerate() {
                    if *ok {
                        let ri = r.fixed_rows::<3>(3 * i);
                        f += ri.norm_squared();
                    } else {
                        r.fixed_rows_mut::<3>(3 * i).fill(0.0);
                    }
                }
                let grad = model.basis().tr_mul(&r) * 2.0;
                (f, grad)
            },
        );
        inner_evaluations += inner.evaluations;

        let candidate = inner.x;
        let verts_new = model.generate_vector(&candidate)?;
        let (corr_new, e_new) = refresh(&verts_new, &tree, tau);
        if e_new >= energy {
            // The surrogate could not improve the true energy any further
            // (at convergence the refreshed value matches to rounding).
            converged = true;
            break;
        }
        let drop = energy - e_new;
        s = candidate;
        vertices = verts_new;
        corr = corr_new;
        energy = e_new;
        trace.push(energy * to_target);
        if drop <= config.tolerance * energy.max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        parameters: ShapeParameters::Global(s),
        initial_transform: init.clone(),
        fitted: init.apply_all(&vertices),
        energy_trace: trace,
        iterations,
        converged,
        nn_queries: tree.query_count(),
        energy_evaluations: inner_evaluations,
        elapsed: started.elapsed(),
    })
}
