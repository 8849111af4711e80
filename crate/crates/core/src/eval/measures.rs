use nalgebra::{DVector, Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    train_global, train_local, GlobalPcaModel, LocalWaveletModel, ShapeModel, ShapeParameters,
    TrainingSet,
};
use crate::wavelet::SubdivisionHierarchy;

/// Mean and population standard deviation of a measure, in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stddev: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MeanStd {
            mean,
            stddev: var.sqrt(),
        }
    }
}

/// Cumulative variance fractions C(d) for d = 1..=T-1, over the full
/// training spectrum. Non-decreasing; the last entry is 1 (up to rounding).
/// The local model retains every direction, so its curve is identically 1.
pub fn compactness_curve(model: &GlobalPcaModel) -> Vec<f64> {
    (1..=model.spectrum().len())
        .map(|d| {
            model
                .compactness(d)
                .expect("d ranges over the stored spectrum")
        })
        .collect()
}

fn mean_vertex_distance(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).sum::<f64>() / a.len() as f64
}

fn require_loo_size(t: usize) -> Result<()> {
    if t < 3 {
        return Err(Error::InvalidArgument(format!(
            "leave-one-out generalization needs at least 3 shapes, got {t}"
        )));
    }
    Ok(())
}

/// Leave-one-out generalization of the global model: for every subject,
/// train on the remaining T-1 shapes with up to `d` modes, reconstruct the
/// held-out shape, and record the mean corresponding-vertex distance.
/// `d` is clamped to the reduced corpus rank bound `min(3n-1, T-2)`.
pub fn generalization_global(data: &TrainingSet, d: Option<usize>) -> Result<MeanStd> {
    require_loo_size(data.len())?;
    let cap = (3 * data.vertex_count() - 1).min(data.len() - 2);
    let d = d.map(|d| d.min(cap));
    let errors: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|held| -> Result<f64> {
            let rest: Vec<usize> = (0..data.len()).filter(|&i| i != held).collect();
            let model = train_global(&data.subset(&rest)?, d)?;
            let recon = model.reconstruct(data.shape(held))?;
            Ok(mean_vertex_distance(data.shape(held), &recon))
        })
        .collect::<Result<_>>()?;
    Ok(MeanStd::of(&errors))
}

/// Leave-one-out generalization of the local model. The combined basis is
/// square and full rank, so projection is exact and the result is zero up
/// to floating-point noise — kept as an executable sanity check rather than
/// a constant.
pub fn generalization_local(
    data: &TrainingSet,
    hierarchy: &SubdivisionHierarchy,
) -> Result<MeanStd> {
    require_loo_size(data.len())?;
    let errors: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|held| -> Result<f64> {
            let rest: Vec<usize> = (0..data.len()).filter(|&i| i != held).collect();
            let model = train_local(&data.subset(&rest)?, hierarchy)?;
            let recon = model.reconstruct(data.shape(held))?;
            Ok(mean_vertex_distance(data.shape(held), &recon))
        })
        .collect::<Result<_>>()?;
    Ok(MeanStd::of(&errors))
}

fn require_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "specificity needs at least one sample".into(),
        ));
    }
    Ok(())
}

fn min_distance_to_training(sample: &[Point3<f64>], data: &TrainingSet) -> f64 {
    data.shapes()
        .iter()
        .map(|s| mean_vertex_distance(sample, s))
        .fold(f64::INFINITY, f64::min)
}

/// Specificity of the global model: draw `n_samples` parameter vectors with
/// independent `Normal(0, lambda_i)` components, generate each shape, and
/// record its mean vertex distance to the closest training shape. Sampling
/// is sequential and seeded (reproducible); distances run in parallel.
pub fn specificity_global(
    model: &GlobalPcaModel,
    data: &TrainingSet,
    n_samples: usize,
    seed: u64,
) -> Result<MeanStd> {
    require_samples(n_samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let d = model.parameter_count();
    let draws: Vec<DVector<f64>> = (0..n_samples)
        .map(|_| DVector::from_fn(d, |j, _| model.sigmas()[j] * unit.sample(&mut rng)))
        .collect();
    let errors: Vec<f64> = draws
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let shape = model.generate_vector(&s)?;
            Ok(min_distance_to_training(&shape, data))
        })
        .collect::<Result<_>>()?;
    Ok(MeanStd::of(&errors))
}

/// Specificity of the local model. The learned distribution is the
/// per-coefficient Gaussian in each coefficient's rotated frame:
/// `r_k_j ~ Normal(0, sigma_k_j^2)` independently.
pub fn specificity_local(
    model: &LocalWaveletModel,
    data: &TrainingSet,
    n_samples: usize,
    seed: u64,
) -> Result<MeanStd> {
    require_samples(n_samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let n = model.vertex_count();
    let draws: Vec<Vec<Vector3<f64>>> = (0..n_samples)
        .map(|_| {
            (0..n)
                .map(|k| {
                    let s = model.coefficient_sigmas(k);
                    Vector3::new(
                        s.x * unit.sample(&mut rng),
                        s.y * unit.sample(&mut rng),
                        s.z * unit.sample(&mut rng),
                    )
                })
                .collect()
        })
        .collect();
    let errors: Vec<f64> = draws
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let shape = model.generate(&ShapeParameters::Local(r))?;
            Ok(min_distance_to_training(&shape, data))
        })
        .collect::<Result<_>>()?;
    Ok(MeanStd::of(&errors))
}
