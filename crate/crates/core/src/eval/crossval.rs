use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::align::SimilarityTransform;
use crate::error::{Error, Result};
use crate::eval::distance::{cumulative_error_curve, SummaryStats};
use crate::fit::{fit_global, fit_local, FitConfig};
use crate::geometry::PointCloud;
use crate::model::{train_global, train_local, TrainingSet};
use crate::wavelet::SubdivisionHierarchy;

const FOLDS: usize = 10;
pub(crate) const CURVE_STEP_MM: f64 = 0.1;

/// Model family trained on each fold of a cross-validation run.
#[derive(Debug, Clone)]
pub enum CvModel {
    Global { modes: Option<usize> },
    Local { hierarchy: SubdivisionHierarchy },
}

/// Pooled corresponding-vertex errors from the 10-fold protocol.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Fold index of every shape, corpus order.
    pub fold_of: Vec<usize>,
    /// Mean corresponding-vertex error of each held-out fit, mm, corpus order.
    pub per_shape_mean_mm: Vec<f64>,
    /// Cumulative fraction of pooled per-vertex errors at 0.1 mm steps.
    pub curve: Vec<(f64, f64)>,
    /// Stats over the pooled per-vertex errors, mm.
    pub pooled: SummaryStats,
}

/// Seeded fold assignment, stratified by class label when labels exist:
/// shapes of each label are shuffled independently and dealt round-robin,
/// so every fold sees close to the corpus-wide label mix.
fn assign_folds(data: &TrainingSet, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dealt: Vec<usize> = Vec::with_capacity(data.len());
    match data.labels() {
        Some(labels) => {
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, label) in labels.iter().enumerate() {
                groups.entry(label).or_default().push(i);
            }
            for group in groups.values_mut() {
                group.shuffle(&mut rng);
                dealt.extend_from_slice(group);
            }
        }
        None => {
            dealt.extend(0..data.len());
            dealt.shuffle(&mut rng);
        }
    }
    let mut fold_of = vec![0usize; data.len()];
    for (pos, &i) in dealt.iter().enumerate() {
        fold_of[i] = pos % FOLDS;
    }
    fold_of
}

/// 10-fold cross-validation: train on nine folds, fit every shape of the
/// tenth as an unstructured point cloud (identity initialization — the
/// corpus is already in one aligned frame), and measure the error between
/// each fitted vertex and its ground-truth corresponding vertex. Pooled
/// per-vertex errors feed the cumulative curve.
pub fn cross_validate_10fold(
    data: &TrainingSet,
    model: &CvModel,
    fit: &FitConfig,
    seed: u64,
) -> Result<CrossValidation> {
    if data.len() < FOLDS {
        return Err(Error::InvalidArgument(format!(
            "10-fold cross-validation needs at least {FOLDS} shapes, got {}",
            data.len()
        )));
    }
    if !data.is_aligned() {
        return Err(Error::InvalidArgument(
            "cross-validation expects an aligned training set".into(),
        ));
    }
    let fold_of = assign_folds(data, seed);
    let identity = SimilarityTransform::identity();

    let mut per_shape_mean_mm = vec![0.0f64; data.len()];
    let mut pooled: Vec<f64> = Vec::with_capacity(data.len() * data.vertex_count());
    for fold in 0..FOLDS {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != fold).collect();
        let held_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == fold).collect();
        if held_idx.is_empty() {
            continue;
        }
        let train_set = data.subset(&train_idx)?;
        enum Trained {
            Global(crate::model::GlobalPcaModel),
            Local(crate::model::LocalWaveletModel),
        }
        let trained = match model {
            CvModel::Global { modes } => {
                let cap = (3 * data.vertex_count() - 1).min(train_set.len() - 1);
                Trained::Global(train_global(&train_set, modes.map(|d| d.min(cap)))?)
            }
            CvModel::Local { hierarchy } => Trained::Local(train_local(&train_set, hierarchy)?),
        };
        let fits: Vec<Vec<f64>> = held_idx
            .par_iter()
            .map(|&i| -> Result<Vec<f64>> {
                let truth = data.shape(i);
                let cloud = PointCloud::new(truth.to_vec())?;
                let result = match &trained {
                    Trained::Global(m) => fit_global(m, &cloud, &identity, fit)?,
                    Trained::Local(m) => fit_local(m, &cloud, &identity, fit)?,
                };
                Ok(result
                    .fitted
                    .iter()
                    .zip(truth)
                    .map(|(a, b)| (a - b).norm())
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (&i, errors) in held_idx.iter().zip(&fits) {
            per_shape_mean_mm[i] = errors.iter().sum::<f64>() / errors.len() as f64;
            pooled.extend_from_slice(errors);
        }
    }

    let curve = cumulative_error_curve(&pooled, CURVE_STEP_MM)?;
    let stats = SummaryStats::of(&pooled)?;
    Ok(CrossValidation {
        fold_of,
        per_shape_mean_mm,
        curve,
        pooled: stats,
    })
}
