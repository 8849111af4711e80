use nalgebra::{DMatrix, DVector, Point3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::params::ShapeParameters;
use crate::model::training::TrainingSet;
use crate::model::ShapeModel;

/// Global PCA over flattened vertex coordinates.
///
/// Shapes are stacked as 3n-vectors (x0, y0, z0, x1, ...). The covariance is
/// the biased 1/T form; its rank is at most min(3n - 1, T - 1), so eigen
/// decomposition runs on the T x T Gram matrix and left vectors are recovered
/// from it. `eigenvalues` keeps the full T - 1 spectrum so compactness curves
/// can be computed for any d, while `basis` retains only the `parameter_count`
/// leading modes.
#[derive(Debug, Clone)]
pub struct GlobalPcaModel {
    mean: Vec<Point3<f64>>,
    /// 3n x d, columns are unit eigenvectors ordered by decreasing eigenvalue.
    basis: DMatrix<f64>,
    /// Eigenvalues matching `basis` columns.
    retained: DVector<f64>,
    /// Full spectrum, length T - 1, descending, zero-padded past the rank.
    eigenvalues: DVector<f64>,
    /// sqrt of `retained`, cached for the fitters.
    sigmas: Vec<f64>,
}

fn flatten(shape: &[Point3<f64>]) -> DVector<f64> {
    DVector::from_iterator(3 * shape.len(), shape.iter().flat_map(|p| [p.x, p.y, p.z]))
}

fn unflatten(v: &DVector<f64>) -> Vec<Point3<f64>> {
    v.as_slice()
        .chunks_exact(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect()
}

/// Train a global PCA model with `d` modes (`None` keeps every mode above
/// the rank threshold). `d` must lie in `1..=min(3n - 1, T - 1)`; if the
/// corpus's numerical rank is lower than the request, only the rank is kept
/// (zero-variance directions have no well-defined eigenvector).
pub fn train_global(training: &TrainingSet, d: Option<usize>) -> Result<GlobalPcaModel> {
    if !training.is_aligned() {
        return Err(Error::InvalidArgument(
            "training set must be aligned before PCA".into(),
        ));
    }
    let t = training.len();
    let n = training.vertex_count();
    if t < 2 {
        return Err(Error::InvalidArgument(
            "global PCA needs at least two training shapes".into(),
        ));
    }
    let dim = 3 * n;
    if let Some(d) = d {
        let cap = (dim - 1).min(t - 1);
        if d == 0 || d > cap {
            return Err(Error::InvalidArgument(format!(
                "d = {d} out of range 1..={cap} for {t} shapes of {n} vertices"
            )));
        }
    }
    let mut mean = DVector::<f64>::zeros(dim);
    let flats: Vec<DVector<f64>> = training.shapes().iter().map(|s| flatten(s)).collect();
    for f in &flats {
        mean += f;
    }
    mean /= t as f64;

    // Centered data matrix A (3n x T); covariance is (1/T) A A^T.
    let mut a = DMatrix::<f64>::zeros(dim, t);
    for (i, f) in flats.iter().enumerate() {
        a.column_mut(i).copy_from(&(f - &mean));
    }

    // Gram trick: eigenvectors of (1/T) A^T A share eigenvalues with the
    // covariance; left vectors are A u / sqrt(T lambda).
    let gram = a.transpose() * &a / t as f64;
    let eig = SymmetricEigen::new(gram);

    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });

    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::Degenerate(
            "training shapes are identical; covariance has no spread".into(),
        ));
    }
    let threshold = lambda_max * 1e-12;

    let rank_cap = (dim - 1).min(t - 1);
    let mut kept: Vec<usize> = order
        .iter()
        .cloned()
        .filter(|&i| eig.eigenvalues[i] > threshold)
        .collect();
    kept.truncate(rank_cap);
    if let Some(d) = d {
        kept.truncate(d);
    }
    if kept.is_empty() {
        return Err(Error::Degenerate(
            "no eigenvalue above the rank threshold".into(),
        ));
    }

    let mut basis = DMatrix::<f64>::zeros(dim, kept.len());
    let mut retained = DVector::<f64>::zeros(kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let lambda = eig.eigenvalues[i];
        let mut v = &a * eig.eigenvectors.column(i) / (t as f64 * lambda).sqrt();
        // Sign convention: the entry of largest magnitude is positive, so
        // repeated training runs produce bit-identical bases.
        let mut pivot = 0.0f64;
        for &x in v.iter() {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        if pivot < 0.0 {
            v.neg_mut();
        }
        basis.column_mut(col).copy_from(&v);
        retained[col] = lambda;
    }

    // Full spectrum for compactness: T - 1 entries, descending, clamped at 0.
    let mut eigenvalues = DVector::<f64>::zeros(t - 1);
    for (slot, &i) in order.iter().take(t - 1).enumerate() {
        eigenvalues[slot] = eig.eigenvalues[i].max(0.0);
    }

    Ok(GlobalPcaModel::from_parts(
        unflatten(&mean),
        basis,
        retained,
        eigenvalues,
    ))
}

impl GlobalPcaModel {
    pub(crate) fn from_parts(
        mean: Vec<Point3<f64>>,
        basis: DMatrix<f64>,
        retained: DVector<f64>,
        eigenvalues: DVector<f64>,
    ) -> Self {
        let sigmas = retained.iter().map(|l| l.max(0.0).sqrt()).collect();
        GlobalPcaModel {
            mean,
            basis,
            retained,
            eigenvalues,
            sigmas,
        }
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn retained_eigenvalues(&self) -> &DVector<f64> {
        &self.retained
    }

    /// Full spectrum (length T - 1, descending).
    pub fn spectrum(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Fraction of total variance captured by the first `d` modes,
    /// `d` in `1..=T-1` (the stored spectrum length).
    pub fn compactness(&self, d: usize) -> Result<f64> {
        if d == 0 || d > self.eigenvalues.len() {
            return Err(Error::InvalidArgument(format!(
                "compactness d = {d} out of range 1..={}",
                self.eigenvalues.len()
            )));
        }
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return Ok(1.0);
        }
        Ok(self.eigenvalues.iter().take(d).sum::<f64>() / total)
    }

    pub fn generate_vector(&self, params: &DVector<f64>) -> Result<Vec<Point3<f64>>> {
        if params.len() != self.basis.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameters for a {}-mode model",
                params.len(),
                self.basis.ncols()
            )));
        }
        let flat = flatten(&self.mean) + &self.basis * params;
        Ok(unflatten(&flat))
    }

    pub fn project_vector(&self, shape: &[Point3<f64>]) -> Result<DVector<f64>> {
        if shape.len() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape has {} vertices, model expects {}",
                shape.len(),
                self.mean.len()
            )));
        }
        let centered = flatten(shape) - flatten(&self.mean);
        Ok(self.basis.tr_mul(&centered))
    }
}

impl ShapeModel for GlobalPcaModel {
    fn vertex_count(&self) -> usize {
        self.mean.len()
    }

    fn mean(&self) -> &[Point3<f64>] {
        &self.mean
    }

    fn parameter_count(&self) -> usize {
        self.basis.ncols()
    }

    fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    fn zero_parameters(&self) -> ShapeParameters {
        ShapeParameters::zeros_global(self.parameter_count())
    }

    fn generate(&self, params: &ShapeParameters) -> Result<Vec<Point3<f64>>> {
        self.generate_vector(params.as_global()?)
    }

    fn project(&self, shape: &[Point3<f64>]) -> Result<ShapeParameters> {
        Ok(ShapeParameters::Global(self.project_vector(shape)?))
    }
}
