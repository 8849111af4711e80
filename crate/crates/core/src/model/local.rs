use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::params::ShapeParameters;
use crate::model::training::TrainingSet;
use crate::model::ShapeModel;
use crate::wavelet::{forward, inverse, SubdivisionHierarchy, WaveletCoefficients};

/// Local shape model: one independent 3x3 PCA per wavelet coefficient,
/// `s_k = mean_k + U_k r_k`, all in the canonical coefficient order.
///
/// Every `U_k` is a full orthonormal 3x3 basis (zero-variance directions
/// keep their eigenvectors with sigma 0), so composed with the invertible
/// wavelet synthesis the model spans the whole 3n-dimensional shape space:
/// projection followed by generation is exact for *any* grid, not just
/// training members.
#[derive(Debug, Clone)]
pub struct LocalWaveletModel {
    hierarchy: SubdivisionHierarchy,
    /// Per-coefficient mean, canonical order.
    means: Vec<Vector3<f64>>,
    /// Per-coefficient eigenvector columns, decreasing eigenvalue.
    bases: Vec<Matrix3<f64>>,
    /// Per-coefficient sqrt-eigenvalues, matching `bases` columns.
    coeff_sigmas: Vec<Vector3<f64>>,
    /// Mean shape in vertex space (inverse transform of `means`), cached.
    mean_shape: Vec<Point3<f64>>,
    /// `coeff_sigmas` flattened coefficient-major, cached for the trait.
    sigmas_flat: Vec<f64>,
}

/// Train the per-coefficient model. The training set must be aligned and its
/// vertex count must match the hierarchy's finest grid.
pub fn train_local(
    training: &TrainingSet,
    hierarchy: &SubdivisionHierarchy,
) -> Result<LocalWaveletModel> {
    if !training.is_aligned() {
        return Err(Error::InvalidArgument(
            "training set must be aligned before PCA".into(),
        ));
    }
    if training.len() < 2 {
        return Err(Error::InvalidArgument(
            "local model needs at least two training shapes".into(),
        ));
    }
    if training.vertex_count() != hierarchy.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices per shape, hierarchy expects {}",
            training.vertex_count(),
            hierarchy.vertex_count()
        )));
    }

    let coeffs: Vec<WaveletCoefficients> = training
        .shapes()
        .par_iter()
        .map(|s| forward(s, hierarchy))
        .collect::<Result<_>>()?;

    let t = training.len();
    let n = hierarchy.vertex_count();
    let per_coeff: Vec<(Vector3<f64>, Matrix3<f64>, Vector3<f64>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut mean = Vector3::zeros();
            for c in &coeffs {
                mean += c.as_slice()[k];
            }
            mean /= t as f64;

            let mut cov = Matrix3::zeros();
            for c in &coeffs {
                let d = c.as_slice()[k] - mean;
                cov += d * d.transpose();
            }
            cov /= t as f64;

            let eig = SymmetricEigen::new(cov);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&i, &j| {
                eig.eigenvalues[j]
                    .partial_cmp(&eig.eigenvalues[i])
                    .expect("eigenvalues are finite")
            });

            let mut basis = Matrix3::zeros();
            let mut sigma = Vector3::zeros();
            for (col, &i) in order.iter().enumerate() {
                let mut v = eig.eigenvectors.column(i).clone_owned();
                // Largest-magnitude entry positive, for reproducible signs.
                let mut pivot = 0.0f64;
                for &x in v.iter() {
                    if x.abs() > pivot.abs() {
                        pivot = x;
                    }
                }
                if pivot < 0.0 {
                    v = -v;
                }
                basis.set_column(col, &v);
                sigma[col] = eig.eigenvalues[i].max(0.0).sqrt();
            }
            (mean, basis, sigma)
        })
        .collect();

    let mut means = Vec::with_capacity(n);
    let mut bases = Vec::with_capacity(n);
    let mut coeff_sigmas = Vec::with_capacity(n);
    for (m, b, s) in per_coeff {
        means.push(m);
        bases.push(b);
        coeff_sigmas.push(s);
    }

    LocalWaveletModel::from_parts(*hierarchy, means, bases, coeff_sigmas)
}

impl LocalWaveletModel {
    pub(crate) fn from_parts(
        hierarchy: SubdivisionHierarchy,
        means: Vec<Vector3<f64>>,
        bases: Vec<Matrix3<f64>>,
        coeff_sigmas: Vec<Vector3<f64>>,
    ) -> Result<Self> {
        let n = hierarchy.vertex_count();
        if means.len() != n || bases.len() != n || coeff_sigmas.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "model arrays ({}, {}, {}) must all have {n} entries",
                means.len(),
                bases.len(),
                coeff_sigmas.len()
            )));
        }
        let mean_coeffs = WaveletCoefficients::from_data(hierarchy, means.clone())?;
        let mean_shape = inverse(&mean_coeffs, hierarchy.levels())?;
        let sigmas_flat = coeff_sigmas
            .iter()
            .flat_map(|s| [s.x, s.y, s.z])
            .collect();
        Ok(LocalWaveletModel {
            hierarchy,
            means,
            bases,
            coeff_sigmas,
            mean_shape,
            sigmas_flat,
        })
    }

    pub fn hierarchy(&self) -> &SubdivisionHierarchy {
        &self.hierarchy
    }

    pub fn coefficient_mean(&self, k: usize) -> Vector3<f64> {
        self.means[k]
    }

    pub fn coefficient_basis(&self, k: usize) -> &Matrix3<f64> {
        &self.bases[k]
    }

    pub fn coefficient_sigmas(&self, k: usize) -> Vector3<f64> {
        self.coeff_sigmas[k]
    }

    pub fn coefficient_means(&self) -> &[Vector3<f64>] {
        &self.means
    }

    pub fn coefficient_bases(&self) -> &[Matrix3<f64>] {
        &self.bases
    }

    pub fn coefficient_sigma_vectors(&self) -> &[Vector3<f64>] {
        &self.coeff_sigmas
    }

    /// Wavelet coefficients for a parameter vector: `mean_k + U_k r_k`.
    pub fn synthesize_coefficients(&self, params: &[Vector3<f64>]) -> Result<WaveletCoefficients> {
        if params.len() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter triples for {} coefficients",
                params.len(),
                self.means.len()
            )));
        }
        let data = self
            .means
            .iter()
            .zip(&self.bases)
            .zip(params)
            .map(|((m, u), r)| m + u * r)
            .collect();
        WaveletCoefficients::from_data(self.hierarchy, data)
    }
}

impl ShapeModel for LocalWaveletModel {
    fn vertex_count(&self) -> usize {
        self.hierarchy.vertex_count()
    }

    fn mean(&self) -> &[Point3<f64>] {
        &self.mean_shape
    }

    fn parameter_count(&self) -> usize {
        3 * self.means.len()
    }

    fn sigmas(&self) -> &[f64] {
        &self.sigmas_flat
    }

    fn zero_parameters(&self) -> ShapeParameters {
        ShapeParameters::zeros_local(self.means.len())
    }

    fn generate(&self, params: &ShapeParameters) -> Result<Vec<Point3<f64>>> {
        let coeffs = self.synthesize_coefficients(params.as_local()?)?;
        inverse(&coeffs, self.hierarchy.levels())
    }

    fn project(&self, shape: &[Point3<f64>]) -> Result<ShapeParameters> {
        let coeffs = forward(shape, &self.hierarchy)?;
        let params = coeffs
            .as_slice()
            .iter()
            .zip(&self.means)
            .zip(&self.bases)
            .map(|((s, m), u)| u.tr_mul(&(s - m)))
            .collect();
        Ok(ShapeParameters::Local(params))
    }
}
