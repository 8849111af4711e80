use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};

/// Parameters of either model family.
///
/// `Global` holds the d PCA coefficients. `Local` holds one 3-vector per
/// wavelet coefficient, in the canonical coefficient order; its flat scalar
/// order is coefficient-major (k0.x, k0.y, k0.z, k1.x, ...).
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeParameters {
    Global(DVector<f64>),
    Local(Vec<Vector3<f64>>),
}

impl ShapeParameters {
    pub fn zeros_global(d: usize) -> Self {
        ShapeParameters::Global(DVector::zeros(d))
    }

    pub fn zeros_local(n: usize) -> Self {
        ShapeParameters::Local(vec![Vector3::zeros(); n])
    }

    pub fn as_global(&self) -> Result<&DVector<f64>> {
        match self {
            ShapeParameters::Global(v) => Ok(v),
            ShapeParameters::Local(_) => Err(Error::InvalidArgument(
                "expected global parameters, got local".into(),
            )),
        }
    }

    pub fn as_local(&self) -> Result<&[Vector3<f64>]> {
        match self {
            ShapeParameters::Local(v) => Ok(v),
            ShapeParameters::Global(_) => Err(Error::InvalidArgument(
                "expected local parameters, got global".into(),
            )),
        }
    }

    /// Scalar count (d or 3n).
    pub fn len(&self) -> usize {
        match self {
            ShapeParameters::Global(v) => v.len(),
            ShapeParameters::Local(v) => 3 * v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat scalar view in the canonical order.
    pub fn flat(&self) -> Vec<f64> {
        match self {
            ShapeParameters::Global(v) => v.iter().cloned().collect(),
            ShapeParameters::Local(v) => v.iter().flat_map(|r| [r.x, r.y, r.z]).collect(),
        }
    }
}
