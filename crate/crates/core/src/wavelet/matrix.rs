use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::wavelet::lifting::{inverse_buffer, LiftValue};
use crate::wavelet::SubdivisionHierarchy;

/// Hard cap for the dense synthesis operator; beyond this the matrix-free
/// [`scalar_basis_column`] is the only sensible representation.
const DENSE_LIMIT: usize = 5000;

/// Sparse column of the inverse-transform operator for one coefficient:
/// `(finest vertex index, weight)` pairs, ascending by vertex index. The
/// same weights apply to x, y, and z.
pub fn scalar_basis_column(
    hierarchy: &SubdivisionHierarchy,
    coefficient: usize,
) -> Vec<(u32, f64)> {
    assert!(coefficient < hierarchy.vertex_count());
    let mut buf = vec![f64::zero(); hierarchy.vertex_count()];
    let (level, r, c) = hierarchy.coefficient_position(coefficient);
    buf[hierarchy.finest_index(level, r, c)] = 1.0;
    inverse_buffer(&mut buf, hierarchy);
    buf.iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(i, &w)| (i as u32, w))
        .collect()
}

/// Dense 3n x 3n synthesis matrix mapping the flattened coefficient vector
/// (x0, y0, z0, x1, ...) to the flattened vertex vector. Errors above
/// [`DENSE_LIMIT`] vertices.
pub fn dense_matrix(hierarchy: &SubdivisionHierarchy) -> Result<DMatrix<f64>> {
    let n = hierarchy.vertex_count();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "dense synthesis matrix requested for {n} vertices (limit {DENSE_LIMIT}); use scalar_basis_column"
        )));
    }
    let mut m = DMatrix::zeros(3 * n, 3 * n);
    for k in 0..n {
        for (i, w) in scalar_basis_column(hierarchy, k) {
            let i = i as usize;
            for a in 0..3 {
                m[(3 * i + a, 3 * k + a)] = w;
            }
        }
    }
    Ok(m)
}
