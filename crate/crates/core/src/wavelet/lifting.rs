use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::QuadMesh;
use crate::wavelet::SubdivisionHierarchy;

/// Wavelet coefficients of one grid shape, in the canonical order (see the
/// module docs). One 3-vector per coefficient; the layout is dense and has
/// exactly `hierarchy.vertex_count()` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    hierarchy: SubdivisionHierarchy,
    data: Vec<Vector3<f64>>,
}

impl WaveletCoefficients {
    pub fn zeros(hierarchy: SubdivisionHierarchy) -> Self {
        WaveletCoefficients {
            hierarchy,
            data: vec![Vector3::zeros(); hierarchy.vertex_count()],
        }
    }

    pub fn from_data(hierarchy: SubdivisionHierarchy, data: Vec<Vector3<f64>>) -> Result<Self> {
        if data.len() != hierarchy.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a hierarchy with {} slots",
                data.len(),
                hierarchy.vertex_count()
            )));
        }
        Ok(WaveletCoefficients { hierarchy, data })
    }

    pub fn hierarchy(&self) -> &SubdivisionHierarchy {
        &self.hierarchy
    }

    pub fn as_slice(&self) -> &[Vector3<f64>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Vector3<f64>] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Value that can flow through the lifting passes. The transform is applied
/// per coordinate; implementing this for `f64` gives the scalar operator
/// used for dense matrix assembly.
pub(crate) trait LiftValue:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl LiftValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl LiftValue for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
}

/// Forward transform: grid vertices (row-major, finest level) to wavelet
/// coefficients. O(n).
pub fn forward(
    vertices: &[Point3<f64>],
    hierarchy: &SubdivisionHierarchy,
) -> Result<WaveletCoefficients> {
    if vertices.len() != hierarchy.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices for a {:?} hierarchy expecting {}",
            vertices.len(),
            hierarchy.base_dims(),
            hierarchy.vertex_count()
        )));
    }
    let mut buf: Vec<Vector3<f64>> = vertices.iter().map(|p| p.coords).collect();
    let mut out = WaveletCoefficients::zeros(*hierarchy);
    forward_buffer(&mut buf, hierarchy);
    gather(&buf, hierarchy, out.as_mut_slice());
    Ok(out)
}

/// [`forward`] on a grid-structured quad mesh.
pub fn forward_mesh(
    mesh: &QuadMesh,
    hierarchy: &SubdivisionHierarchy,
) -> Result<WaveletCoefficients> {
    forward(&mesh.vertices, hierarchy)
}

/// Inverse transform. Details on levels above `up_to_level` are treated as
/// zero; pass `hierarchy.levels()` for the full reconstruction. O(n).
pub fn inverse(
    coefficients: &WaveletCoefficients,
    up_to_level: usize,
) -> Result<Vec<Point3<f64>>> {
    let hierarchy = &coefficients.hierarchy;
    if up_to_level > hierarchy.levels() {
        return Err(Error::InvalidArgument(format!(
            "up_to_level {up_to_level} exceeds hierarchy levels {}",
            hierarchy.levels()
        )));
    }
    let mut buf = vec![Vector3::zeros(); hierarchy.vertex_count()];
    scatter(coefficients.as_slice(), hierarchy, up_to_level, &mut buf);
    inverse_buffer(&mut buf, hierarchy);
    Ok(buf.into_iter().map(Point3::from).collect())
}

/// [`inverse`] packaged as a grid quad mesh.
pub fn inverse_mesh(
    coefficients: &WaveletCoefficients,
    up_to_level: usize,
) -> Result<QuadMesh> {
    let (rows, cols) = coefficients.hierarchy.finest_dims();
    QuadMesh::from_grid(rows, cols, inverse(coefficients, up_to_level)?)
}

/// In-place forward lifting over the finest-grid buffer. After this, the
/// base grid (stride 2^J) holds scaling values and every odd position of
/// every level holds its detail.
pub(crate) fn forward_buffer<T: LiftValue>(buf: &mut [T], hierarchy: &SubdivisionHierarchy) {
    for level in (1..=hierarchy.levels()).rev() {
        predict_phase(buf, hierarchy, level, -1.0);
        update_phase(buf, hierarchy, level, 0.5);
    }
}

/// In-place inverse lifting; expects the layout [`forward_buffer`] leaves.
pub(crate) fn inverse_buffer<T: LiftValue>(buf: &mut [T], hierarchy: &SubdivisionHierarchy) {
    for level in 1..=hierarchy.levels() {
        update_phase(buf, hierarchy, level, -0.5);
        predict_phase(buf, hierarchy, level, 1.0);
    }
}

/// odd += sign * prediction(evens). sign -1 turns odds into details,
/// sign +1 reconstructs odds from details.
fn predict_phase<T: LiftValue>(
    buf: &mut [T],
    hierarchy: &SubdivisionHierarchy,
    level: usize,
    sign: f64,
) {
    let (rows, cols) = hierarchy.dims_at(level);
    let stride = 1usize << (hierarchy.levels() - level);
    let (_, fcols) = hierarchy.finest_dims();
    let at = |r: usize, c: usize| r * stride * fcols + c * stride;

    for r in 0..rows {
        for c in 0..cols {
            let (ro, co) = (r % 2 == 1, c % 2 == 1);
            if !ro && !co {
                continue;
            }
            let pred = if ro && co {
                (buf[at(r - 1, c - 1)]
                    + buf[at(r - 1, c + 1)]
                    + buf[at(r + 1, c - 1)]
                    + buf[at(r + 1, c + 1)])
                    * 0.25
            } else if ro {
                (buf[at(r - 1, c)] + buf[at(r + 1, c)]) * 0.5
            } else {
                (buf[at(r, c - 1)] + buf[at(r, c + 1)]) * 0.5
            };
            buf[at(r, c)] = buf[at(r, c)] + pred * sign;
        }
    }
}

/// even += weight * mean(incident odd slots). The incident set is the
/// 8-neighborhood in the level grid, clipped at the boundary; all eight
/// neighbors of an even position are odd.
fn update_phase<T: LiftValue>(
    buf: &mut [T],
    hierarchy: &SubdivisionHierarchy,
    level: usize,
    weight: f64,
) {
    let (rows, cols) = hierarchy.dims_at(level);
    let stride = 1usize << (hierarchy.levels() - level);
    let (_, fcols) = hierarchy.finest_dims();
    let at = |r: usize, c: usize| r * stride * fcols + c * stride;

    for r in (0..rows).step_by(2) {
        for c in (0..cols).step_by(2) {
            let mut sum = T::zero();
            let mut count = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                        continue;
                    }
                    sum = sum + buf[at(nr as usize, nc as usize)];
                    count += 1.0;
                }
            }
            buf[at(r, c)] = buf[at(r, c)] + sum * (weight / count);
        }
    }
}

/// Copy the in-place buffer layout into canonical coefficient order.
fn gather<T: LiftValue>(buf: &[T], hierarchy: &SubdivisionHierarchy, out: &mut [T]) {
    let (brows, bcols) = hierarchy.base_dims();
    for r in 0..brows {
        for c in 0..bcols {
            out[hierarchy.coefficient_index(0, r, c)] = buf[hierarchy.finest_index(0, r, c)];
        }
    }
    for level in 1..=hierarchy.levels() {
        let (rows, cols) = hierarchy.dims_at(level);
        for r in 0..rows {
            for c in 0..cols {
                if r % 2 == 1 || c % 2 == 1 {
                    out[hierarchy.coefficient_index(level, r, c)] =
                        buf[hierarchy.finest_index(level, r, c)];
                }
            }
        }
    }
}

/// Inverse of [`gather`]; levels above `up_to_level` stay zero.
fn scatter<T: LiftValue>(
    coeffs: &[T],
    hierarchy: &SubdivisionHierarchy,
    up_to_level: usize,
    buf: &mut [T],
) {
    let (brows, bcols) = hierarchy.base_dims();
    for r in 0..brows {
        for c in 0..bcols {
            buf[hierarchy.finest_index(0, r, c)] = coeffs[hierarchy.coefficient_index(0, r, c)];
        }
    }
    for level in 1..=up_to_level {
        let (rows, cols) = hierarchy.dims_at(level);
        for r in 0..rows {
            for c in 0..cols {
                if r % 2 == 1 || c % 2 == 1 {
                    buf[hierarchy.finest_index(level, r, c)] =
                        coeffs[hierarchy.coefficient_index(level, r, c)];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_grid(h: &SubdivisionHierarchy, rng: &mut impl Rng) -> Vec<Point3<f64>> {
        (0..h.vertex_count())
            .map(|_| {
                Point3::new(
                    rng.gen_range(-100.0..100.0),
                    rng.gen_range(-100.0..100.0),
                    rng.gen_range(-100.0..100.0),
                )
            })
            .collect()
    }

    fn rel_rms(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum();
        let den: f64 = b.iter().map(|p| p.coords.norm_squared()).sum();
        (num / den.max(1e-300)).sqrt()
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &(br, bc, j) in &[(2usize, 2usize, 1usize), (5, 7, 2), (3, 4, 3), (5, 7, 4)] {
            let h = SubdivisionHierarchy::new(br, bc, j).unwrap();
            let grid = random_grid(&h, &mut rng);
            let coeffs = forward(&grid, &h).unwrap();
            let back = inverse(&coeffs, h.levels()).unwrap();
            assert!(rel_rms(&back, &grid) < 1e-12, "{br}x{bc} J={j}");
        }
    }

    #[test]
    fn affine_grid_has_zero_details() {
        let h = SubdivisionHierarchy::new(5, 7, 3).unwrap();
        let (rows, cols) = h.finest_dims();
        let mut grid = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let (u, v) = (r as f64, c as f64);
                grid.push(Point3::new(
                    3.0 + 0.25 * u - 0.125 * v,
                    -2.0 + 0.5 * u + 0.75 * v,
                    10.0 - 0.0625 * u + 0.3 * v,
                ));
            }
        }
        let coeffs = forward(&grid, &h).unwrap();
        let scaling = h.coefficients_at(0);
        for (k, c) in coeffs.as_slice().iter().enumerate().skip(scaling) {
            assert!(c.norm() < 1e-12, "detail {k} is {}", c.norm());
        }
        // Update saw zero details, so scaling values are the base-grid samples.
        let (_, bcols) = h.base_dims();
        for k in 0..scaling {
            let (r, c) = (k / bcols, k % bcols);
            let orig = grid[h.finest_index(0, r, c)];
            assert!((coeffs.as_slice()[k] - orig.coords).norm() < 1e-12);
        }
    }

    #[test]
    fn prediction_only_upsampling_round_trips_to_zero_details() {
        // Build a finest grid by predict-refining a random coarse grid; its
        // finest-level details must vanish.
        let h = SubdivisionHierarchy::new(4, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let coarse = SubdivisionHierarchy::new(4, 4, 1).unwrap();
        let coarse_grid = random_grid(&coarse, &mut rng);

        let mut coeffs = WaveletCoefficients::zeros(h);
        // Encode the coarse grid exactly: forward-transform it on the
        // sub-hierarchy and copy levels 0..=1.
        let sub = forward(&coarse_grid, &coarse).unwrap();
        coeffs.as_mut_slice()[..sub.len()].copy_from_slice(sub.as_slice());

        let fine = inverse(&coeffs, 1).unwrap();
        let again = forward(&fine, &h).unwrap();
        for k in h.coefficient_offset(2)..h.vertex_count() {
            assert!(again.as_slice()[k].norm() < 1e-12);
        }
    }

    #[test]
    fn transform_is_linear() {
        let h = SubdivisionHierarchy::new(3, 3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_grid(&h, &mut rng);
        let b = random_grid(&h, &mut rng);
        let combo: Vec<Point3<f64>> = a
            .iter()
            .zip(&b)
            .map(|(p, q)| Point3::from(1.5 * p.coords - 0.25 * q.coords))
            .collect();
        let (ca, cb, cc) = (
            forward(&a, &h).unwrap(),
            forward(&b, &h).unwrap(),
            forward(&combo, &h).unwrap(),
        );
        for k in 0..h.vertex_count() {
            let want = 1.5 * ca.as_slice()[k] - 0.25 * cb.as_slice()[k];
            assert!((cc.as_slice()[k] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn partial_reconstruction_is_smooth_refinement_of_coarse() {
        // up_to_level = 0 must equal predict-only refinement of the scaling
        // grid (details zero everywhere).
        let h = SubdivisionHierarchy::new(3, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let grid = random_grid(&h, &mut rng);
        let coeffs = forward(&grid, &h).unwrap();
        let smooth = inverse(&coeffs, 0).unwrap();
        // The coarse grid embedded in the smooth reconstruction matches the
        // scaling coefficients exactly.
        let (brows, bcols) = h.base_dims();
        for r in 0..brows {
            for c in 0..bcols {
                let k = h.coefficient_index(0, r, c);
                let v = smooth[h.finest_index(0, r, c)];
                assert!((v.coords - coeffs.as_slice()[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_count_mismatch_rejected() {
        let h = SubdivisionHierarchy::new(3, 3, 1).unwrap();
        let grid = vec![Point3::origin(); 7];
        assert!(forward(&grid, &h).is_err());
        let coeffs = WaveletCoefficients::zeros(h);
        assert!(inverse(&coeffs, 2).is_err());
    }
}
