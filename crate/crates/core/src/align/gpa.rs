use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::align::similarity::{align_corresponding, SimilarityTransform};
use crate::error::{Error, Result};
use crate::model::TrainingSet;

/// Output of [`gpa`]: shapes aligned to the converged mean, the mean itself
/// (centroid at origin, unit centroid RMS), the per-shape transforms, and
/// the number of iterations used.
#[derive(Debug, Clone)]
pub struct GpaResult {
    pub aligned: Vec<Vec<Point3<f64>>>,
    pub mean: Vec<Point3<f64>>,
    pub transforms: Vec<SimilarityTransform>,
    pub iterations: usize,
}

impl GpaResult {
    /// Package the aligned shapes for training.
    pub fn training_set(&self) -> TrainingSet {
        TrainingSet::new_aligned(self.aligned.clone())
    }
}

/// Generalized Procrustes analysis with similarity transforms.
///
/// Alternates aligning every shape to the current mean with recomputing the
/// mean, until the mean's average vertex displacement drops below `tol`
/// (or `max_iterations` is hit). The gauge is fixed after every mean
/// update: centroid at the origin, unit centroid RMS. An already-aligned
/// corpus converges in one iteration.
pub fn gpa(
    shapes: &[Vec<Point3<f64>>],
    max_iterations: usize,
    tol: f64,
) -> Result<GpaResult> {
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("gpa needs at least one shape".into()));
    }
    let n = shapes[0].len();
    if n < 3 {
        return Err(Error::Degenerate(format!(
            "shapes must have at least 3 vertices, got {n}"
        )));
    }
    for (i, s) in shapes.iter().enumerate() {
        if s.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "shape {i} has {} vertices, expected {n}",
                s.len()
            )));
        }
    }
    if max_iterations == 0 {
        return Err(Error::InvalidArgument("max_iterations must be positive".into()));
    }

    let mut mean = normalize_gauge(&average(shapes))?;
    let mut iterations = max_iterations;
    for it in 1..=max_iterations {
        let aligned: Vec<Vec<Point3<f64>>> = shapes
            .par_iter()
            .map(|s| {
                align_corresponding(s, &mean).map(|(t, _)| t.apply_all(s))
            })
            .collect::<Result<_>>()?;
        let new_mean = normalize_gauge(&average(&aligned))?;
        let displacement = mean
            .iter()
            .zip(&new_mean)
            .map(|(a, b)| (b - a).norm())
            .sum::<f64>()
            / n as f64;
        mean = new_mean;
        if displacement < tol {
            iterations = it;
            break;
        }
    }

    // One final pass so the returned shapes correspond to the returned mean.
    let transforms: Vec<SimilarityTransform> = shapes
        .par_iter()
        .map(|s| align_corresponding(s, &mean).map(|(t, _)| t))
        .collect::<Result<_>>()?;
    let aligned: Vec<Vec<Point3<f64>>> = shapes
        .iter()
        .zip(&transforms)
        .map(|(s, t)| t.apply_all(s))
        .collect();

    Ok(GpaResult {
        aligned,
        mean,
        transforms,
        iterations,
    })
}

fn average(shapes: &[Vec<Point3<f64>>]) -> Vec<Point3<f64>> {
    let n = shapes[0].len();
    let mut acc = vec![Vector3::zeros(); n];
    for s in shapes {
        for (a, p) in acc.iter_mut().zip(s) {
            *a += p.coords;
        }
    }
    let t = shapes.len() as f64;
    acc.into_iter().map(|v| Point3::from(v / t)).collect()
}

/// Centroid to the origin, then scale so the centroid RMS is exactly 1.
fn normalize_gauge(shape: &[Point3<f64>]) -> Result<Vec<Point3<f64>>> {
    let c = crate::geometry::centroid(shape);
    let rms = (shape.iter().map(|p| (p - c).norm_squared()).sum::<f64>() / shape.len() as f64)
        .sqrt();
    if rms < 1e-12 {
        return Err(Error::Degenerate("mean shape collapsed to a point".into()));
    }
    Ok(shape.iter().map(|p| Point3::from((p - c) / rms)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::similarity::SimilarityTransform;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn base_shape(n: usize, rng: &mut impl Rng) -> Vec<Point3<f64>> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-50.0..50.0),
                    rng.gen_range(-50.0..50.0),
                    rng.gen_range(-10.0..10.0),
                )
            })
            .collect()
    }

    fn random_similarity(rng: &mut impl Rng) -> SimilarityTransform {
        let axis = nalgebra::Unit::new_normalize(Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0f64),
        ));
        SimilarityTransform {
            scale: rng.gen_range(0.5..2.0),
            rotation: nalgebra::Rotation3::from_axis_angle(&axis, rng.gen_range(-2.0..2.0))
                .into_inner(),
            translation: Vector3::new(
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
                rng.gen_range(-20.0..20.0),
            ),
        }
    }

    #[test]
    fn gauge_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = base_shape(40, &mut rng);
        let shapes: Vec<_> = (0..6)
            .map(|_| random_similarity(&mut rng).apply_all(&base))
            .collect();
        let out = gpa(&shapes, 100, 1e-8).unwrap();
        let c = crate::geometry::centroid(&out.mean);
        assert!(c.coords.norm() < 1e-10);
        let rms = (out.mean.iter().map(|p| (p - c).norm_squared()).sum::<f64>()
            / out.mean.len() as f64)
            .sqrt();
        assert!((rms - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_corpus_collapses_to_one_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = base_shape(30, &mut rng);
        let shapes: Vec<_> = (0..8)
            .map(|_| random_similarity(&mut rng).apply_all(&base))
            .collect();
        let out = gpa(&shapes, 100, 1e-10).unwrap();
        for s in &out.aligned[1..] {
            let gap: f64 = s
                .iter()
                .zip(&out.aligned[0])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(gap < 1e-7, "aligned shapes differ by {gap}");
        }
    }

    #[test]
    fn aligned_corpus_converges_in_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let base = base_shape(25, &mut rng);
        let shapes: Vec<_> = (0..5)
            .map(|_| {
                base.iter()
                    .map(|p| {
                        Point3::new(
                            p.x + rng.gen_range(-0.5..0.5),
                            p.y + rng.gen_range(-0.5..0.5),
                            p.z + rng.gen_range(-0.5..0.5),
                        )
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let first = gpa(&shapes, 100, 1e-8).unwrap();
        let second = gpa(&first.aligned, 100, 1e-8).unwrap();
        assert_eq!(second.iterations, 1);
        let drift: f64 = second
            .mean
            .iter()
            .zip(&first.mean)
            .map(|(a, b)| (a - b).norm())
            .sum::<f64>()
            / first.mean.len() as f64;
        assert!(drift < 1e-10, "mean drifted by {drift}");
        for (a, b) in second.aligned.iter().zip(&first.aligned) {
            let gap: f64 = a
                .iter()
                .zip(b)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            assert!(gap < 1e-8);
        }
    }

    #[test]
    fn mismatched_vertex_counts_rejected() {
        let a = vec![Point3::origin(); 5];
        let b = vec![Point3::origin(); 6];
        assert!(gpa(&[a, b], 10, 1e-8).is_err());
    }
}
