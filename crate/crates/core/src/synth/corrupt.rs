use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// An occluded scan plus the metadata a caller needs to reason about it.
#[derive(Debug, Clone)]
pub struct Occlusion {
    pub cloud: PointCloud,
    /// How many input points the region swallowed.
    pub removed: usize,
    /// Index of the first inserted outlier point, when a blob was added;
    /// everything from here on is synthetic clutter, not surface.
    pub outliers_from: Option<usize>,
}

/// Delete every point strictly inside the sphere `(center, radius)`,
/// optionally dropping a Gaussian blob of `outliers` clutter points over
/// the hole (stand-in for the occluder itself). Errs when nothing of the
/// original scan survives.
pub fn occlude(
    cloud: &PointCloud,
    center: Point3<f64>,
    radius: f64,
    outliers: usize,
    seed: u64,
) -> Result<Occlusion> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "occlusion radius must be nonnegative, got {radius}"
        )));
    }
    let r2 = radius * radius;
    let mut points: Vec<Point3<f64>> = cloud
        .points
        .iter()
        .filter(|p| (*p - center).norm_squared() >= r2)
        .copied()
        .collect();
    let removed = cloud.points.len() - points.len();
    if points.is_empty() {
        return Err(Error::Degenerate(format!(
            "occlusion removed all {removed} points"
        )));
    }
    let mut outliers_from = None;
    if outliers > 0 {
        outliers_from = Some(points.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blob = Normal::new(0.0, (radius / 3.0).max(1.0)).expect("finite stddev");
        for _ in 0..outliers {
            points.push(
                center
                    + Vector3::new(
                        blob.sample(&mut rng),
                        blob.sample(&mut rng),
                        blob.sample(&mut rng),
                    ),
            );
        }
    }
    Ok(Occlusion {
        cloud: PointCloud::new(points)?,
        removed,
        outliers_from,
    })
}

/// Isotropic Gaussian measurement noise plus a fraction of points replaced
/// by uniform outliers inside the scan's bounding box inflated by 25% per
/// axis. `stddev_mm = 0` and `outlier_fraction = 0` return the input
/// unchanged, bit for bit.
pub fn add_noise(
    cloud: &PointCloud,
    stddev_mm: f64,
    outlier_fraction: f64,
    seed: u64,
) -> Result<PointCloud> {
    if !stddev_mm.is_finite() || stddev_mm < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise stddev must be nonnegative, got {stddev_mm}"
        )));
    }
    if !(0.0..=1.0).contains(&outlier_fraction) {
        return Err(Error::InvalidArgument(format!(
            "outlier fraction must lie in [0, 1], got {outlier_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = cloud.points.clone();

    if stddev_mm > 0.0 {
        let noise = Normal::new(0.0, stddev_mm).expect("finite stddev");
        for p in &mut points {
            *p += Vector3::new(
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            );
        }
    }

    let n_outliers = (outlier_fraction * points.len() as f64).round() as usize;
    if n_outliers > 0 {
        let (lo, hi) = cloud
            .bounding_box()
            .ok_or_else(|| Error::InvalidArgument("empty cloud".into()))?;
        let mut lo_pad = Point3::origin();
        let mut hi_pad = Point3::origin();
        for k in 0..3 {
            // 1 mm floor keeps degenerate axes sampleable.
            let pad = (0.25 * (hi[k] - lo[k])).max(1.0);
            lo_pad[k] = lo[k] - pad;
            hi_pad[k] = hi[k] + pad;
        }
        let chosen = rand::seq::index::sample(&mut rng, points.len(), n_outliers);
        for i in chosen {
            points[i] = Point3::new(
                rng.gen_range(lo_pad.x..hi_pad.x),
                rng.gen_range(lo_pad.y..hi_pad.y),
                rng.gen_range(lo_pad.z..hi_pad.z),
            );
        }
    }
    PointCloud::new(points)
}
