use nalgebra::Point3;

use crate::align::{align_corresponding, SimilarityTransform};
use crate::error::{Error, Result};
use crate::geometry::LandmarkSet;

/// Initial model-to-target similarity from labeled landmarks. Labels present
/// (with positions) in both sets are paired in the model set's order; at
/// least three are required for a well-posed solve.
pub fn initial_alignment(
    model_landmarks: &LandmarkSet,
    target_landmarks: &LandmarkSet,
) -> Result<SimilarityTransform> {
    let pairs = model_landmarks.paired_positions(target_landmarks);
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "initial alignment needs at least 3 shared landmarks, found {}",
            pairs.len()
        )));
    }
    let (src, dst): (Vec<Point3<f64>>, Vec<Point3<f64>>) = pairs.into_iter().unzip();
    Ok(align_corresponding(&src, &dst)?.0)
}

/// Landmark-free fallback: match centroids and centroid-RMS spreads with an
/// identity rotation. Good enough to start a fit when the scan is roughly
/// in the model's orientation.
pub fn centroid_scale_alignment(
    model_mean: &[Point3<f64>],
    cloud: &[Point3<f64>],
) -> Result<SimilarityTransform> {
    if model_mean.is_empty() || cloud.is_empty() {
        return Err(Error::InvalidArgument(
            "centroid alignment needs non-empty point sets".into(),
        ));
    }
    let spread = |pts: &[Point3<f64>]| {
        let c = crate::geometry::centroid(pts);
        let ms = pts.iter().map(|p| (p - c).norm_squared()).sum::<f64>() / pts.len() as f64;
        (c, ms.sqrt())
    };
    let (cm, rm) = spread(model_mean);
    let (cc, rc) = spread(cloud);
    if rm <= 1e-12 || rc <= 1e-12 {
        return Err(Error::Degenerate(
            "point set has no spread; cannot estimate a scale".into(),
        ));
    }
    let scale = rc / rm;
    Ok(SimilarityTransform {
        scale,
        rotation: nalgebra::Matrix3::identity(),
        translation: cc.coords - scale * cm.coords,
    })
}
