use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};

/// Similarity transform `x -> scale * R * x + t` with a proper rotation
/// (`det R = +1`) and positive scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.scale * (self.rotation * p.coords) + self.translation)
    }

    pub fn apply_all(&self, points: &[Point3<f64>]) -> Vec<Point3<f64>> {
        points.iter().map(|p| self.apply(p)).collect()
    }

    /// `self.inverse().apply(self.apply(p)) == p` up to rounding.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        SimilarityTransform {
            scale: 1.0 / self.scale,
            rotation: rt,
            translation: -(rt * self.translation) / self.scale,
        }
    }

    /// Composition: `(a.compose(&b)).apply(p) == a.apply(&b.apply(p))`.
    pub fn compose(&self, other: &Self) -> Self {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.scale * (self.rotation * other.translation) + self.translation,
        }
    }
}

/// Least-squares similarity aligning `source` onto `target`
/// (`sum ||T(source_i) - target_i||^2` minimal). Returns the transform and
/// the RMS residual after alignment.
///
/// Needs at least three corresponded pairs that are neither coincident nor
/// collinear; degenerate input yields an error rather than NaNs. A
/// reflection-only relationship is not degenerate: the best proper rotation
/// is returned with a nonzero residual.
pub fn align_corresponding(
    source: &[Point3<f64>],
    target: &[Point3<f64>],
) -> Result<(SimilarityTransform, f64)> {
    if source.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source vs {} target points",
            source.len(),
            target.len()
        )));
    }
    let k = source.len();
    if k < 3 {
        return Err(Error::Degenerate(format!(
            "similarity alignment needs at least 3 points, got {k}"
        )));
    }
    let kf = k as f64;
    let src_mean = crate::geometry::centroid(source);
    let tgt_mean = crate::geometry::centroid(target);

    let mut var_src = 0.0;
    let mut cross = Matrix3::zeros();
    for (s, t) in source.iter().zip(target) {
        let sc = s - src_mean;
        let tc = t - tgt_mean;
        var_src += sc.norm_squared();
        cross += tc * sc.transpose();
    }
    var_src /= kf;
    cross /= kf;

    if var_src < 1e-24 {
        return Err(Error::Degenerate("source points are coincident".into()));
    }

    let svd = cross.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sv = svd.singular_values;
    if sv[0] <= 0.0 || sv[1] <= 1e-12 * sv[0] {
        return Err(Error::Degenerate(
            "points are collinear or coincident; rotation is not determined".into(),
        ));
    }

    let det_sign = (u * vt).determinant().signum();
    let d = Vector3::new(1.0, 1.0, det_sign);
    let rotation = u * Matrix3::from_diagonal(&d) * vt;
    let scale = (sv[0] + sv[1] + det_sign * sv[2]) / var_src;
    if scale <= 0.0 {
        return Err(Error::Degenerate(format!(
            "non-positive optimal scale {scale}"
        )));
    }
    let translation = tgt_mean.coords - scale * (rotation * src_mean.coords);
    let transform = SimilarityTransform {
        scale,
        rotation,
        translation,
    };

    let mut sq = 0.0;
    for (s, t) in source.iter().zip(target) {
        sq += (transform.apply(s) - t).norm_squared();
    }
    Ok((transform, (sq / kf).sqrt()))
}
