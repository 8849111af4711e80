use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::LandmarkSet;
use crate::model::TrainingSet;
use crate::synth::spec::SynthSpec;
use crate::wavelet::{SubdivisionHierarchy, CORNER_LABELS};

/// Physical extent of the base patch, mm.
const PATCH_WIDTH_MM: f64 = 180.0;
const PATCH_HEIGHT_MM: f64 = 120.0;
/// Cylinder radius of the curved patch, mm.
const CYLINDER_RADIUS_MM: f64 = 150.0;

/// A generated corpus with its ground truth: per-shape latent amplitudes,
/// per-shape landmark sets, and cluster labels for stratified splits.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub shapes: Vec<Vec<Point3<f64>>>,
    /// Drawn amplitude of every factor, `count x factors`.
    pub latents: Vec<Vec<f64>>,
    pub landmarks: Vec<LandmarkSet>,
    /// Cluster label per shape (sign of the first latent factor).
    pub labels: Vec<String>,
    pub hierarchy: SubdivisionHierarchy,
}

impl Corpus {
    /// Labeled, unaligned training set; run Procrustes alignment before
    /// training.
    pub fn training_set(&self) -> TrainingSet {
        TrainingSet::new(self.shapes.clone())
            .expect("corpus shapes are non-empty and corresponded")
            .with_labels(self.labels.clone())
            .expect("one label per shape")
    }

    pub fn landmark_vertex_ids(&self) -> Vec<(String, usize)> {
        landmark_vertex_ids(&self.hierarchy)
    }
}

/// Labels of the landmarks used to initialize fits (Procrustes seed).
pub fn init_landmark_labels() -> [&'static str; 5] {
    [
        CORNER_LABELS[0],
        CORNER_LABELS[1],
        CORNER_LABELS[2],
        CORNER_LABELS[3],
        "center",
    ]
}

/// Labels of the landmarks held back for error evaluation.
pub fn eval_landmark_labels() -> [&'static str; 4] {
    ["edge_top", "edge_bottom", "edge_left", "edge_right"]
}

/// The nine landmark vertex ids on the finest grid: four corners and the
/// center (init set), four edge midpoints (eval set).
pub fn landmark_vertex_ids(hierarchy: &SubdivisionHierarchy) -> Vec<(String, usize)> {
    let (rows, cols) = hierarchy.finest_dims();
    let at = |r: usize, c: usize| r * cols + c;
    let (mr, mc) = (rows / 2, cols / 2);
    vec![
        (CORNER_LABELS[0].to_string(), at(0, 0)),
        (CORNER_LABELS[1].to_string(), at(0, cols - 1)),
        (CORNER_LABELS[2].to_string(), at(rows - 1, 0)),
        (CORNER_LABELS[3].to_string(), at(rows - 1, cols - 1)),
        ("center".to_string(), at(mr, mc)),
        ("edge_top".to_string(), at(0, mc)),
        ("edge_bottom".to_string(), at(rows - 1, mc)),
        ("edge_left".to_string(), at(mr, 0)),
        ("edge_right".to_string(), at(mr, cols - 1)),
    ]
}

/// (position, outward normal) of the cylindrical patch at parameter (u, v).
fn patch_point(u: f64, v: f64) -> (Point3<f64>, Vector3<f64>) {
    let theta = (u - 0.5) * (PATCH_WIDTH_MM / CYLINDER_RADIUS_MM);
    let position = Point3::new(
        CYLINDER_RADIUS_MM * theta.sin(),
        (v - 0.5) * PATCH_HEIGHT_MM,
        CYLINDER_RADIUS_MM * (theta.cos() - 1.0),
    );
    (position, Vector3::new(theta.sin(), 0.0, theta.cos()))
}

/// The undeformed curved patch sampled on the hierarchy's finest grid,
/// row-major.
pub fn base_patch(hierarchy: &SubdivisionHierarchy) -> Vec<Point3<f64>> {
    let (rows, cols) = hierarchy.finest_dims();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let u = c as f64 / (cols - 1) as f64;
            let v = r as f64 / (rows - 1) as f64;
            out.push(patch_point(u, v).0);
        }
    }
    out
}

/// Generate the corpus described by `spec`. Pure in `spec`: amplitudes and
/// noise come from per-shape counter-mode streams of one seeded generator,
/// so shapes can be built in parallel and still come out bit-identical run
/// to run.
pub fn generate_corpus(spec: &SynthSpec) -> Result<Corpus> {
    spec.validate()?;
    let hierarchy = SubdivisionHierarchy::new(spec.base_rows, spec.base_cols, spec.levels)?;
    let (rows, cols) = hierarchy.finest_dims();

    let shapes_with_latents: Vec<(Vec<Point3<f64>>, Vec<f64>)> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64 + 1);
            let latents: Vec<f64> = spec
                .factors
                .iter()
                .map(|f| {
                    let (lo, hi) = f.amplitude_mm;
                    if lo == hi {
                        lo
                    } else {
                        rng.gen_range(lo..hi)
                    }
                })
                .collect();
            let noise = Normal::new(0.0, spec.noise_stddev_mm).expect("validated stddev");

            let mut shape = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    let u = c as f64 / (cols - 1) as f64;
                    let v = r as f64 / (rows - 1) as f64;
                    let (mut p, normal) = patch_point(u, v);
                    for (f, &a) in spec.factors.iter().zip(&latents) {
                        let du = (u - f.center.0) * PATCH_WIDTH_MM;
                        let dv = (v - f.center.1) * PATCH_HEIGHT_MM;
                        let d2 = du * du + dv * dv;
                        let bump = (-d2 / (2.0 * f.radius_mm * f.radius_mm)).exp();
                        p += a * bump * normal;
                    }
                    if spec.noise_stddev_mm > 0.0 {
                        p += Vector3::new(
                            noise.sample(&mut rng),
                            noise.sample(&mut rng),
                            noise.sample(&mut rng),
                        );
                    }
                    shape.push(p);
                }
            }
            (shape, latents)
        })
        .collect();

    let (shapes, latents): (Vec<_>, Vec<_>) = shapes_with_latents.into_iter().unzip();
    let ids = landmark_vertex_ids(&hierarchy);
    let landmarks: Vec<LandmarkSet> = shapes
        .iter()
        .map(|shape: &Vec<Point3<f64>>| {
            let mut set = LandmarkSet::new();
            for (label, id) in &ids {
                set.insert(label, Some(shape[*id]))
                    .expect("fixed labels are valid");
            }
            set
        })
        .collect();
    let labels = latents
        .iter()
        .map(|l| cluster_label(l, &spec.factors))
        .collect();

    Ok(Corpus {
        shapes,
        latents,
        landmarks,
        labels,
        hierarchy,
    })
}

/// Two balanced clusters keyed on whether the first factor's amplitude
/// falls above its range midpoint; degenerate specs collapse to one label.
fn cluster_label(latents: &[f64], factors: &[crate::synth::LatentFactor]) -> String {
    match (latents.first(), factors.first()) {
        (Some(&a), Some(f)) => {
            let mid = 0.5 * (f.amplitude_mm.0 + f.amplitude_mm.1);
            if a >= mid { "high" } else { "low" }.to_string()
        }
        _ => "all".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{train_global, ShapeModel, ShapeParameters};
    use nalgebra::DMatrix;

    #[test]
    fn zero_amplitudes_and_noise_reproduce_the_base_patch() {
        let mut spec = SynthSpec::small();
        for f in &mut spec.factors {
            f.amplitude_mm = (0.0, 0.0);
        }
        spec.noise_stddev_mm = 0.0;
        let corpus = generate_corpus(&spec).unwrap();
        let base = base_patch(&corpus.hierarchy);
        for shape in &corpus.shapes {
            assert_eq!(shape.len(), base.len());
            for (p, q) in shape.iter().zip(&base) {
                assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn corpus_generation_is_bit_deterministic() {
        let mut spec = SynthSpec::small();
        spec.noise_stddev_mm = 0.4;
        let a = generate_corpus(&spec).unwrap();
        let b = generate_corpus(&spec).unwrap();
        for (sa, sb) in a.shapes.iter().zip(&b.shapes) {
            for (p, q) in sa.iter().zip(sb) {
                assert_eq!(p.x.to_bits(), q.x.to_bits());
                assert_eq!(p.y.to_bits(), q.y.to_bits());
                assert_eq!(p.z.to_bits(), q.z.to_bits());
            }
        }
        assert_eq!(a.latents, b.latents);

        spec.seed += 1;
        let c = generate_corpus(&spec).unwrap();
        assert_ne!(a.shapes[0], c.shapes[0]);
    }

    #[test]
    fn noiseless_corpus_has_rank_at_most_the_factor_count() {
        let spec = SynthSpec::small();
        let corpus = generate_corpus(&spec).unwrap();
        let t = corpus.shapes.len();
        let n3 = 3 * corpus.shapes[0].len();
        let mut mean = vec![0.0f64; n3];
        for shape in &corpus.shapes {
            for (i, p) in shape.iter().enumerate() {
                mean[3 * i] += p.x / t as f64;
                mean[3 * i + 1] += p.y / t as f64;
                mean[3 * i + 2] += p.z / t as f64;
            }
        }
        let centered = DMatrix::from_fn(n3, t, |r, c| {
            let p = corpus.shapes[c][r / 3];
            [p.x, p.y, p.z][r % 3] - mean[r]
        });
        let sv = centered.svd(false, false).singular_values;
        let k = spec.factors.len();
        assert!(sv.len() > k);
        for i in k..sv.len() {
            assert!(
                sv[i] < 1e-9 * sv[0],
                "singular value {i} = {} vs leading {}",
                sv[i],
                sv[0]
            );
        }
    }

    #[test]
    fn projected_parameters_identify_the_latents() {
        // Noiseless linear generative model: training recovers a basis for
        // the bump span, so some projected component must correlate almost
        // perfectly with each latent factor. Components are mutually
        // uncorrelated by construction, so a latent's correlation with its
        // component is capped at sqrt(1 - R^2), R being its empirical
        // multiple correlation with the other latents (~sqrt(4/T)); the
        // corpus is sized so that cap clears the threshold with margin.
        let spec = SynthSpec {
            count: 1000,
            ..SynthSpec::small()
        };
        let corpus = generate_corpus(&spec).unwrap();
        let mut data = corpus.training_set();
        data.mark_aligned(); // generated in a common frame
        let model = train_global(&data, None).unwrap();
        let t = corpus.shapes.len();
        let mut projected: Vec<Vec<f64>> = Vec::with_capacity(t);
        for shape in &corpus.shapes {
            match model.project(shape).unwrap() {
                ShapeParameters::Global(v) => projected.push(v.iter().copied().collect()),
                _ => unreachable!(),
            }
        }
        let d = model.parameter_count();
        for factor in 0..spec.factors.len() {
            let latent: Vec<f64> = corpus.latents.iter().map(|l| l[factor]).collect();
            let mut best = 0.0f64;
            let mut all = Vec::new();
            for comp in 0..d {
                let series: Vec<f64> = projected.iter().map(|p| p[comp]).collect();
                let c = correlation(&latent, &series).abs();
                all.push(format!("{c:.4}"));
                best = best.max(c);
            }
            assert!(best >= 0.99, "factor {factor}: best |corr| {best}; all {all:?}");
        }
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>();
        let va = a.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>();
        let vb = b.iter().map(|y| (y - mb) * (y - mb)).sum::<f64>();
        if va == 0.0 || vb == 0.0 {
            return 0.0;
        }
        cov / (va.sqrt() * vb.sqrt())
    }

    #[test]
    fn landmarks_sit_on_their_vertices_and_split_as_documented() {
        let corpus = generate_corpus(&SynthSpec::small()).unwrap();
        let ids = corpus.landmark_vertex_ids();
        assert_eq!(ids.len(), 9);
        for (shape, set) in corpus.shapes.iter().zip(&corpus.landmarks) {
            for (label, id) in &ids {
                assert_eq!(set.get(label), Some(shape[*id]));
            }
        }
        let init = init_landmark_labels();
        let eval = eval_landmark_labels();
        for l in init.iter().chain(eval.iter()) {
            assert!(ids.iter().any(|(label, _)| label == l), "missing {l}");
        }
        assert_eq!(init.len() + eval.len(), ids.len());
    }

    #[test]
    fn cluster_labels_key_on_the_first_factor() {
        let spec = SynthSpec::small();
        let corpus = generate_corpus(&spec).unwrap();
        let mid = 0.5 * (spec.factors[0].amplitude_mm.0 + spec.factors[0].amplitude_mm.1);
        for (latents, label) in corpus.latents.iter().zip(&corpus.labels) {
            let expect = if latents[0] >= mid { "high" } else { "low" };
            assert_eq!(label, expect);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SynthSpec::small();
        spec.count = 0;
        assert!(generate_corpus(&spec).is_err());

        let mut spec = SynthSpec::small();
        spec.factors[0].radius_mm = 0.0;
        assert!(generate_corpus(&spec).is_err());

        let mut spec = SynthSpec::small();
        spec.factors[0].center = (1.5, 0.5);
        assert!(generate_corpus(&spec).is_err());

        let mut spec = SynthSpec::small();
        spec.factors[0].amplitude_mm = (2.0, -2.0);
        assert!(generate_corpus(&spec).is_err());
    }
}
