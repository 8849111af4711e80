use nalgebra::Point3;

use crate::error::{Error, Result};

/// A corpus of corresponded shapes: equal vertex counts, optional class
/// labels (used for stratified cross-validation splits), and an alignment
/// flag that training checks so nobody accidentally trains on raw poses.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    shapes: Vec<Vec<Point3<f64>>>,
    labels: Option<Vec<String>>,
    aligned: bool,
}

impl TrainingSet {
    pub fn new(shapes: Vec<Vec<Point3<f64>>>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        let n = shapes[0].len();
        if n == 0 {
            return Err(Error::InvalidArgument("shapes have no vertices".into()));
        }
        for (i, s) in shapes.iter().enumerate() {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "shape {i} has {} vertices, expected {n}",
                    s.len()
                )));
            }
        }
        Ok(TrainingSet {
            shapes,
            labels: None,
            aligned: false,
        })
    }

    /// For shapes that are already in a common aligned frame (e.g. straight
    /// out of [`crate::align::gpa`]).
    pub fn new_aligned(shapes: Vec<Vec<Point3<f64>>>) -> Self {
        let mut set = TrainingSet::new(shapes).expect("aligned shapes must be non-empty");
        set.aligned = true;
        set
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.shapes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} shapes",
                labels.len(),
                self.shapes.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn mark_aligned(&mut self) {
        self.aligned = true;
    }

    pub fn is_aligned(&self) -> bool {
        self.aligned
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.shapes[0].len()
    }

    pub fn shapes(&self) -> &[Vec<Point3<f64>>] {
        &self.shapes
    }

    pub fn shape(&self, i: usize) -> &[Point3<f64>] {
        &self.shapes[i]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Subset by shape indices, keeping labels and the aligned flag.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let shapes = indices.iter().map(|&i| self.shapes[i].clone()).collect();
        let mut out = TrainingSet::new(shapes)?;
        out.aligned = self.aligned;
        if let Some(labels) = &self.labels {
            out.labels = Some(indices.iter().map(|&i| labels[i].clone()).collect());
        }
        Ok(out)
    }
}
