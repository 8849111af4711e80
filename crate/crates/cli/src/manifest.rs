//! Corpus directory layout.
//!
//! `synth` writes one binary PLY mesh and one landmark file per shape plus a
//! `manifest.json` tying them together and echoing the generating recipe;
//! `train` and `evaluate` consume the directory through this module.

use std::path::{Path, PathBuf};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use shapespace::geometry::io::load_mesh;
use shapespace::synth::SynthSpec;
use shapespace::{LandmarkSet, SubdivisionHierarchy};

use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Recipe the corpus was generated from; also carries the grid layout.
    pub spec: SynthSpec,
    pub shapes: Vec<ShapeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeEntry {
    /// Mesh file name, relative to the corpus directory.
    pub mesh: String,
    /// Landmark file name, relative to the corpus directory.
    pub landmarks: String,
    pub label: String,
    /// Latent amplitudes the shape was drawn with, one per factor.
    pub latents: Vec<f64>,
}

impl Manifest {
    pub fn load(dir: &Path) -> CliResult<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        crate::config::write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn hierarchy(&self) -> CliResult<SubdivisionHierarchy> {
        Ok(SubdivisionHierarchy::new(
            self.spec.base_rows,
            self.spec.base_cols,
            self.spec.levels,
        )?)
    }

    /// Load every shape's vertices and landmarks, verifying grid sizes.
    #[allow(clippy::type_complexity)]
    pub fn load_shapes(
        &self,
        dir: &Path,
    ) -> CliResult<(Vec<Vec<Point3<f64>>>, Vec<LandmarkSet>)> {
        let n = self.hierarchy()?.vertex_count();
        let mut shapes = Vec::with_capacity(self.shapes.len());
        let mut landmarks = Vec::with_capacity(self.shapes.len());
        for entry in &self.shapes {
            let mesh_path = resolve(dir, &entry.mesh);
            let mesh = load_mesh(&mesh_path)?;
            let vertices = mesh.vertices().to_vec();
            if vertices.len() != n {
                return Err(CliError::Runtime(format!(
                    "{}: {} vertices, manifest grid expects {n}",
                    mesh_path.display(),
                    vertices.len()
                )));
            }
            landmarks.push(LandmarkSet::load(resolve(dir, &entry.landmarks))?);
            shapes.push(vertices);
        }
        Ok((shapes, landmarks))
    }

    pub fn labels(&self) -> Vec<String> {
        self.shapes.iter().map(|s| s.label.clone()).collect()
    }
}

fn resolve(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
