//! `roundtrip`: wavelet analysis/synthesis self-test on a grid mesh.
//!
//! Loads a grid mesh (or builds the stock cylinder patch), runs the forward
//! transform and the full inverse, and reports the maximum vertex error
//! relative to the bounding-box diagonal. Errors above 1e-10 are a runtime
//! failure (exit 2).

use std::path::PathBuf;

use clap::Args;
use nalgebra::Point3;
use shapespace::geometry::io::load_mesh;
use shapespace::synth::base_patch;
use shapespace::wavelet::{forward, inverse};
use shapespace::SubdivisionHierarchy;

use crate::{commands, CliError, CliResult};

const MAX_RELATIVE_ERROR: f64 = 1e-10;

#[derive(Args)]
pub struct RoundtripArgs {
    /// Grid mesh to transform (default: the built-in cylinder patch).
    #[arg(long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,

    /// Base grid rows.
    #[arg(long, value_name = "R", default_value_t = 5)]
    pub base_rows: usize,

    /// Base grid columns.
    #[arg(long, value_name = "C", default_value_t = 7)]
    pub base_cols: usize,

    /// Refinement levels J (inferred from the vertex count when omitted;
    /// default 6 for the built-in patch).
    #[arg(long, value_name = "J")]
    pub levels: Option<usize>,
}

pub fn run(args: RoundtripArgs) -> CliResult<()> {
    let (vertices, hierarchy) = match &args.mesh {
        Some(path) => {
            let mesh = commands::with_path(load_mesh(path), path)?;
            let vertices = mesh.vertices().to_vec();
            let hierarchy = match args.levels {
                Some(levels) => SubdivisionHierarchy::new(args.base_rows, args.base_cols, levels)?,
                None => infer_levels(args.base_rows, args.base_cols, vertices.len())?,
            };
            if hierarchy.vertex_count() != vertices.len() {
                return Err(CliError::Validation(format!(
                    "{}: {} vertices, but a {}x{} base at J={} has {}",
                    path.display(),
                    vertices.len(),
                    args.base_rows,
                    args.base_cols,
                    hierarchy.levels(),
                    hierarchy.vertex_count()
                )));
            }
            (vertices, hierarchy)
        }
        None => {
            let hierarchy =
                SubdivisionHierarchy::new(args.base_rows, args.base_cols, args.levels.unwrap_or(6))?;
            (base_patch(&hierarchy), hierarchy)
        }
    };

    let coefficients = forward(&vertices, &hierarchy)?;
    let reconstructed = inverse(&coefficients, hierarchy.levels())?;
    let max_error = vertices
        .iter()
        .zip(&reconstructed)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    let diagonal = bbox_diagonal(&vertices);
    let relative = if diagonal > 0.0 {
        max_error / diagonal
    } else {
        max_error
    };

    let (rows, cols) = hierarchy.finest_dims();
    println!(
        "roundtrip on {rows}x{cols} grid (J={}): max error {max_error:.3e} mm, {relative:.3e} of bbox diagonal",
        hierarchy.levels()
    );
    if relative < MAX_RELATIVE_ERROR {
        println!("ok (threshold {MAX_RELATIVE_ERROR:.0e})");
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "roundtrip error {relative:.3e} exceeds {MAX_RELATIVE_ERROR:.0e} of the bbox diagonal"
        )))
    }
}

/// Smallest J whose grid matches the vertex count.
fn infer_levels(base_rows: usize, base_cols: usize, count: usize) -> CliResult<SubdivisionHierarchy> {
    for levels in 0..=16 {
        if let Ok(h) = SubdivisionHierarchy::new(base_rows, base_cols, levels) {
            if h.vertex_count() == count {
                return Ok(h);
            }
            if h.vertex_count() > count {
                break;
            }
        }
    }
    Err(CliError::Validation(format!(
        "no refinement of a {base_rows}x{base_cols} base grid has {count} vertices; pass --levels"
    )))
}

fn bbox_diagonal(vertices: &[Point3<f64>]) -> f64 {
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (hi - lo).norm()
}
