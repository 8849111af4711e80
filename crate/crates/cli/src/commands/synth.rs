//! `synth`: write a seeded synthetic corpus.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use shapespace::geometry::io::save_mesh;
use shapespace::synth::{generate_corpus, SynthSpec};
use shapespace::QuadMesh;

use crate::config::{self, FileConfig};
use crate::manifest::{Manifest, ShapeEntry};
use crate::{commands, CliResult};

#[derive(Args)]
pub struct SynthArgs {
    /// Output corpus directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Number of shapes.
    #[arg(long, value_name = "T")]
    pub count: Option<usize>,

    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Per-coordinate measurement noise, mm.
    #[arg(long, value_name = "MM")]
    pub noise_stddev_mm: Option<f64>,

    /// Base grid rows.
    #[arg(long, value_name = "R")]
    pub base_rows: Option<usize>,

    /// Base grid columns.
    #[arg(long, value_name = "C")]
    pub base_cols: Option<usize>,

    /// Refinement levels J.
    #[arg(long, value_name = "J")]
    pub levels: Option<usize>,
}

#[derive(Serialize)]
struct Resolved<'a> {
    command: &'static str,
    out: String,
    synth: &'a SynthSpec,
}

pub fn run(args: SynthArgs, file: &FileConfig) -> CliResult<()> {
    // Defaults: the stock five-factor recipe at the default grid (5x7 base,
    // J = 6), then the config file, then flags.
    let mut spec = SynthSpec {
        levels: 6,
        ..SynthSpec::small()
    };
    if let Some(section) = &file.synth {
        section.apply(&mut spec);
    }
    let flags = crate::config::SynthSection {
        base_rows: args.base_rows,
        base_cols: args.base_cols,
        levels: args.levels,
        count: args.count,
        seed: args.seed,
        noise_stddev_mm: args.noise_stddev_mm,
        factors: None,
    };
    flags.apply(&mut spec);

    let corpus = generate_corpus(&spec)?;
    let (rows, cols) = corpus.hierarchy.finest_dims();

    commands::ensure_out_dir(&args.out)?;
    let mut entries = Vec::with_capacity(corpus.shapes.len());
    for (i, shape) in corpus.shapes.iter().enumerate() {
        let mesh_name = format!("shape_{i:03}.ply");
        let lm_name = format!("landmarks_{i:03}.txt");
        let mesh = QuadMesh::from_grid(rows, cols, shape.clone())?;
        save_mesh(args.out.join(&mesh_name), &mesh)?;
        corpus.landmarks[i].save(args.out.join(&lm_name))?;
        entries.push(ShapeEntry {
            mesh: mesh_name,
            landmarks: lm_name,
            label: corpus.labels[i].clone(),
            latents: corpus.latents[i].clone(),
        });
    }
    let manifest = Manifest {
        spec: spec.clone(),
        shapes: entries,
    };
    manifest.save(&args.out)?;
    config::write_resolved(
        &args.out,
        &Resolved {
            command: "synth",
            out: commands::display_path(&args.out),
            synth: &spec,
        },
    )?;

    println!(
        "wrote {} shapes ({rows}x{cols} grid, {} vertices) to {}",
        corpus.shapes.len(),
        rows * cols,
        args.out.display()
    );
    println!("  factors: {}   noise: {} mm   seed: {}", spec.factors.len(), spec.noise_stddev_mm, spec.seed);
    Ok(())
}
