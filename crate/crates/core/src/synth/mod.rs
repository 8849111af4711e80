//! Deterministic synthetic corpora: a curved base patch deformed by a small
//! set of Gaussian-bump latent factors, plus scan-corruption operators
//! (occlusion, noise, outliers) for stress-testing the fitters.
//!
//! Everything is a pure function of a [`SynthSpec`] — same spec, same bytes
//! — which anchors reproducibility for the whole pipeline. Shapes stay
//! grid-structured on the hierarchy's finest grid, so local-model training
//! needs no resampling, and corpora carry their latent amplitudes as ground
//! truth for identifiability checks.

mod corpus;
mod corrupt;
mod spec;

pub use corpus::{
    base_patch, eval_landmark_labels, generate_corpus, init_landmark_labels, landmark_vertex_ids,
    Corpus,
};
pub use corrupt::{add_noise, occlude, Occlusion};
pub use spec::{LatentFactor, SynthSpec};
