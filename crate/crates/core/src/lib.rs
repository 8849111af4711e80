//! Statistical shape spaces over quad-grid surfaces.
//!
//! Two linear shape models over a common vertex parameterization:
//!
//! * a *global* PCA model whose basis vectors are eigenvectors of the
//!   training covariance, and
//! * a *local* model built from a subdivision-wavelet decomposition with an
//!   independent 3x3 PCA per wavelet coefficient, giving spatially
//!   localized, full-rank bases.
//!
//! Around them: similarity alignment and generalized Procrustes analysis,
//! exact nearest-neighbor search, robust point-cloud fitting for both model
//! families, the compactness / generalization / specificity evaluation
//! triad, and a seeded synthetic-corpus generator used by the test suites.
//!
//! Coordinates are in millimeters unless a frame is explicitly normalized
//! (the Procrustes mean is scaled to unit centroid RMS; fitters map targets
//! into that frame and back, see [`fit`]).
//!
//! ```
//! use shapespace::synth::{generate_corpus, SynthSpec};
//! use shapespace::align::gpa;
//! use shapespace::model::train_global;
//!
//! let spec = SynthSpec { seed: 7, ..SynthSpec::small() };
//! let corpus = generate_corpus(&spec).unwrap();
//! let gpa = gpa(&corpus.shapes, 100, 1e-8).unwrap();
//! let model = train_global(&gpa.training_set(), Some(5)).unwrap();
//! use shapespace::model::ShapeModel;
//! assert_eq!(model.parameter_count(), 5);
//! ```

pub mod align;
pub mod error;
pub mod eval;
pub mod fit;
pub mod geometry;
pub mod model;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
pub use geometry::{
    LandmarkSet, LoadedMesh, NearestNeighborIndex, PointCloud, QuadMesh, TriangleMesh,
};
pub use model::{GlobalPcaModel, LocalWaveletModel, ShapeModel, ShapeParameters, TrainingSet};
pub use wavelet::{SubdivisionHierarchy, WaveletCoefficients};
