//! Robust fitting of shape models to unstructured point clouds.
//!
//! Both fitters minimize the truncated energy
//! `E(s) = sum_i min(||F_i(s) - nn(F_i(s))||^2, tau^2)` where `nn` is the
//! nearest cloud point of model vertex `i`, subject to the per-parameter
//! hyper-box `|s_j| <= c * sigma_j`:
//!
//! * [`fit_global`]: iterated-closest-point alternation. Each outer
//!   iteration freezes correspondences and the truncation mask with one
//!   nearest-neighbor pass (n queries) and minimizes the resulting convex
//!   quadratic with a projected quasi-Newton method. The frozen surrogate
//!   touches the true energy from above at the expansion point, so the
//!   recorded energy trace never increases, and the total query count stays
//!   within `max_iterations * n + n`.
//! * [`fit_local`]: a single coordinate-descent sweep over the wavelet
//!   coefficients, coarsest level first, evaluating every parameter on a
//!   uniform lattice of `samples_per_parameter` values across its box and
//!   committing only strict improvements. Candidate energies are computed
//!   incrementally over the coefficient's finite support, so sweep cost
//!   scales with the support size, not the grid.
//!
//! Models live in the normalized Procrustes frame; callers pass an initial
//! similarity transform (see [`initial_alignment`]) mapping that frame onto
//! the target scan. The cloud is pulled into the model frame once, `tau` is
//! divided by the initial scale, and reported energies are mapped back to
//! target-frame units.

mod config;
mod energy;
mod global;
mod init;
mod lbfgs;
mod local;

pub use config::{FitConfig, FitResult};
pub use energy::{energy, energy_gradient};
pub use global::fit_global;
pub use init::{centroid_scale_alignment, initial_alignment};
pub use local::fit_local;
