use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One latent factor: a Gaussian bump on the base patch whose amplitude is
/// drawn per shape. Centers live in the patch's (u, v) unit square; radius
/// and amplitudes are in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatentFactor {
    /// Bump center in the unit parameter square (u across columns, v down
    /// rows).
    pub center: (f64, f64),
    /// Gaussian falloff radius, mm of surface distance.
    pub radius_mm: f64,
    /// Amplitude range (lo, hi); each shape draws uniformly from it.
    pub amplitude_mm: (f64, f64),
}

impl LatentFactor {
    fn validate(&self, index: usize) -> Result<()> {
        let (u, v) = self.center;
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "factor {index}: center ({u}, {v}) outside the unit square"
            )));
        }
        if !self.radius_mm.is_finite() || self.radius_mm <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "factor {index}: radius must be positive, got {}",
                self.radius_mm
            )));
        }
        let (lo, hi) = self.amplitude_mm;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "factor {index}: bad amplitude range ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// Recipe for a synthetic corpus: grid resolution (as a subdivision
/// hierarchy), latent bump factors, measurement noise, and the seed that
/// makes the whole corpus reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub base_rows: usize,
    pub base_cols: usize,
    pub levels: usize,
    pub factors: Vec<LatentFactor>,
    pub noise_stddev_mm: f64,
    pub seed: u64,
    /// Number of shapes.
    pub count: usize,
}

impl SynthSpec {
    /// Desk-scale default: 5 latent factors on a 17x25 grid, 20 shapes,
    /// noiseless.
    pub fn small() -> SynthSpec {
        SynthSpec {
            base_rows: 5,
            base_cols: 7,
            levels: 2,
            // Centers are mutually far against the radii (bump overlaps
            // < 1e-2) and amplitude variances descend by > 3x per factor,
            // so the corpus eigenvalues are well separated and each
            // principal component locks onto one factor.
            factors: vec![
                LatentFactor {
                    center: (0.2, 0.25),
                    radius_mm: 14.0,
                    amplitude_mm: (-12.0, 12.0),
                },
                LatentFactor {
                    center: (0.8, 0.25),
                    radius_mm: 13.0,
                    amplitude_mm: (-6.0, 6.0),
                },
                LatentFactor {
                    center: (0.5, 0.5),
                    radius_mm: 12.0,
                    amplitude_mm: (-2.0, 4.0),
                },
                LatentFactor {
                    center: (0.2, 0.8),
                    radius_mm: 13.0,
                    amplitude_mm: (-1.5, 1.5),
                },
                LatentFactor {
                    center: (0.8, 0.8),
                    radius_mm: 14.0,
                    amplitude_mm: (-0.75, 0.75),
                },
            ],
            noise_stddev_mm: 0.0,
            seed: 42,
            count: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        if !self.noise_stddev_mm.is_finite() || self.noise_stddev_mm < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise stddev must be nonnegative, got {}",
                self.noise_stddev_mm
            )));
        }
        for (i, f) in self.factors.iter().enumerate() {
            f.validate(i)?;
        }
        Ok(())
    }
}
