//! Curvature families `K_ε(D) = -(1 + ε g(D))` in terms of geodesic distance.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum CurvatureFamily {
    /// `K ≡ -1`.
    Constant,
    /// `K = -(1 + ε D)`.
    Linear,
    /// `K = -1` inside `D ≤ radius`, `-(1 + ε (scale (D - radius))²)` outside.
    Ring { radius: f64, scale: f64 },
}

impl CurvatureFamily {
    pub const RING_DEFAULT: CurvatureFamily = CurvatureFamily::Ring {
        radius: 0.5,
        scale: 20.0,
    };

    pub fn name(&self) -> &'static str {
        match self {
            CurvatureFamily::Constant => "constant",
            CurvatureFamily::Linear => "linear",
            CurvatureFamily::Ring { .. } => "ring",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CurvatureSpec {
    pub family: CurvatureFamily,
    pub epsilon: f64,
}

impl CurvatureSpec {
    pub fn new(family: CurvatureFamily, epsilon: f64) -> Result<Self> {
        let spec = CurvatureSpec { family, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant() -> Self {
        CurvatureSpec {
            family: CurvatureFamily::Constant,
            epsilon: 0.0,
        }
    }

    pub fn linear(epsilon: f64) -> Self {
        CurvatureSpec {
            family: CurvatureFamily::Linear,
            epsilon,
        }
    }

    pub fn ring(epsilon: f64) -> Self {
        CurvatureSpec {
            family: CurvatureFamily::RING_DEFAULT,
            epsilon,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        CurvatureSpec { epsilon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("curvature epsilon must be finite and ≥ 0"));
        }
        if let CurvatureFamily::Ring { radius, scale } = self.family {
            if !(radius >= 0.0 && radius.is_finite() && scale.is_finite()) {
                return Err(Error::invalid("ring radius must be ≥ 0 and scale finite"));
            }
        }
        Ok(())
    }

    /// Gaussian curvature at geodesic distance `d` (always negative).
    pub fn curvature(&self, d: f64) -> f64 {
        let g = match self.family {
            CurvatureFamily::Constant => 0.0,
            CurvatureFamily::Linear => d,
            CurvatureFamily::Ring { radius, scale } => {
                if d <= radius {
                    0.0
                } else {
                    let t = scale * (d - radius);
                    t * t
                }
            }
        };
        -(1.0 + self.epsilon * g)
    }

    /// Rescaled curvature `ρ = (-K)^{-1/2}` at distance `d`.
    pub fn rho(&self, d: f64) -> f64 {
        rho_from_curvature(self.curvature(d))
    }
}

/// `ρ = (-K)^{-1/2}`; exactly 1 for `K = -1`.
pub fn rho_from_curvature(k: f64) -> f64 {
    if k == -1.0 {
        1.0
    } else {
        1.0 / libm::sqrt(-k)
    }
}
