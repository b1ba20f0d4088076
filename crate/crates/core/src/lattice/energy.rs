use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Limit from the upper half-plane, `mu + i0`.
    Upper,
    /// Limit from the lower half-plane, `mu - i0`.
    Lower,
}

/// Spectral parameter `z = mu + i eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub mu: f64,
    pub eps: f64,
}

impl ComplexEnergy {
    pub fn new(mu: f64, eps: f64) -> Self {
        Self { mu, eps }
    }

    pub fn real(mu: f64) -> Self {
        Self { mu, eps: 0.0 }
    }

    /// Approach to `mu +- i0` at height `eps > 0`.
    pub fn approach(mu: f64, eps: f64, orientation: Orientation) -> Self {
        let e = eps.abs();
        match orientation {
            Orientation::Upper => Self { mu, eps: e },
            Orientation::Lower => Self { mu, eps: -e },
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.mu, self.eps)
    }

    pub fn conj(&self) -> Self {
        Self {
            mu: self.mu,
            eps: -self.eps,
        }
    }

    pub fn orientation(&self) -> Option<Orientation> {
        if self.eps > 0.0 {
            Some(Orientation::Upper)
        } else if self.eps < 0.0 {
            Some(Orientation::Lower)
        } else {
            None
        }
    }

    pub fn is_upper(&self) -> bool {
        self.eps >= 0.0
    }

    /// Distance from `z` to the spectrum `[0, 4d]` of the free operator.
    pub fn dist_to_spectrum(&self, d: usize) -> f64 {
        let top = 4.0 * d as f64;
        let dx = if self.mu < 0.0 {
            -self.mu
        } else if self.mu > top {
            self.mu - top
        } else {
            0.0
        };
        dx.hypot(self.eps)
    }

    /// Errors unless `z` is off the spectrum.
    pub fn check_resolvable(&self, d: usize) -> Result<()> {
        if !(self.mu.is_finite() && self.eps.is_finite()) {
            return Err(Error::InvalidInput("non-finite spectral parameter".into()));
        }
        if self.dist_to_spectrum(d) == 0.0 {
            return Err(Error::InvalidInput(format!(
                "z = {} + {}i lies on the spectrum [0, {}]",
                self.mu,
                self.eps,
                4 * d
            )));
        }
        Ok(())
    }
}
