//! Diagonalization of the pumped oscillator
//! `H = ω(a†a + 1/2) + χ(a†² + a²)` into a free mode `Ω(b†b + 1/2)`
//! with `b = μa + νa†`.

use crate::error::{OttoError, Result};
use crate::params::Frequency;

/// Real Bogoliubov coefficients, `μ = cosh θ` and `ν = sinh θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovCoeffs {
    pub mu: f64,
    pub nu: f64,
}

impl BogoliubovCoeffs {
    /// Mixing angle θ.
    pub fn theta(&self) -> f64 {
        self.nu.asinh()
    }
}

/// Pump amplitude for squeezing parameter `r`: χ = (ω/2) tanh(2r).
pub fn chi_from_r(omega: Frequency, r: f64) -> f64 {
    0.5 * omega * (2.0 * r).tanh()
}

/// Inverse of [`chi_from_r`].
pub fn r_from_chi(omega: Frequency, chi: f64) -> Result<f64> {
    let ratio = pump_ratio(omega, chi)?;
    Ok(0.5 * ratio.atanh())
}

/// Normal-mode frequency Ω = ω √(1 − (2χ/ω)²).
pub fn effective_frequency(omega: Frequency, chi: f64) -> Result<Frequency> {
    let ratio = pump_ratio(omega, chi)?;
    // (1 - x)(1 + x) keeps precision when x is close to 1
    Ok(omega * ((1.0 - ratio) * (1.0 + ratio)).sqrt())
}

/// Coefficients of the unique θ ≥ 0 with tanh(2θ) = 2χ/ω.
pub fn coefficients(omega: Frequency, chi: f64) -> Result<BogoliubovCoeffs> {
    let ratio = pump_ratio(omega, chi)?;
    let theta = 0.5 * ratio.atanh();
    Ok(BogoliubovCoeffs {
        mu: theta.cosh(),
        nu: theta.sinh(),
    })
}

/// 2χ/ω, checked to lie in [0, 1).
fn pump_ratio(omega: Frequency, chi: f64) -> Result<f64> {
    if omega <= 0.0 || !omega.is_finite() {
        return Err(OttoError::InvalidParameter {
            name: "omega",
            value: omega,
            reason: "must be positive and finite",
        });
    }
    if chi.is_nan() || chi < 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "chi",
            value: chi,
            reason: "must be non-negative",
        });
    }
    let ratio = 2.0 * chi / omega;
    if ratio >= 1.0 {
        return Err(OttoError::UnstablePump { ratio });
    }
    Ok(ratio)
}
