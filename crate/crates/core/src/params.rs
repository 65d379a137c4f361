//! Engine parameters and the unit convention shared by every module.
//!
//! All quantities are in natural units with ħ = k_B = 1: frequencies and
//! energies share a unit, inverse temperatures are 1/energy and the squeezing
//! parameter is dimensionless. Stroke durations are expressed in periods of
//! the bare oscillator, `2π/ω`.

use std::f64::consts::PI;

use crate::bogoliubov;
use crate::error::{OttoError, Result};

/// Energy in units where ħ = 1.
pub type Energy = f64;
/// Angular frequency.
pub type Frequency = f64;
/// 1/(k_B T).
pub type InverseTemperature = f64;
/// Work done on the oscillator (positive when its energy increases).
pub type Work = f64;
/// Heat absorbed by the oscillator (positive when its energy increases).
pub type Heat = f64;

/// The physical knobs of one engine: bare frequency, squeezing strength and
/// the two reservoir inverse temperatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    pub omega: Frequency,
    pub r: f64,
    pub beta_h: InverseTemperature,
    pub beta_c: InverseTemperature,
}

impl EngineParams {
    /// Builds and validates a parameter set.
    pub fn new(omega: Frequency, r: f64, beta_h: f64, beta_c: f64) -> Result<Self> {
        validate(EngineParams {
            omega,
            r,
            beta_h,
            beta_c,
        })
    }

    /// Parameters of the figures: ω = 2π, β_h = 0.1, β_c = 1.
    pub fn reference(r: f64) -> Self {
        EngineParams {
            omega: 2.0 * PI,
            r,
            beta_h: 0.1,
            beta_c: 1.0,
        }
    }

    /// Same reservoirs and bare frequency, different squeezing.
    pub fn with_r(self, r: f64) -> Self {
        EngineParams { r, ..self }
    }

    /// Pump amplitude χ = (ω/2) tanh(2r).
    pub fn chi(&self) -> f64 {
        bogoliubov::chi_from_r(self.omega, self.r)
    }

    /// Normal-mode frequency of the pumped oscillator, Ω = ω / cosh(2r).
    pub fn squeezed_frequency(&self) -> Frequency {
        self.omega / (2.0 * self.r).cosh()
    }

    /// Oscillator period 2π/ω, the time unit of stroke durations.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Checks every invariant of [`EngineParams`] and hands the value back.
pub fn validate(params: EngineParams) -> Result<EngineParams> {
    let EngineParams {
        omega,
        r,
        beta_h,
        beta_c,
    } = params;
    check_finite("omega", omega)?;
    check_finite("r", r)?;
    check_finite("beta_h", beta_h)?;
    check_finite("beta_c", beta_c)?;
    if omega <= 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "omega",
            value: omega,
            reason: "must be positive",
        });
    }
    if r < 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "r",
            value: r,
            reason: "must be non-negative",
        });
    }
    if beta_h <= 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "beta_h",
            value: beta_h,
            reason: "must be positive",
        });
    }
    if beta_c <= 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "beta_c",
            value: beta_c,
            reason: "must be positive",
        });
    }
    if beta_h >= beta_c {
        return Err(OttoError::InvalidOrientation { beta_h, beta_c });
    }
    Ok(params)
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(OttoError::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
