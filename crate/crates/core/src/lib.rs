//! Finite-time quantum Otto engine with a parametrically pumped oscillator
//! as working medium.
//!
//! The Gaussian backend ([`gaussian`], [`dynamics`]) propagates 2×2
//! covariance matrices exactly; [`fock`] is an independent truncated
//! Fock-space oracle used for cross-checks; [`analytic`] holds the closed
//! forms for the cycle energetics.

pub mod analytic;
pub mod bogoliubov;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod params;
pub mod verify;

pub use analytic::{AnalyticCycleInput, AnalyticCycleOutput, Efficiency};
pub use dynamics::{run_finite_time_cycle, CycleReport, IntegratorConfig, StrokeDuration};
pub use error::{OttoError, Result};
pub use params::EngineParams;
