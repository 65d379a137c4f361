//! Single-mode Gaussian states in the quadrature representation.
//!
//! Quadratures are `x = (a + a†)/√2` and `p = (a − a†)/(i√2)`, so the
//! vacuum has covariance `I/2` and a centred state is fully described by
//! `σ_ij = ⟨R_i R_j + R_j R_i⟩/2`. A quadratic Hamiltonian
//! `H = ½ Rᵀ G R` with `G = diag(ω + 2χ, ω − 2χ)` is the pumped oscillator
//! `ω(a†a + ½) + χ(a†² + a²)`.

use nalgebra::{Matrix2, Vector2};

use crate::bogoliubov;
use crate::error::{OttoError, Result};
use crate::params::{Energy, Frequency, InverseTemperature, Work};

/// Tolerance on the Heisenberg bound `√det σ ≥ 1/2`.
pub const HEISENBERG_TOL: f64 = 1e-12;

/// `ω(a†a + ½) + χ(a†² + a²)` with `0 ≤ χ < ω/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    omega: Frequency,
    chi: f64,
}

impl QuadraticHamiltonian {
    pub fn new(omega: Frequency, chi: f64) -> Result<Self> {
        bogoliubov::effective_frequency(omega, chi)?;
        Ok(QuadraticHamiltonian { omega, chi })
    }

    /// The free oscillator, χ = 0.
    pub fn free(omega: Frequency) -> Result<Self> {
        Self::new(omega, 0.0)
    }

    /// Pumped oscillator at squeezing parameter `r`.
    pub fn squeezed(omega: Frequency, r: f64) -> Result<Self> {
        Self::new(omega, bogoliubov::chi_from_r(omega, r))
    }

    pub fn omega(&self) -> Frequency {
        self.omega
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Quadrature matrix `G`.
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.omega + 2.0 * self.chi, 0.0, 0.0, self.omega - 2.0 * self.chi)
    }

    /// Normal-mode frequency `√det G`.
    pub fn normal_frequency(&self) -> Frequency {
        bogoliubov::effective_frequency(self.omega, self.chi).expect("pump ratio validated at construction")
    }
}

/// Centred single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    sigma: Matrix2<f64>,
    mean: Vector2<f64>,
}

impl CovarianceState {
    /// Builds a centred state from a covariance matrix, checking symmetry
    /// and the Heisenberg bound.
    pub fn new(sigma: Matrix2<f64>) -> Result<Self> {
        let scale = sigma.abs().max().max(1.0);
        if (sigma[(0, 1)] - sigma[(1, 0)]).abs() > 1e-12 * scale || !sigma.iter().all(|v| v.is_finite()) {
            return Err(OttoError::UnphysicalState { nu: f64::NAN });
        }
        let sigma = 0.5 * (sigma + sigma.transpose());
        let state = CovarianceState {
            sigma,
            mean: Vector2::zeros(),
        };
        let nu = state.symplectic_eigenvalue();
        if nu.is_nan() || nu < 0.5 - HEISENBERG_TOL || sigma[(0, 0)] <= 0.0 {
            return Err(OttoError::UnphysicalState { nu });
        }
        Ok(state)
    }

    /// Attaches a mean vector. Every operation in this crate rejects
    /// displaced states, so this exists mostly for completeness.
    pub fn with_mean(mut self, mean: Vector2<f64>) -> Self {
        self.mean = mean;
        self
    }

    pub fn vacuum() -> Self {
        CovarianceState {
            sigma: Matrix2::identity() * 0.5,
            mean: Vector2::zeros(),
        }
    }

    pub fn sigma(&self) -> &Matrix2<f64> {
        &self.sigma
    }

    pub fn mean(&self) -> &Vector2<f64> {
        &self.mean
    }

    /// `ν_s = √det σ`.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.sigma.determinant().max(0.0).sqrt()
    }

    /// Thermal occupation of the normal mode, `ν_s − 1/2`.
    pub fn occupation(&self) -> f64 {
        self.symplectic_eigenvalue() - 0.5
    }

    pub(crate) fn ensure_centred(&self) -> Result<()> {
        if self.mean.iter().any(|m| *m != 0.0) {
            Err(OttoError::NonZeroMean(self.mean[0], self.mean[1]))
        } else {
            Ok(())
        }
    }

    /// Evolves the covariance with a symplectic matrix, `σ → M σ Mᵀ`.
    pub(crate) fn transformed(&self, m: &Matrix2<f64>) -> Self {
        let sigma = m * self.sigma * m.transpose();
        CovarianceState {
            sigma: 0.5 * (sigma + sigma.transpose()),
            mean: self.mean,
        }
    }

    pub(crate) fn from_sigma_unchecked(sigma: Matrix2<f64>) -> Self {
        CovarianceState {
            sigma,
            mean: Vector2::zeros(),
        }
    }
}

pub(crate) fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// Gibbs state `e^{−βH}/Z`.
///
/// `beta = f64::INFINITY` gives the ground state.
pub fn thermal_state(ham: &QuadraticHamiltonian, beta: InverseTemperature) -> CovarianceState {
    let nu = 0.5 * coth(0.5 * beta * ham.normal_frequency());
    let (w, chi) = (ham.omega, ham.chi);
    let stretch = ((w - 2.0 * chi) / (w + 2.0 * chi)).sqrt();
    CovarianceState::from_sigma_unchecked(Matrix2::new(nu * stretch, 0.0, 0.0, nu / stretch))
}

/// `⟨H⟩ = ½ tr(G σ)` for a centred state.
pub fn mean_energy(state: &CovarianceState, ham: &QuadraticHamiltonian) -> Energy {
    0.5 * (ham.matrix() * state.sigma).trace()
}

/// Closed form `(Ω/2) coth(βΩ/2)` of the thermal energy.
pub fn thermal_energy(frequency: Frequency, beta: InverseTemperature) -> Energy {
    0.5 * frequency * coth(0.5 * beta * frequency)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(state: &CovarianceState) -> Result<f64> {
    let nu = state.symplectic_eigenvalue();
    if nu < 0.5 - HEISENBERG_TOL {
        return Err(OttoError::UnphysicalState { nu });
    }
    let n = nu - 0.5;
    let upper = (n + 1.0) * (n + 1.0).ln();
    let lower = if n <= HEISENBERG_TOL { 0.0 } else { n * n.ln() };
    Ok(upper - lower)
}

/// `ln Z = −ln(2 sinh(βΩ/2))`.
pub fn log_partition(ham: &QuadraticHamiltonian, beta: InverseTemperature) -> f64 {
    -ln_two_sinh(0.5 * beta * ham.normal_frequency())
}

/// `ln(2 sinh x)` for `x > 0` without overflow.
fn ln_two_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x + (-(-2.0 * x).exp()).ln_1p()
    } else {
        (2.0 * x.sinh()).ln()
    }
}

/// Relative entropy `D(ρ ‖ e^{−βH}/Z) = −S(ρ) + β⟨H⟩_ρ + ln Z`.
pub fn relative_entropy_to_thermal(
    state: &CovarianceState,
    ham: &QuadraticHamiltonian,
    beta: InverseTemperature,
) -> Result<f64> {
    state.ensure_centred()?;
    let entropy = von_neumann_entropy(state)?;
    Ok(-entropy + beta * mean_energy(state, ham) + log_partition(ham, beta))
}

/// Work lost to irreversibility when a state with entropy production `d`
/// relaxes into a bath at inverse temperature `beta`.
pub fn friction_work(d: f64, beta: InverseTemperature) -> Work {
    d / beta
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI;

    fn free() -> QuadraticHamiltonian {
        QuadraticHamiltonian::free(OMEGA).unwrap()
    }

    #[test]
    fn hamiltonian_is_positive_definite_with_normal_frequency() {
        let h = QuadraticHamiltonian::squeezed(OMEGA, 0.4).unwrap();
        let g = h.matrix();
        assert!(g[(0, 0)] > 0.0 && g[(1, 1)] > 0.0);
        assert!((g.determinant().sqrt() - h.normal_frequency()).abs() < 1e-12);
        assert!(QuadraticHamiltonian::new(OMEGA, PI).is_err());
    }

    #[test]
    fn ground_state_is_vacuum() {
        let s = thermal_state(&free(), f64::INFINITY);
        assert_eq!(s, CovarianceState::vacuum());
        assert!((mean_energy(&s, &free()) - PI).abs() < 1e-15);
        assert_eq!(von_neumann_entropy(&s).unwrap(), 0.0);
    }

    #[test]
    fn thermal_energy_examples() {
        // π coth(π), π coth(0.1π)
        let e1 = mean_energy(&thermal_state(&free(), 1.0), &free());
        assert!((e1 - 3.153_348_094_937_162).abs() < 1e-12);
        let e2 = mean_energy(&thermal_state(&free(), 0.1), &free());
        assert!((e2 - 10.326_842_314_930_173).abs() < 1e-11);
    }

    #[test]
    fn squeezed_thermal_symplectic_eigenvalue() {
        let h = QuadraticHamiltonian::squeezed(OMEGA, 0.4).unwrap();
        let s = thermal_state(&h, 1.0);
        let expected = 0.5 * coth(0.5 * 4.697_937_140_448_733);
        assert!((s.symplectic_eigenvalue() - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_thermal_state() {
        let s = thermal_state(&free(), 1.0);
        let n = 1.0 / ((2.0 * PI).exp() - 1.0);
        let expected = (n + 1.0) * (n + 1.0).ln() - n * n.ln();
        let got = von_neumann_entropy(&s).unwrap();
        assert!((got - expected).abs() < 1e-13);
        assert!((got - 0.013_624_629_924_104_187).abs() < 1e-9, "{got}");
    }

    #[test]
    fn unphysical_state_rejected() {
        let sigma = Matrix2::new(0.3, 0.0, 0.0, 0.3);
        assert!(matches!(
            CovarianceState::new(sigma),
            Err(OttoError::UnphysicalState { .. })
        ));
        let bad = CovarianceState::from_sigma_unchecked(sigma);
        assert!(von_neumann_entropy(&bad).is_err());
    }

    #[test]
    fn displaced_state_rejected() {
        let s = CovarianceState::vacuum().with_mean(Vector2::new(1.0, 0.0));
        assert!(matches!(
            relative_entropy_to_thermal(&s, &free(), 1.0),
            Err(OttoError::NonZeroMean(..))
        ));
    }

    #[test]
    fn log_partition_examples() {
        let ln_z = log_partition(&free(), 1.0);
        assert!((ln_z + 3.139_723_465_013_058).abs() < 1e-12, "{ln_z}");
        // ground-state dominance and classical limit
        let big = log_partition(&free(), 1e3);
        assert!((big + 0.5 * 1e3 * OMEGA).abs() < 1e-9);
        let small = log_partition(&free(), 1e-6);
        assert!((small + (1e-6 * OMEGA).ln()).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_vanishes_at_fixed_point() {
        let h = QuadraticHamiltonian::squeezed(OMEGA, 0.8).unwrap();
        for beta in [0.1, 1.0, 7.0] {
            let d = relative_entropy_to_thermal(&thermal_state(&h, beta), &h, beta).unwrap();
            assert!(d.abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn friction_work_is_ratio() {
        assert_eq!(friction_work(0.0, 1.0), 0.0);
        assert_eq!(friction_work(0.5, 1.0), 0.5);
        assert_eq!(friction_work(0.5, 0.1), 5.0);
    }

    fn squeezed_thermal(nu: f64, s: f64, phi: f64) -> CovarianceState {
        let rot = Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
        let d = Matrix2::new(nu * (-2.0 * s).exp(), 0.0, 0.0, nu * (2.0 * s).exp());
        CovarianceState::new(rot * d * rot.transpose()).unwrap()
    }

    proptest! {
        #[test]
        fn thermal_energy_matches_closed_form(
            omega in 0.1f64..30.0, r in 0.0f64..2.0, beta in 0.01f64..20.0
        ) {
            let h = QuadraticHamiltonian::squeezed(omega, r).unwrap();
            let e = mean_energy(&thermal_state(&h, beta), &h);
            let closed = thermal_energy(h.normal_frequency(), beta);
            prop_assert!((e - closed).abs() <= 1e-10 * closed.max(1.0));
        }

        #[test]
        fn relative_entropy_is_nonnegative(
            nu in 0.5f64..20.0, s in -2.0f64..2.0, phi in 0.0f64..PI,
            r in 0.0f64..1.5, beta in 0.05f64..5.0,
        ) {
            let state = squeezed_thermal(nu, s, phi);
            let h = QuadraticHamiltonian::squeezed(OMEGA, r).unwrap();
            let d = relative_entropy_to_thermal(&state, &h, beta).unwrap();
            prop_assert!(d >= -1e-10, "{}", d);
        }

        #[test]
        fn heisenberg_bound_on_thermal_states(r in 0.0f64..3.0, beta in 0.01f64..1e3) {
            let h = QuadraticHamiltonian::squeezed(OMEGA, r).unwrap();
            let s = thermal_state(&h, beta);
            prop_assert!(s.symplectic_eigenvalue() >= 0.5 - HEISENBERG_TOL);
        }
    }
}
