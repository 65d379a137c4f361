//! Finite-time cycle: exact Gaussian propagation through the unitary
//! strokes and instantaneous thermalization in the other two.
//!
//! The pump is ramped linearly, `χ(t) = χ_f t/τ` during compression and
//! `χ(t) = χ_f (1 − t/τ)` during expansion. Durations are in oscillator
//! periods `2π/ω`.

mod integrator;
mod sweep;

use nalgebra::Matrix2;

pub use integrator::{IntegratorConfig, Method};
pub use sweep::{
    linear_grid, local_maxima, local_minima, oscillation_amplitude, sweep_eta_map, sweep_tau, unpaired_extrema,
    EtaCell, TauPoint, TauRow,
};

use crate::analytic::{self, Efficiency};
use crate::error::{OttoError, Result};
use crate::gaussian::{self, CovarianceState, QuadraticHamiltonian};
use crate::params::{EngineParams, Frequency, Heat, InverseTemperature, Work};

/// Duration of a unitary stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrokeDuration {
    /// The Hamiltonian switches while the state stays frozen.
    Sudden,
    /// Ramp lasting this many oscillator periods.
    Periods(f64),
}

impl StrokeDuration {
    pub fn periods(&self) -> f64 {
        match self {
            StrokeDuration::Sudden => 0.0,
            StrokeDuration::Periods(p) => *p,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            StrokeDuration::Sudden => Ok(()),
            StrokeDuration::Periods(p) if *p > 0.0 && p.is_finite() => Ok(()),
            StrokeDuration::Periods(p) => Err(OttoError::InvalidParameter {
                name: "tau",
                value: *p,
                reason: "stroke duration must be positive and finite",
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampDirection {
    /// Pump switched on, 0 → χ_f.
    Compression,
    /// Pump switched off, χ_f → 0.
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RampProfile {
    #[default]
    Linear,
}

/// Time dependence of the pump amplitude during one unitary stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    pub direction: RampDirection,
    pub chi_final: f64,
    pub duration: StrokeDuration,
    pub profile: RampProfile,
}

impl RampSchedule {
    pub fn compression(chi_final: f64, duration: StrokeDuration) -> Self {
        RampSchedule {
            direction: RampDirection::Compression,
            chi_final,
            duration,
            profile: RampProfile::Linear,
        }
    }

    pub fn expansion(chi_final: f64, duration: StrokeDuration) -> Self {
        RampSchedule {
            direction: RampDirection::Expansion,
            chi_final,
            duration,
            profile: RampProfile::Linear,
        }
    }

    /// Pump amplitude at the fraction `s ∈ [0, 1]` of the stroke.
    pub fn chi_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match (self.profile, self.direction) {
            (RampProfile::Linear, RampDirection::Compression) => self.chi_final * s,
            (RampProfile::Linear, RampDirection::Expansion) => self.chi_final * (1.0 - s),
        }
    }

    /// Hamiltonians before and after the stroke.
    pub fn endpoints(&self, omega: Frequency) -> Result<(QuadraticHamiltonian, QuadraticHamiltonian)> {
        Ok((
            QuadraticHamiltonian::new(omega, self.chi_at(0.0))?,
            QuadraticHamiltonian::new(omega, self.chi_at(1.0))?,
        ))
    }
}

/// Evolves a centred Gaussian state through one stroke. A sudden stroke
/// returns the input unchanged.
pub fn propagate(
    state: &CovarianceState,
    schedule: &RampSchedule,
    omega: Frequency,
    config: &IntegratorConfig,
) -> Result<CovarianceState> {
    state.ensure_centred()?;
    schedule.duration.validate()?;
    // the ramp is monotone, so checking the end points bounds χ(t)
    schedule.endpoints(omega)?;
    let period = 2.0 * std::f64::consts::PI / omega;
    let duration = schedule.duration.periods() * period;
    if duration == 0.0 || schedule.chi_final == 0.0 {
        return Ok(*state);
    }
    let generator = |t: f64| {
        let chi = schedule.chi_at(t / duration);
        // J G(t) with G = diag(ω + 2χ, ω − 2χ)
        Matrix2::new(0.0, omega - 2.0 * chi, -(omega + 2.0 * chi), 0.0)
    };
    let m = integrator::propagator(generator, duration, config.step * period, config)?;
    Ok(state.transformed(&m))
}

/// Husimi parameter of a stroke that started in a thermal state: the
/// ratio of the final energy to the energy an adiabatic stroke would reach,
/// `(Ω_f/2) coth(βΩ_i/2) = Ω_f ν_s`.
pub fn measure_q_star(initial_thermal: &CovarianceState, final_energy: f64, final_frequency: Frequency) -> f64 {
    final_energy / (final_frequency * initial_thermal.symplectic_eigenvalue())
}

/// Relative entropy of the post-stroke state to the Gibbs state it will
/// relax to.
pub fn stroke_entropy_production(
    state_after_unitary: &CovarianceState,
    target_beta: InverseTemperature,
    target_ham: &QuadraticHamiltonian,
) -> Result<f64> {
    gaussian::relative_entropy_to_thermal(state_after_unitary, target_ham, target_beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrokeKind {
    Compression,
    Cooling,
    Expansion,
    Heating,
}

/// Energy bookkeeping of one stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrokeRecord {
    pub kind: StrokeKind,
    pub work: Work,
    pub heat: Heat,
    /// Zero for the (instantaneous) thermalization strokes.
    pub duration: StrokeDuration,
    /// Unitary strokes only.
    pub q_star: Option<f64>,
    /// Unitary strokes only: relative entropy to the next reservoir's Gibbs state.
    pub entropy_production: Option<f64>,
}

/// Quantities that every backend reports for a cycle, used to compare the
/// Gaussian path with the Fock-space oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSummary {
    /// `E(ρ1)` under the free Hamiltonian, `E(ρ2)` and `E(ρ3)` under the
    /// pumped one, `E(ρ4)` under the free one.
    pub energies: [f64; 4],
    /// Von Neumann entropies of ρ1…ρ4.
    pub entropies: [f64; 4],
    pub sigma_compression: f64,
    pub sigma_expansion: f64,
    pub q_star_compression: f64,
    pub q_star_expansion: f64,
    pub efficiency: Efficiency,
}

impl CycleSummary {
    pub fn works(&self) -> (Work, Work) {
        let [e1, e2, e3, e4] = self.energies;
        (e2 - e1, e4 - e3)
    }

    pub fn heats(&self) -> (Heat, Heat) {
        let [e1, e2, e3, e4] = self.energies;
        (e3 - e2, e1 - e4)
    }
}

/// Result of one simulated cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub params: EngineParams,
    /// Compression, cooling, expansion, heating.
    pub strokes: [StrokeRecord; 4],
    /// States ρ1…ρ4 at the start of each stroke's successor.
    pub states: [CovarianceState; 4],
    pub w_net: Work,
    pub q_abs: Heat,
    pub efficiency: Efficiency,
    pub eta_carnot: f64,
    /// `1 − Ω/ω`, independent of the engine window.
    pub eta_qs: f64,
    summary: CycleSummary,
}

impl CycleReport {
    pub fn summary(&self) -> &CycleSummary {
        &self.summary
    }

    /// Sum of the entropy productions of both unitary strokes.
    pub fn sigma_total(&self) -> f64 {
        self.summary.sigma_compression + self.summary.sigma_expansion
    }

    pub fn first_law_residual(&self) -> f64 {
        self.strokes.iter().map(|s| s.work + s.heat).sum()
    }
}

/// Runs the four strokes: compression from the hot Gibbs state of the free
/// oscillator, replacement by the cold Gibbs state of the pumped one,
/// expansion, and replacement by the hot Gibbs state.
pub fn run_finite_time_cycle(
    params: &EngineParams,
    tau: StrokeDuration,
    config: &IntegratorConfig,
) -> Result<CycleReport> {
    crate::params::validate(*params)?;
    let omega = params.omega;
    let chi = params.chi();
    let free = QuadraticHamiltonian::free(omega)?;
    let pumped = QuadraticHamiltonian::new(omega, chi)?;
    let big_omega = pumped.normal_frequency();

    let rho1 = gaussian::thermal_state(&free, params.beta_h);
    let rho2 = propagate(&rho1, &RampSchedule::compression(chi, tau), omega, config)?;
    let rho3 = gaussian::thermal_state(&pumped, params.beta_c);
    let rho4 = propagate(&rho3, &RampSchedule::expansion(chi, tau), omega, config)?;

    let e1 = gaussian::mean_energy(&rho1, &free);
    let e2 = gaussian::mean_energy(&rho2, &pumped);
    let e3 = gaussian::mean_energy(&rho3, &pumped);
    let e4 = gaussian::mean_energy(&rho4, &free);

    let q_comp = measure_q_star(&rho1, e2, big_omega);
    let q_exp = measure_q_star(&rho3, e4, omega);
    let sigma_comp = stroke_entropy_production(&rho2, params.beta_c, &pumped)?;
    let sigma_exp = stroke_entropy_production(&rho4, params.beta_h, &free)?;

    let w_comp = e2 - e1;
    let q_c = e3 - e2;
    let w_exp = e4 - e3;
    let q_h = e1 - e4;
    let w_net = w_comp + w_exp;
    let efficiency = analytic::classify(w_net, q_h, q_c);

    let instant = StrokeDuration::Sudden;
    let strokes = [
        StrokeRecord {
            kind: StrokeKind::Compression,
            work: w_comp,
            heat: 0.0,
            duration: tau,
            q_star: Some(q_comp),
            entropy_production: Some(sigma_comp),
        },
        StrokeRecord {
            kind: StrokeKind::Cooling,
            work: 0.0,
            heat: q_c,
            duration: instant,
            q_star: None,
            entropy_production: None,
        },
        StrokeRecord {
            kind: StrokeKind::Expansion,
            work: w_exp,
            heat: 0.0,
            duration: tau,
            q_star: Some(q_exp),
            entropy_production: Some(sigma_exp),
        },
        StrokeRecord {
            kind: StrokeKind::Heating,
            work: 0.0,
            heat: q_h,
            duration: instant,
            q_star: None,
            entropy_production: None,
        },
    ];
    let states = [rho1, rho2, rho3, rho4];
    let mut entropies = [0.0; 4];
    for (s, state) in entropies.iter_mut().zip(states.iter()) {
        *s = gaussian::von_neumann_entropy(state)?;
    }

    Ok(CycleReport {
        params: *params,
        strokes,
        states,
        w_net,
        q_abs: q_h,
        efficiency,
        eta_carnot: analytic::eta_carnot(params),
        eta_qs: 1.0 - params.squeezed_frequency() / omega,
        summary: CycleSummary {
            energies: [e1, e2, e3, e4],
            entropies,
            sigma_compression: sigma_comp,
            sigma_expansion: sigma_exp,
            q_star_compression: q_comp,
            q_star_expansion: q_exp,
            efficiency,
        },
    })
}
