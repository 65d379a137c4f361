//! Self-checks shared by the test suite and the `verify` command: the
//! randomized Carnot-bound sweep, first-law bookkeeping, integrity of the
//! Gaussian backend and agreement with the Fock-space oracle.

use std::fmt;

use nalgebra::{Matrix2, Rotation2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{self, AnalyticCycleInput, Efficiency};
use crate::dynamics::{self, run_finite_time_cycle, CycleSummary, IntegratorConfig, RampSchedule, StrokeDuration};
use crate::error::Result;
use crate::fock::{fock_cycle_sweep, FockConfig};
use crate::gaussian::{self, CovarianceState, QuadraticHamiltonian};
use crate::params::EngineParams;

pub const DEFAULT_SEED: u64 = 0x5eed_0770;

/// Agreement required between the Gaussian backend and the oracle.
pub const CROSS_BACKEND_TOL: f64 = 1e-6;

/// A deliberate corruption of the energetics, used to check that the
/// suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Reports `−W_comp` in place of `W_comp`.
    FlipCompressionWork,
}

impl Fault {
    fn compression_work(self, w: f64) -> f64 {
        match self {
            Fault::None => w,
            Fault::FlipCompressionWork => -w,
        }
    }
}

/// How much of the Fock oracle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleLevel {
    /// One squeezing value and a few durations.
    Light,
    /// `r ∈ {0.4, 0.8, 1.2}` on the ten-point duration grid.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub theorem_samples: usize,
    pub simulated_cycles: usize,
    pub integrity_samples: usize,
    pub oracle: OracleLevel,
    pub integrator: IntegratorConfig,
    pub fock: FockConfig,
    pub fault: Fault,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: DEFAULT_SEED,
            theorem_samples: 100_000,
            simulated_cycles: 200,
            integrity_samples: 1_000,
            oracle: OracleLevel::Light,
            integrator: IntegratorConfig::default(),
            fock: FockConfig::default(),
            fault: Fault::None,
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Samples `(ω, r, β_h < β_c, Q*)` uniformly from the verification box.
fn sample_cycle(rng: &mut ChaCha8Rng) -> AnalyticCycleInput {
    loop {
        let omega = rng.random_range(1.0..20.0);
        let r = rng.random_range(0.0..2.0);
        let a: f64 = rng.random_range(0.01..5.0);
        let b: f64 = rng.random_range(0.01..5.0);
        let q = rng.random_range(1.0..5.0);
        if a == b {
            continue;
        }
        if let Ok(params) = EngineParams::new(omega, r, a.min(b), a.max(b)) {
            if let Ok(input) = AnalyticCycleInput::new(params, q) {
                return input;
            }
        }
    }
}

/// Outcome of the randomized Carnot-bound sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremSweep {
    pub samples: usize,
    pub engines: usize,
    /// Engine points with `η > η_Carnot + 1e-12` or a failed intermediate inequality.
    pub violations: usize,
    /// Largest `η − η_Carnot` over engine points.
    pub max_excess: f64,
    /// Samples within 1e-10 of Carnot.
    pub near_equality: usize,
}

pub fn theorem_sweep(samples: usize, seed: u64) -> TheoremSweep {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TheoremSweep {
        samples,
        engines: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        near_equality: 0,
    };
    for _ in 0..samples {
        let input = sample_cycle(&mut rng);
        let witness = analytic::verify_carnot_bound(&input);
        if let Efficiency::Engine(eta) = witness.efficiency {
            out.engines += 1;
            out.max_excess = out.max_excess.max(eta - witness.eta_carnot);
            if eta > witness.eta_carnot - 1e-10 {
                out.near_equality += 1;
            }
        }
        if !witness.holds() {
            out.violations += 1;
        }
    }
    out
}

/// `η_Carnot − η` at `Q* = 1, r = r_max`, and the smallest gap found when
/// either coordinate is moved off that point by `offset`.
pub fn carnot_point_gaps(base: &EngineParams, offset: f64) -> (f64, f64) {
    let gap = |r: f64, q: f64| -> f64 {
        let p = base.with_r(r);
        match AnalyticCycleInput::new(p, q).map(|i| analytic::stroke_energetics(&i).efficiency) {
            Ok(Efficiency::Engine(eta)) => analytic::eta_carnot(&p) - eta,
            _ => f64::INFINITY,
        }
    };
    let r_max = analytic::r_max(base);
    let at = gap(r_max, 1.0);
    let off = [
        gap(r_max * (1.0 - offset), 1.0),
        gap(r_max * (1.0 + offset), 1.0),
        gap(r_max, 1.0 + offset),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    (at, off)
}

/// Largest `|W_exp + W_comp + Q_h + Q_c|` over random closed-form cycles.
pub fn first_law_analytic(samples: usize, seed: u64, fault: Fault) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let out = analytic::stroke_energetics(&sample_cycle(&mut rng));
            (out.w_exp + fault.compression_work(out.w_comp) + out.q_h + out.q_c).abs()
        })
        .fold(0.0, f64::max)
}

/// Simulated cycles: largest first-law residual and largest deviation
/// of `W_net`, `Q_h` from the closed form evaluated at the measured Q*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedCycles {
    pub cycles: usize,
    pub max_first_law: f64,
    pub max_closed_form_gap: f64,
    pub carnot_violations: usize,
}

pub fn simulated_cycles(cycles: usize, seed: u64, config: &IntegratorConfig, fault: Fault) -> Result<SimulatedCycles> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SimulatedCycles {
        cycles,
        max_first_law: 0.0,
        max_closed_form_gap: 0.0,
        carnot_violations: 0,
    };
    for _ in 0..cycles {
        let omega = rng.random_range(1.0..20.0);
        let r = rng.random_range(0.05..1.5);
        let beta_h = rng.random_range(0.05..1.0);
        let beta_c = beta_h + rng.random_range(0.1..4.0);
        let tau = rng.random_range(0.02..3.0);
        let params = EngineParams::new(omega, r, beta_h, beta_c)?;
        let report = run_finite_time_cycle(&params, StrokeDuration::Periods(tau), config)?;
        let w: Vec<f64> = report.strokes.iter().map(|s| s.work).collect();
        let heat: f64 = report.strokes.iter().map(|s| s.heat).sum();
        let residual = (fault.compression_work(w[0]) + w[2] + heat).abs();
        out.max_first_law = out.max_first_law.max(residual);

        let closed = analytic::stroke_energetics(&AnalyticCycleInput::new(
            params,
            report.summary().q_star_compression.max(1.0),
        )?);
        let scale = closed.q_h.abs().max(1.0);
        let gap = ((report.w_net - closed.w_net).abs() + (report.q_abs - closed.q_h).abs()) / scale;
        out.max_closed_form_gap = out.max_closed_form_gap.max(gap);
        if let Efficiency::Engine(eta) = report.efficiency {
            if eta > report.eta_carnot + 1e-10 {
                out.carnot_violations += 1;
            }
        }
    }
    Ok(out)
}

/// Determinant drift, Heisenberg bound and relative-entropy sign over
/// random Gaussian states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrity {
    pub samples: usize,
    /// Largest `|det σ' − det σ| / det σ` after propagation.
    pub max_det_drift: f64,
    pub min_symplectic_eigenvalue: f64,
    pub min_relative_entropy: f64,
}

fn random_state(rng: &mut ChaCha8Rng) -> Result<CovarianceState> {
    let nu = rng.random_range(0.5..10.0);
    let s: f64 = rng.random_range(-1.5..1.5);
    let rot = Rotation2::new(rng.random_range(0.0..std::f64::consts::PI));
    let diag = Matrix2::new((2.0 * s).exp(), 0.0, 0.0, (-2.0 * s).exp());
    let sigma = rot.matrix() * diag * rot.matrix().transpose() * nu;
    CovarianceState::new(0.5 * (sigma + sigma.transpose()))
}

pub fn integrity_suite(samples: usize, seed: u64, config: &IntegratorConfig) -> Result<Integrity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Integrity {
        samples,
        max_det_drift: 0.0,
        min_symplectic_eigenvalue: f64::INFINITY,
        min_relative_entropy: f64::INFINITY,
    };
    for _ in 0..samples {
        let state = random_state(&mut rng)?;
        let omega = rng.random_range(1.0..20.0);
        let r = rng.random_range(0.0..1.5);
        let beta = rng.random_range(0.05..5.0);
        let tau = rng.random_range(0.01..3.0);
        let ham = QuadraticHamiltonian::squeezed(omega, r)?;
        let schedule = if rng.random_bool(0.5) {
            RampSchedule::compression(ham.chi(), StrokeDuration::Periods(tau))
        } else {
            RampSchedule::expansion(ham.chi(), StrokeDuration::Periods(tau))
        };
        let evolved = dynamics::propagate(&state, &schedule, omega, config)?;
        let det = state.sigma().determinant();
        out.max_det_drift = out.max_det_drift.max((evolved.sigma().determinant() - det).abs() / det);
        out.min_symplectic_eigenvalue = out
            .min_symplectic_eigenvalue
            .min(state.symplectic_eigenvalue())
            .min(evolved.symplectic_eigenvalue());
        let d = gaussian::relative_entropy_to_thermal(&evolved, &ham, beta)?;
        out.min_relative_entropy = out.min_relative_entropy.min(d);
    }
    Ok(out)
}

/// The ten stroke durations (in periods) used against the oracle,
/// geometric between 0.02 and 10.
pub fn oracle_tau_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.02f64, 10.0f64, 10);
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Largest disagreement between the two backends, per quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrossBackend {
    pub points: usize,
    pub max_dim: usize,
    pub energy: f64,
    pub entropy: f64,
    pub sigma: f64,
    pub q_star: f64,
    pub efficiency: f64,
    /// Points where one backend reports an engine and the other does not.
    pub class_mismatches: usize,
}

impl CrossBackend {
    pub fn max_difference(&self) -> f64 {
        [self.energy, self.entropy, self.sigma, self.q_star, self.efficiency]
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn absorb(&mut self, gauss: &CycleSummary, fock: &CycleSummary) {
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        self.points += 1;
        self.energy = self.energy.max(diff(&gauss.energies, &fock.energies));
        self.entropy = self.entropy.max(diff(&gauss.entropies, &fock.entropies));
        self.sigma = self.sigma.max(diff(
            &[gauss.sigma_compression, gauss.sigma_expansion],
            &[fock.sigma_compression, fock.sigma_expansion],
        ));
        self.q_star = self.q_star.max(diff(
            &[gauss.q_star_compression, gauss.q_star_expansion],
            &[fock.q_star_compression, fock.q_star_expansion],
        ));
        match (gauss.efficiency, fock.efficiency) {
            (Efficiency::Engine(a), Efficiency::Engine(b)) => self.efficiency = self.efficiency.max((a - b).abs()),
            (Efficiency::NotAnEngine, Efficiency::NotAnEngine) => {}
            _ => self.class_mismatches += 1,
        }
    }
}

/// Runs both backends on every `(r, τ)` pair.
pub fn cross_backend(
    base: &EngineParams,
    rs: &[f64],
    taus: &[f64],
    integrator: &IntegratorConfig,
    fock: &FockConfig,
) -> Result<CrossBackend> {
    let mut out = CrossBackend::default();
    let durations: Vec<StrokeDuration> = taus.iter().map(|&t| StrokeDuration::Periods(t)).collect();
    for &r in rs {
        let params = base.with_r(r);
        let oracle = fock_cycle_sweep(&params, &durations, fock)?;
        for report in &oracle {
            let gauss = run_finite_time_cycle(&params, report.tau, integrator)?;
            out.max_dim = out.max_dim.max(report.dim);
            out.absorb(gauss.summary(), &report.summary);
        }
    }
    Ok(out)
}

/// Runs every check. Numerical failures abort with an error; violated
/// checks are reported in the returned list.
pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let reference = EngineParams::reference(0.4);

    let sweep = theorem_sweep(config.theorem_samples, config.seed);
    checks.push(Check {
        name: "carnot-bound",
        passed: sweep.violations == 0 && sweep.near_equality == 0,
        detail: format!(
            "{} samples, {} engines, {} violations, max eta - eta_C = {:e}, {} within 1e-10 of Carnot",
            sweep.samples, sweep.engines, sweep.violations, sweep.max_excess, sweep.near_equality
        ),
    });

    let (at, off) = carnot_point_gaps(&reference, 1e-3);
    checks.push(Check {
        name: "carnot-equality",
        passed: at.abs() <= 1e-10 && off > 1e-10,
        detail: format!("gap at Q*=1, r=r_max: {at:e}; nearest gap off that point: {off:e}"),
    });

    let analytic_residual = first_law_analytic(config.theorem_samples.min(10_000), config.seed ^ 1, config.fault);
    checks.push(Check {
        name: "first-law-analytic",
        passed: analytic_residual <= 1e-10,
        detail: format!("max residual {analytic_residual:e}"),
    });

    let sim = simulated_cycles(
        config.simulated_cycles,
        config.seed ^ 2,
        &config.integrator,
        config.fault,
    )?;
    checks.push(Check {
        name: "first-law-simulated",
        passed: sim.max_first_law <= 1e-8,
        detail: format!("{} cycles, max residual {:e}", sim.cycles, sim.max_first_law),
    });
    checks.push(Check {
        name: "simulation-vs-closed-form",
        passed: sim.max_closed_form_gap <= 1e-8 && sim.carnot_violations == 0,
        detail: format!(
            "max relative gap {:e}, {} cycles above Carnot",
            sim.max_closed_form_gap, sim.carnot_violations
        ),
    });

    let integrity = integrity_suite(config.integrity_samples, config.seed ^ 3, &config.integrator)?;
    checks.push(Check {
        name: "gaussian-integrity",
        passed: integrity.max_det_drift < 1e-8
            && integrity.min_symplectic_eigenvalue >= 0.5 - gaussian::HEISENBERG_TOL
            && integrity.min_relative_entropy >= -1e-12,
        detail: format!(
            "{} states, det drift {:e}, min nu {}, min D {:e}",
            integrity.samples,
            integrity.max_det_drift,
            integrity.min_symplectic_eigenvalue,
            integrity.min_relative_entropy
        ),
    });

    let (rs, taus) = match config.oracle {
        OracleLevel::Light => (vec![0.4], vec![0.05, 0.5, 2.0]),
        OracleLevel::Full => (vec![0.4, 0.8, 1.2], oracle_tau_grid()),
    };
    let cross = cross_backend(
        &EngineParams::reference(0.4),
        &rs,
        &taus,
        &config.integrator,
        &config.fock,
    )?;
    checks.push(Check {
        name: "cross-backend",
        passed: cross.max_difference() <= CROSS_BACKEND_TOL && cross.class_mismatches == 0,
        detail: format!(
            "{} points (cutoff up to {}), max |diff| energy {:e}, entropy {:e}, sigma {:e}, Q* {:e}, eta {:e}, {} class mismatches",
            cross.points, cross.max_dim, cross.energy, cross.entropy, cross.sigma, cross.q_star, cross.efficiency, cross.class_mismatches
        ),
    });

    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_deterministic() {
        assert_eq!(theorem_sweep(2_000, 7), theorem_sweep(2_000, 7));
        assert_ne!(theorem_sweep(2_000, 7).engines, 0);
    }

    #[test]
    fn carnot_is_reached_only_at_the_corner() {
        let (at, off) = carnot_point_gaps(&EngineParams::reference(0.4), 1e-3);
        assert!(at.abs() < 1e-12);
        assert!(off > 1e-6);
    }

    #[test]
    fn flipped_work_breaks_the_first_law() {
        assert!(first_law_analytic(500, 3, Fault::None) < 1e-10);
        assert!(first_law_analytic(500, 3, Fault::FlipCompressionWork) > 1e-3);
    }

    #[test]
    fn random_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert!(random_state(&mut rng).unwrap().symplectic_eigenvalue() >= 0.5 - 1e-12);
        }
    }

    #[test]
    fn tau_grid_spans_the_figure_range() {
        let g = oracle_tau_grid();
        assert_eq!(g.len(), 10);
        assert!((g[0] - 0.02).abs() < 1e-15 && (g[9] - 10.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn small_suite_passes() {
        let config = VerifyConfig {
            theorem_samples: 2_000,
            simulated_cycles: 10,
            integrity_samples: 50,
            ..Default::default()
        };
        let report = run_verify(&config).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c}");
        }
        let faulty = run_verify(&VerifyConfig {
            fault: Fault::FlipCompressionWork,
            ..config
        })
        .unwrap();
        assert!(!faulty.passed());
    }
}
