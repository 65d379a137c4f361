//! Convergence and invariants of the Gaussian finite-time cycle.

use otto_core::analytic::{self, AnalyticCycleInput};
use otto_core::dynamics::{run_finite_time_cycle, IntegratorConfig, StrokeDuration};
use otto_core::EngineParams;
use proptest::prelude::*;

fn eta(params: &EngineParams, tau: f64, config: &IntegratorConfig) -> f64 {
    run_finite_time_cycle(params, StrokeDuration::Periods(tau), config)
        .unwrap()
        .efficiency
        .or_nan()
}

#[test]
fn halving_the_step_moves_efficiency_below_1e8() {
    for (r, tau) in [(0.4, 0.37), (0.8, 1.3), (1.2, 4.0)] {
        let params = EngineParams::reference(r);
        let coarse = eta(&params, tau, &IntegratorConfig::magnus(2e-3));
        let fine = eta(&params, tau, &IntegratorConfig::magnus(1e-3));
        assert!((coarse - fine).abs() < 1e-8, "r = {r}, tau = {tau}: {coarse} vs {fine}");
    }
}

#[test]
fn magnus_and_adaptive_agree() {
    let params = EngineParams::reference(0.8);
    for tau in [0.05, 0.8, 3.0] {
        let m = run_finite_time_cycle(&params, StrokeDuration::Periods(tau), &IntegratorConfig::default()).unwrap();
        let a = run_finite_time_cycle(
            &params,
            StrokeDuration::Periods(tau),
            &IntegratorConfig::adaptive(1e-12),
        )
        .unwrap();
        assert!((m.w_net - a.w_net).abs() < 1e-8, "tau = {tau}");
        assert!((m.sigma_total() - a.sigma_total()).abs() < 1e-8, "tau = {tau}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cycle_invariants(
        omega in 1.0f64..10.0,
        r in 0.05f64..1.3,
        beta_h in 0.05f64..1.0,
        ratio in 1.5f64..20.0,
        tau in 0.02f64..3.0,
    ) {
        let params = EngineParams::new(omega, r, beta_h, beta_h * ratio).unwrap();
        let report = run_finite_time_cycle(&params, StrokeDuration::Periods(tau), &IntegratorConfig::default()).unwrap();
        let s = report.summary();
        let scale = s.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        prop_assert!(report.first_law_residual().abs() <= 1e-12 * scale);
        prop_assert!(s.q_star_compression >= 1.0 - 1e-9);
        prop_assert!((s.q_star_compression - s.q_star_expansion).abs() <= 1e-8 * s.q_star_compression);
        prop_assert!(s.sigma_compression >= -1e-12 && s.sigma_expansion >= -1e-12);

        // the simulated cycle is the closed form at the measured Q*
        let closed = analytic::stroke_energetics(&AnalyticCycleInput::new(params, s.q_star_compression).unwrap());
        prop_assert!((closed.w_net - report.w_net).abs() <= 1e-8 * scale);
        if let Some(eta) = report.efficiency.value() {
            prop_assert!(eta <= report.eta_carnot + 1e-12);
        }
    }
}
