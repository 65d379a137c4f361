//! Closed-form energetics of the cycle for a given Husimi parameter Q*.
//!
//! Sign convention: work and heat are counted positive when they raise the
//! oscillator's energy, so an engine has `W_net < 0`, `Q_h > 0` and `Q_c < 0`,
//! and its efficiency is `η = −W_net / Q_h`.

use crate::error::{OttoError, Result};
use crate::gaussian::coth;
use crate::params::{EngineParams, Heat, Work};

/// Slack used when comparing an efficiency with the Carnot value and when
/// testing the right end of the quasi-static engine window.
pub const CARNOT_TOL: f64 = 1e-12;

/// Efficiency of a cycle, or the marker for cycles that do not run as an
/// engine (refrigerators, accelerators, idle cycles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    Engine(f64),
    NotAnEngine,
}

impl Efficiency {
    pub fn value(&self) -> Option<f64> {
        match self {
            Efficiency::Engine(eta) => Some(*eta),
            Efficiency::NotAnEngine => None,
        }
    }

    pub fn is_engine(&self) -> bool {
        matches!(self, Efficiency::Engine(_))
    }

    /// The efficiency, or NaN for non-engine cycles (used for tabular output).
    pub fn or_nan(&self) -> f64 {
        self.value().unwrap_or(f64::NAN)
    }
}

/// Applies the engine condition `W_net < 0, Q_h > 0, Q_c < 0` to measured
/// stroke energetics.
pub fn classify(w_net: Work, q_h: Heat, q_c: Heat) -> Efficiency {
    if w_net < 0.0 && q_h > 0.0 && q_c < 0.0 {
        Efficiency::Engine(-w_net / q_h)
    } else {
        Efficiency::NotAnEngine
    }
}

/// Engine parameters together with the Husimi parameter of both unitary
/// strokes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCycleInput {
    pub params: EngineParams,
    pub q_star: f64,
}

impl AnalyticCycleInput {
    pub fn new(params: EngineParams, q_star: f64) -> Result<Self> {
        if q_star < 1.0 || !q_star.is_finite() {
            return Err(OttoError::InvalidParameter {
                name: "q_star",
                value: q_star,
                reason: "Husimi parameter must be finite and at least 1",
            });
        }
        Ok(AnalyticCycleInput { params, q_star })
    }

    pub fn quasistatic(params: EngineParams) -> Self {
        AnalyticCycleInput { params, q_star: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCycleOutput {
    pub w_exp: Work,
    pub w_comp: Work,
    pub q_h: Heat,
    pub q_c: Heat,
    pub w_net: Work,
    pub efficiency: Efficiency,
    pub eta_carnot: f64,
}

struct ThermalFactors {
    /// Ω/ω
    ratio: f64,
    /// coth(β_h ω/2)
    hot: f64,
    /// coth(β_c Ω/2)
    cold: f64,
}

fn thermal_factors(params: &EngineParams) -> ThermalFactors {
    let big_omega = params.squeezed_frequency();
    ThermalFactors {
        ratio: big_omega / params.omega,
        hot: coth(0.5 * params.beta_h * params.omega),
        cold: coth(0.5 * params.beta_c * big_omega),
    }
}

/// The factor `F = (c_c − Q* c_h)/(Q* c_c − c_h)`; identically 1 at Q* = 1.
fn efficiency_factor(q_star: f64, f: &ThermalFactors) -> f64 {
    if q_star == 1.0 {
        1.0
    } else {
        (f.cold - q_star * f.hot) / (q_star * f.cold - f.hot)
    }
}

/// `1 − (Ω/ω) F`, the efficiency formula without the engine-condition check.
pub fn efficiency_formula(input: &AnalyticCycleInput) -> f64 {
    let f = thermal_factors(&input.params);
    1.0 - f.ratio * efficiency_factor(input.q_star, &f)
}

/// Works and heats of the four strokes.
pub fn stroke_energetics(input: &AnalyticCycleInput) -> AnalyticCycleOutput {
    let p = &input.params;
    let q = input.q_star;
    let omega = p.omega;
    let big_omega = p.squeezed_frequency();
    let f = thermal_factors(p);

    let w_exp = 0.5 * (q * omega - big_omega) * f.cold;
    let w_comp = -0.5 * (omega - q * big_omega) * f.hot;
    let q_h = 0.5 * omega * (f.hot - q * f.cold);
    let q_c = -0.5 * big_omega * (q * f.hot - f.cold);
    let w_net = w_exp + w_comp;

    let engine = if q == 1.0 {
        quasistatic_window(p)
    } else {
        classify(w_net, q_h, q_c).is_engine()
    };
    let efficiency = if engine {
        Efficiency::Engine(1.0 - f.ratio * efficiency_factor(q, &f))
    } else {
        Efficiency::NotAnEngine
    };

    AnalyticCycleOutput {
        w_exp,
        w_comp,
        q_h,
        q_c,
        w_net,
        efficiency,
        eta_carnot: eta_carnot(p),
    }
}

/// Quasi-static cycles run as an engine exactly for `0 < r ≤ r_max`. The
/// right end is the Carnot point, where every exchange vanishes and the
/// efficiency is taken by continuity.
fn quasistatic_window(p: &EngineParams) -> bool {
    p.r > 0.0 && p.r <= r_max(p) * (1.0 + CARNOT_TOL)
}

/// Quasi-static efficiency `1 − Ω/ω = 1 − sech(2r)` inside the engine window.
pub fn eta_quasistatic(params: &EngineParams) -> Efficiency {
    if quasistatic_window(params) {
        Efficiency::Engine(1.0 - params.squeezed_frequency() / params.omega)
    } else {
        Efficiency::NotAnEngine
    }
}

/// Largest squeezing for which the quasi-static cycle is still an engine,
/// `½ arccosh(β_c/β_h)`.
pub fn r_max(params: &EngineParams) -> f64 {
    0.5 * (params.beta_c / params.beta_h).acosh()
}

pub fn eta_carnot(params: &EngineParams) -> f64 {
    1.0 - params.beta_h / params.beta_c
}

/// `1 − √(β_h/β_c)`: efficiency at maximum work over r for quasi-static
/// strokes when both reservoirs are hot (`β ω ≪ 1`).
pub fn eta_curzon_ahlborn(params: &EngineParams) -> f64 {
    1.0 - (params.beta_h / params.beta_c).sqrt()
}

/// `1 − √(β_h Ω/2)`: efficiency at maximum work for quasi-static strokes
/// with a cold reservoir deep in the quantum regime (`β_c Ω/2 ≫ 1`) and a hot
/// one in the classical regime. Ω is taken at the supplied `r`; the regime is
/// not enforced.
pub fn eta_maxpower_low_t(params: &EngineParams) -> f64 {
    1.0 - (0.5 * params.beta_h * params.squeezed_frequency()).sqrt()
}

/// Husimi parameter of a sudden change of an oscillator's frequency,
/// `(ω² + Ω²)/(2ωΩ)`.
pub fn q_star_sudden(omega: f64, big_omega: f64) -> f64 {
    (omega * omega + big_omega * big_omega) / (2.0 * omega * big_omega)
}

/// Sudden-switch efficiency at maximum work, both reservoirs hot:
/// `(1 − √(β_h/β_c)) / (2 + √(β_h/β_c))`.
pub fn eta_sudden_high_t(params: &EngineParams) -> f64 {
    let s = (params.beta_h / params.beta_c).sqrt();
    (1.0 - s) / (2.0 + s)
}

/// Sudden-switch efficiency at maximum work in the low-temperature regime:
/// `(1 − √(β_h Ω/2)) / (2 + √(β_h Ω/2))`, with Ω at the supplied `r`.
pub fn eta_sudden_low_t(params: &EngineParams) -> f64 {
    let s = (0.5 * params.beta_h * params.squeezed_frequency()).sqrt();
    (1.0 - s) / (2.0 + s)
}

/// Outcome of checking the Carnot bound at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarnotWitness {
    pub efficiency: Efficiency,
    pub eta_carnot: f64,
    /// `η ≤ η_Carnot` (vacuously true for non-engines).
    pub bound_holds: bool,
    /// Engine condition implies `β_h/β_c ≤ Ω/ω`.
    pub gap_condition_holds: bool,
    /// `η ≤ 1 − (β_h/β_c) F ≤ η_Carnot`.
    pub sandwich_holds: bool,
}

impl CarnotWitness {
    pub fn holds(&self) -> bool {
        self.bound_holds && self.gap_condition_holds && self.sandwich_holds
    }
}

/// Evaluates the efficiency at `input` and checks it against Carnot together
/// with the intermediate inequalities of the bound.
pub fn verify_carnot_bound(input: &AnalyticCycleInput) -> CarnotWitness {
    let out = stroke_energetics(input);
    let eta_c = out.eta_carnot;
    match out.efficiency {
        Efficiency::NotAnEngine => CarnotWitness {
            efficiency: out.efficiency,
            eta_carnot: eta_c,
            bound_holds: true,
            gap_condition_holds: true,
            sandwich_holds: true,
        },
        Efficiency::Engine(eta) => {
            let p = &input.params;
            let f = thermal_factors(p);
            let ratio_beta = p.beta_h / p.beta_c;
            let factor = efficiency_factor(input.q_star, &f);
            let middle = 1.0 - ratio_beta * factor;
            CarnotWitness {
                efficiency: out.efficiency,
                eta_carnot: eta_c,
                bound_holds: eta <= eta_c + CARNOT_TOL,
                gap_condition_holds: ratio_beta <= f.ratio + CARNOT_TOL,
                sandwich_holds: eta <= middle + CARNOT_TOL && middle <= eta_c + CARNOT_TOL,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn reference(r: f64) -> EngineParams {
        EngineParams::reference(r)
    }

    #[test]
    fn quasistatic_reference_efficiency() {
        let out = stroke_energetics(&AnalyticCycleInput::quasistatic(reference(0.4)));
        let eta = out.efficiency.value().unwrap();
        assert!((eta - 0.252_300_081_762_580_4).abs() < 1e-12);
        assert!((out.w_net + out.q_h + out.q_c).abs() < 1e-10);
        assert!(out.w_net < 0.0 && out.q_h > 0.0 && out.q_c < 0.0);
        assert!((eta - -out.w_net / out.q_h).abs() < 1e-12);
    }

    #[test]
    fn no_squeezing_is_not_an_engine() {
        let out = stroke_energetics(&AnalyticCycleInput::quasistatic(reference(0.0)));
        assert_eq!(out.w_net, 0.0);
        assert_eq!(out.efficiency, Efficiency::NotAnEngine);
        assert_eq!(eta_quasistatic(&reference(0.0)), Efficiency::NotAnEngine);
    }

    #[test]
    fn quasistatic_examples() {
        let eta = eta_quasistatic(&reference(0.4)).value().unwrap();
        assert!((eta - 0.252_300_081_762_580_4).abs() < 1e-12);
        let p = reference(0.0);
        let at_max = eta_quasistatic(&p.with_r(r_max(&p))).value().unwrap();
        assert!((at_max - 0.9).abs() < 1e-12);
        assert_eq!(eta_quasistatic(&p.with_r(1.6)), Efficiency::NotAnEngine);
    }

    #[test]
    fn r_max_examples() {
        let rm = r_max(&reference(0.0));
        assert!((rm - 1.496_611_423_063_190_4).abs() < 1e-12, "{rm}");
        let near = EngineParams::new(1.0, 0.0, 1.0, 1.0 + 1e-10).unwrap();
        assert!(r_max(&near) < 1e-4);
    }

    #[test]
    fn carnot_and_curzon_ahlborn() {
        assert!((eta_carnot(&reference(0.4)) - 0.9).abs() < 1e-15);
        let half = EngineParams::new(2.0 * PI, 0.4, 0.5, 1.0).unwrap();
        assert_eq!(eta_carnot(&half), 0.5);
        assert!((eta_curzon_ahlborn(&reference(0.4)) - 0.683_772_233_983_162).abs() < 1e-12);
    }

    #[test]
    fn low_temperature_max_work_efficiency() {
        let p = EngineParams::new(2.0 * PI, 0.4, 0.02, 1.0).unwrap();
        let expected = 1.0 - (0.01 * 4.697_937_140_448_733f64).sqrt();
        assert!((eta_maxpower_low_t(&p) - expected).abs() < 1e-12);
        assert!((eta_maxpower_low_t(&p) - 0.783_252_747_6).abs() < 1e-6);
        let tiny = EngineParams::new(2.0 * PI, 0.4, 1e-300, 1.0).unwrap();
        assert!((eta_maxpower_low_t(&tiny) - 1.0).abs() < 1e-12);
        // squeezing beats an unsqueezed cycle whose lowest frequency exceeds Ω
        let unsqueezed = 1.0 - (0.5 * p.beta_h * p.omega).sqrt();
        assert!(eta_maxpower_low_t(&p) > unsqueezed);
    }

    #[test]
    fn sudden_q_star() {
        let big = reference(0.4).squeezed_frequency();
        assert_eq!(q_star_sudden(3.0, 3.0), 1.0);
        let s = 1.0 / 0.8f64.cosh();
        assert!((q_star_sudden(2.0 * PI, big) - (1.0 + s * s) / (2.0 * s)).abs() < 1e-14);
        assert!((q_star_sudden(2.0 * PI, big) - 1.042_567_432_271_132).abs() < 1e-13);
        assert_eq!(q_star_sudden(2.0, 5.0), q_star_sudden(5.0, 2.0));
    }

    #[test]
    fn sudden_efficiencies() {
        let p = reference(0.4);
        assert!((eta_sudden_high_t(&p) - 0.295_209_410_756_278_5).abs() < 1e-12);
        let hot = EngineParams::new(2.0 * PI, 0.4, 1e-300, 1.0).unwrap();
        assert!((eta_sudden_low_t(&hot) - 0.5).abs() < 1e-12);
        let same = EngineParams { beta_c: 0.1, ..p };
        assert_eq!(eta_sudden_high_t(&same), 0.0);
    }

    #[test]
    fn carnot_point_is_attained() {
        let p = reference(0.0);
        let p = p.with_r(r_max(&p));
        let w = verify_carnot_bound(&AnalyticCycleInput::quasistatic(p));
        assert!(w.holds());
        assert!((w.efficiency.value().unwrap() - 0.9).abs() < 1e-10);
    }

    #[test]
    fn rejects_sub_unit_q_star() {
        assert!(AnalyticCycleInput::new(reference(0.4), 0.99).is_err());
        assert!(AnalyticCycleInput::new(reference(0.4), f64::NAN).is_err());
    }

    fn params_strategy() -> impl Strategy<Value = (EngineParams, f64)> {
        (1.0f64..20.0, 0.0f64..2.0, 0.01f64..5.0, 0.01f64..5.0, 1.0f64..5.0)
            .prop_filter("distinct temperatures", |(_, _, a, b, _)| a != b)
            .prop_map(|(omega, r, a, b, q)| (EngineParams::new(omega, r, a.min(b), a.max(b)).unwrap(), q))
    }

    proptest! {
        #[test]
        fn first_law_holds((p, q) in params_strategy()) {
            let out = stroke_energetics(&AnalyticCycleInput::new(p, q).unwrap());
            let scale = out.w_exp.abs() + out.w_comp.abs() + out.q_h.abs() + out.q_c.abs();
            prop_assert!((out.w_exp + out.w_comp + out.q_h + out.q_c).abs() <= 1e-10 * scale.max(1.0));
        }

        #[test]
        fn engine_condition_signs((p, q) in params_strategy()) {
            let out = stroke_energetics(&AnalyticCycleInput::new(p, q).unwrap());
            if let Efficiency::Engine(eta) = out.efficiency {
                if q > 1.0 {
                    prop_assert!(out.w_net < 0.0 && out.q_h > 0.0 && out.q_c < 0.0);
                    prop_assert!((eta + out.w_net / out.q_h).abs() < 1e-9);
                }
                prop_assert!((-1e-12..1.0).contains(&eta));
            }
        }

        #[test]
        fn carnot_bound((p, q) in params_strategy()) {
            prop_assert!(verify_carnot_bound(&AnalyticCycleInput::new(p, q).unwrap()).holds());
        }

        #[test]
        fn efficiency_decreases_with_q_star((p, q) in params_strategy(), dq in 1e-6f64..1.0) {
            let a = stroke_energetics(&AnalyticCycleInput::new(p, q).unwrap()).efficiency;
            let b = stroke_energetics(&AnalyticCycleInput::new(p, q + dq).unwrap()).efficiency;
            if let (Some(ea), Some(eb)) = (a.value(), b.value()) {
                prop_assert!(eb <= ea + 1e-12);
            }
        }

        #[test]
        fn unit_q_star_is_quasistatic((p, _q) in params_strategy()) {
            let out = stroke_energetics(&AnalyticCycleInput::quasistatic(p));
            prop_assert_eq!(out.efficiency, eta_quasistatic(&p));
        }

        #[test]
        fn quasistatic_increasing_below_carnot(r in 0.001f64..1.49, dr in 1e-6f64..0.005) {
            let p = reference(r);
            let a = eta_quasistatic(&p).value().unwrap();
            let b = eta_quasistatic(&p.with_r(r + dr)).value().unwrap();
            prop_assert!(b > a);
            prop_assert!(b <= eta_carnot(&p) + CARNOT_TOL);
        }
    }
}
