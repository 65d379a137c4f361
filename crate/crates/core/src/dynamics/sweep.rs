//! Parallel parameter sweeps. Results keep the order of the inputs.

use rayon::prelude::*;

use super::{run_finite_time_cycle, IntegratorConfig, StrokeDuration};
use crate::analytic::{self, AnalyticCycleInput, Efficiency};
use crate::error::Result;
use crate::params::EngineParams;

/// One finite-time cycle of a τ sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPoint {
    pub tau_periods: f64,
    pub efficiency: Efficiency,
    pub sigma_total: f64,
    pub q_star_comp: f64,
    pub q_star_exp: f64,
    /// Quasi-static efficiency at the same `r`, `1 − Ω/ω`.
    pub eta_qs: f64,
}

/// A failed cycle does not abort the sweep.
pub type TauRow = Result<TauPoint>;

/// Runs one finite-time cycle per stroke duration (in periods).
pub fn sweep_tau(params: &EngineParams, taus: &[f64], config: &IntegratorConfig) -> Vec<TauRow> {
    taus.par_iter()
        .map(|&tau| {
            let report = run_finite_time_cycle(params, StrokeDuration::Periods(tau), config)?;
            let s = report.summary();
            Ok(TauPoint {
                tau_periods: tau,
                efficiency: report.efficiency,
                sigma_total: report.sigma_total(),
                q_star_comp: s.q_star_compression,
                q_star_exp: s.q_star_expansion,
                eta_qs: report.eta_qs,
            })
        })
        .collect()
}

/// Closed-form efficiency at one `(r, Q*)` grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaCell {
    pub r: f64,
    pub q_star: f64,
    pub efficiency: Efficiency,
}

/// Efficiency map over `r × Q*`, row-major in `r`.
pub fn sweep_eta_map(base: &EngineParams, rs: &[f64], q_stars: &[f64]) -> Result<Vec<EtaCell>> {
    let grid: Vec<(f64, f64)> = rs.iter().flat_map(|&r| q_stars.iter().map(move |&q| (r, q))).collect();
    grid.par_iter()
        .map(|&(r, q_star)| {
            let params = base.with_r(r);
            let out = analytic::stroke_energetics(&AnalyticCycleInput::new(params, q_star)?);
            Ok(EtaCell {
                r,
                q_star,
                efficiency: out.efficiency,
            })
        })
        .collect()
}

/// Indices of strict interior local maxima of `values`, skipping NaN.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    interior_extrema(values, |a, b| a > b)
}

/// Indices of strict interior local minima of `values`, skipping NaN.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    interior_extrema(values, |a, b| a < b)
}

fn interior_extrema(values: &[f64], beats: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
            !(l.is_nan() || c.is_nan() || r.is_nan()) && beats(c, l) && beats(c, r)
        })
        .collect()
}

/// Largest difference between neighbouring local extrema, a measure of the
/// oscillation amplitude of `values`.
pub fn oscillation_amplitude(values: &[f64]) -> f64 {
    let mut extrema: Vec<usize> = local_maxima(values);
    extrema.extend(local_minima(values));
    extrema.sort_unstable();
    extrema
        .windows(2)
        .map(|w| (values[w[0]] - values[w[1]]).abs())
        .fold(0.0, f64::max)
}

/// Local extrema of `a` that have no extremum of the opposite kind in `b`
/// within `window` grid steps.
pub fn unpaired_extrema(a: &[f64], b: &[f64], window: usize) -> Vec<usize> {
    let (b_max, b_min) = (local_maxima(b), local_minima(b));
    let near = |i: usize, set: &[usize]| set.iter().any(|&j| i.abs_diff(j) <= window);
    let mut unpaired: Vec<usize> = local_maxima(a).into_iter().filter(|&i| !near(i, &b_min)).collect();
    unpaired.extend(local_minima(a).into_iter().filter(|&i| !near(i, &b_max)));
    unpaired.sort_unstable();
    unpaired
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps)
            .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_of_a_sampled_sine() {
        let v: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(local_maxima(&v).len(), 3);
        assert_eq!(local_minima(&v).len(), 3);
        assert!((oscillation_amplitude(&v) - 2.0).abs() < 1e-2);
    }

    #[test]
    fn nan_breaks_extrema() {
        assert!(local_maxima(&[0.0, f64::NAN, 0.0]).is_empty());
        assert!(local_maxima(&[0.0, 1.0, f64::NAN]).is_empty());
        assert_eq!(local_maxima(&[0.0, 1.0, 0.0]), vec![1]);
    }

    #[test]
    fn mirrored_series_are_paired() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64 * 0.2).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!(unpaired_extrema(&a, &b, 0).is_empty());
        let shifted: Vec<f64> = (0..100).map(|i| -((i as f64 * 0.2 + 0.6).sin())).collect();
        assert!(!unpaired_extrema(&a, &shifted, 1).is_empty());
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(linear_grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linear_grid(2.0, 5.0, 1), vec![2.0]);
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn sweep_preserves_order() {
        let taus = [0.9, 0.1, 0.5, 2.0];
        let rows = sweep_tau(&EngineParams::reference(0.4), &taus, &IntegratorConfig::default());
        let got: Vec<f64> = rows.iter().map(|r| r.as_ref().unwrap().tau_periods).collect();
        assert_eq!(got, taus);
    }

    #[test]
    fn failed_points_are_reported_per_row() {
        let rows = sweep_tau(
            &EngineParams::reference(0.4),
            &[0.5, -1.0],
            &IntegratorConfig::default(),
        );
        assert!(rows[0].is_ok());
        assert!(rows[1].is_err());
    }

    #[test]
    fn eta_map_reproduces_quasistatic_column() {
        let base = EngineParams::reference(0.4);
        let cells = sweep_eta_map(&base, &[0.2, 0.4], &[1.0, 1.05]).unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[2].r, 0.4);
        assert_eq!(cells[2].efficiency, analytic::eta_quasistatic(&base));
        assert!(sweep_eta_map(&base, &[0.4], &[0.5]).is_err());
    }
}
