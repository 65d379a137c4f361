//! Helpers shared by the integration tests.
#![allow(dead_code)]

use otto_core::analytic::{self, AnalyticCycleInput};
use otto_core::EngineParams;

/// Maximizes `f` on `[a, b]`: coarse grid, then golden-section search in
/// the bracket around the best grid point.
pub fn maximize(f: impl Fn(f64) -> f64, a: f64, b: f64, grid: usize) -> (f64, f64) {
    let xs: Vec<f64> = (0..=grid).map(|i| a + (b - a) * i as f64 / grid as f64).collect();
    let best = (0..xs.len()).max_by(|&i, &j| f(xs[i]).total_cmp(&f(xs[j]))).unwrap();
    let (mut lo, mut hi) = (xs[best.saturating_sub(1)], xs[(best + 1).min(grid)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 * (1.0 + lo.abs()) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Net work extracted, `−W_net`, and efficiency of the closed-form cycle.
pub fn extracted_work(params: &EngineParams, q_star: f64) -> (f64, Option<f64>) {
    let out = analytic::stroke_energetics(&AnalyticCycleInput::new(*params, q_star).unwrap());
    (-out.w_net, out.efficiency.value())
}

/// Engine parameters with the pumped frequency `big_omega` held fixed and
/// the bare frequency `omega ≥ big_omega` free.
pub fn with_fixed_big_omega(omega: f64, big_omega: f64, beta_h: f64, beta_c: f64) -> EngineParams {
    let r = 0.5 * (omega / big_omega).acosh();
    EngineParams::new(omega, r, beta_h, beta_c).unwrap()
}

/// Relative difference.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
