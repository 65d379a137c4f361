//! Integrators for the linear flow `dM/dt = A(t) M` of a 2×2 symplectic
//! matrix, with `A(t) = J G(t)`.

use nalgebra::Matrix2;

use crate::error::{OttoError, Result};

/// How a stroke is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Fixed-step fourth-order Magnus expansion with exact exponentials.
    /// Each step is exactly symplectic, so `det σ` is conserved to rounding.
    Magnus4,
    /// Dormand–Prince 5(4) with the given mixed absolute/relative tolerance.
    Adaptive { tolerance: f64 },
}

/// Integrator settings. `step` is measured in oscillator periods; for the
/// adaptive method it only seeds the first step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 2e-3,
            method: Method::Magnus4,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn magnus(step: f64) -> Self {
        IntegratorConfig {
            step,
            ..Default::default()
        }
    }

    pub fn adaptive(tolerance: f64) -> Self {
        IntegratorConfig {
            step: 1e-3,
            method: Method::Adaptive { tolerance },
            max_steps: 50_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(OttoError::InvalidParameter {
                name: "step",
                value: self.step,
                reason: "must be positive and finite",
            });
        }
        if let Method::Adaptive { tolerance } = self.method {
            if tolerance.is_nan() || tolerance <= 0.0 {
                return Err(OttoError::InvalidParameter {
                    name: "tolerance",
                    value: tolerance,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

/// Propagator `M(T)` of `dM/dt = A(t) M` with `M(0) = I`. `step` is in the
/// same time unit as `duration`.
pub(crate) fn propagator<F>(generator: F, duration: f64, step: f64, config: &IntegratorConfig) -> Result<Matrix2<f64>>
where
    F: Fn(f64) -> Matrix2<f64>,
{
    config.validate()?;
    if duration == 0.0 {
        return Ok(Matrix2::identity());
    }
    match config.method {
        Method::Magnus4 => magnus4(&generator, duration, step, config.max_steps),
        Method::Adaptive { tolerance } => dormand_prince(&generator, duration, step, tolerance, config.max_steps),
    }
}

/// `exp(X)` for a traceless real 2×2 matrix, using `X² = −det(X) I`.
pub(crate) fn expm_traceless(x: &Matrix2<f64>) -> Matrix2<f64> {
    let d = x.determinant();
    let (c, s) = if d.abs() < 1e-8 {
        (1.0 - d / 2.0 + d * d / 24.0, 1.0 - d / 6.0 + d * d / 120.0)
    } else if d > 0.0 {
        let w = d.sqrt();
        (w.cos(), w.sin() / w)
    } else {
        let w = (-d).sqrt();
        (w.cosh(), w.sinh() / w)
    };
    Matrix2::identity() * c + x * s
}

fn magnus4<F>(generator: &F, duration: f64, step: f64, max_steps: usize) -> Result<Matrix2<f64>>
where
    F: Fn(f64) -> Matrix2<f64>,
{
    let n = (duration / step).ceil().max(1.0);
    if n > max_steps as f64 {
        return Err(OttoError::IntegrationFailure(format!(
            "{n} steps needed, limit is {max_steps}"
        )));
    }
    let n = n as usize;
    let h = duration / n as f64;
    let offset = 3f64.sqrt() / 6.0;
    let mut m = Matrix2::identity();
    for k in 0..n {
        let t0 = k as f64 * h;
        let a1 = generator(t0 + (0.5 - offset) * h);
        let a2 = generator(t0 + (0.5 + offset) * h);
        let omega = (a1 + a2) * (0.5 * h) + (a2 * a1 - a1 * a2) * (3f64.sqrt() * h * h / 12.0);
        m = expm_traceless(&omega) * m;
    }
    Ok(m)
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dormand_prince<F>(generator: &F, duration: f64, first_step: f64, tol: f64, max_steps: usize) -> Result<Matrix2<f64>>
where
    F: Fn(f64) -> Matrix2<f64>,
{
    let mut m = Matrix2::identity();
    let mut t = 0.0;
    let mut h = first_step.min(duration);
    let h_min = duration * 1e-14;
    let mut steps = 0usize;
    while t < duration {
        if steps >= max_steps {
            return Err(OttoError::IntegrationFailure(format!(
                "adaptive integrator exceeded {max_steps} steps at t = {t}"
            )));
        }
        steps += 1;
        h = h.min(duration - t);
        let mut k = [Matrix2::zeros(); 7];
        for i in 0..7 {
            let mut y = m;
            for (j, kj) in k.iter().enumerate().take(i) {
                y += kj * (A[i][j] * h);
            }
            k[i] = generator(t + C[i] * h) * y;
        }
        let mut y5 = m;
        let mut err = Matrix2::zeros();
        for i in 0..7 {
            y5 += k[i] * (B5[i] * h);
            err += k[i] * ((B5[i] - B4[i]) * h);
        }
        let norm = err
            .iter()
            .zip(y5.iter())
            .map(|(e, y)| e.abs() / (tol + tol * y.abs()))
            .fold(0.0, f64::max);
        if norm <= 1.0 {
            t += h;
            m = y5;
        }
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min && t < duration {
            return Err(OttoError::IntegrationFailure(format!(
                "step size underflow ({h:e}) at t = {t}"
            )));
        }
    }
    Ok(m)
}
