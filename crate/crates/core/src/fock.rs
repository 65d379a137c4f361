//! Truncated Fock-space oracle for the pumped oscillator.
//!
//! Nothing here goes through covariance matrices: operators are matrices
//! in the number basis `|0⟩ … |dim − 1⟩`, Gibbs states come from a dense
//! eigendecomposition, and unitary strokes are integrated as Schrödinger
//! evolution of the eigenvectors of the initial density matrix.
//!
//! The cutoff starts at [`DEFAULT_DIM`] and is raised whenever the weight
//! on the two highest levels of any state in the cycle exceeds the tail
//! limit.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::analytic;
use crate::bogoliubov;
use crate::dynamics::{CycleSummary, RampSchedule, StrokeDuration};
use crate::error::{OttoError, Result};
use crate::params::{self, Energy, EngineParams, Frequency, InverseTemperature};

pub const DEFAULT_DIM: usize = 80;

/// Largest weight allowed on the two highest retained levels.
pub const TAIL_LIMIT: f64 = 1e-12;

/// Mixture components lighter than this are dropped before propagation.
const WEIGHT_FLOOR: f64 = 1e-14;

/// Eigencomponents lighter than this are left out of dense Gibbs matrices.
const DENSE_FLOOR: f64 = 1e-30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Oracle settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    /// Cutoff tried first.
    pub initial_dim: usize,
    /// The search for an adequate cutoff gives up beyond this.
    pub max_dim: usize,
    /// Magnus step in oscillator periods.
    pub step: f64,
    pub tail_limit: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig {
            initial_dim: DEFAULT_DIM,
            max_dim: 2000,
            step: 5e-3,
            tail_limit: TAIL_LIMIT,
        }
    }
}

impl FockConfig {
    fn validate(&self) -> Result<()> {
        if self.initial_dim < 2 {
            return Err(OttoError::InvalidParameter {
                name: "dim",
                value: self.initial_dim as f64,
                reason: "cutoff must keep at least two levels",
            });
        }
        if self.step <= 0.0 || !self.step.is_finite() {
            return Err(OttoError::InvalidParameter {
                name: "step",
                value: self.step,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    fn next_dim(dim: usize) -> usize {
        (dim + 20).max(dim * 3 / 2)
    }
}

/// Hermitian operator on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(OttoError::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        Ok(FockOperator { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// The truncated annihilation operator, `a|n⟩ = √n |n − 1⟩`.
    pub fn annihilation(dim: usize) -> Self {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for n in 1..dim {
            m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        FockOperator { matrix: m }
    }

    /// `max |A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order with the matching eigenvectors as
    /// columns.
    pub fn eigen(&self) -> (DVector<f64>, DMatrix<Complex64>) {
        let real = self.matrix.iter().all(|c| c.im == 0.0);
        let (values, vectors) = if real {
            let e = SymmetricEigen::new(self.matrix.map(|c| c.re));
            (e.eigenvalues, e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
        } else {
            let e = SymmetricEigen::new(self.matrix.clone());
            (e.eigenvalues, e.eigenvectors)
        };
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let sorted = DVector::from_iterator(values.len(), order.iter().map(|&i| values[i]));
        let columns: Vec<_> = order.iter().map(|&i| vectors.column(i).into_owned()).collect();
        (sorted, DMatrix::from_columns(&columns))
    }
}

/// Matrix of `ω(a†a + ½) + χ(a†² + a²)` on the first `dim` levels.
pub fn build_hamiltonian(omega: Frequency, chi: f64, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(OttoError::InvalidParameter {
            name: "dim",
            value: dim as f64,
            reason: "cutoff must keep at least two levels",
        });
    }
    bogoliubov::effective_frequency(omega, chi)?;
    let band = Band::hamiltonian(omega, chi, dim);
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    for n in 0..dim {
        m[(n, n)] = Complex64::new(band.diag[n], 0.0);
    }
    for (n, &c) in band.off.iter().enumerate() {
        m[(n + 2, n)] = c;
        m[(n, n + 2)] = c.conj();
    }
    Ok(FockOperator { matrix: m })
}

/// Pure-state decomposition `ρ = Σ w_k |ψ_k⟩⟨ψ_k|` with orthonormal `ψ_k`
/// at preparation; propagation keeps it exact up to integrator error.
#[derive(Debug, Clone)]
struct Ensemble {
    weights: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Ensemble {
    fn density(&self) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        for (mut col, &w) in scaled.column_iter_mut().zip(&self.weights) {
            col *= Complex64::new(w, 0.0);
        }
        &scaled * self.vectors.adjoint()
    }

    /// Populations `Σ_k w_k |⟨v_i|ψ_k⟩|²` in the basis given by the columns of `basis`.
    fn populations(&self, basis: &DMatrix<Complex64>) -> Vec<f64> {
        let overlaps = basis.adjoint() * &self.vectors;
        overlaps
            .row_iter()
            .map(|row| row.iter().zip(&self.weights).map(|(c, w)| w * c.norm_sqr()).sum())
            .collect()
    }

    /// Nonzero eigenvalues of `ρ`, from the Gram matrix `W^½ Ψ†Ψ W^½`.
    fn spectrum(&self) -> Vec<f64> {
        let k = self.weights.len();
        let roots: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let overlap = self.vectors.adjoint() * &self.vectors;
        let gram = DMatrix::from_fn(k, k, |i, j| overlap[(i, j)] * (roots[i] * roots[j]));
        SymmetricEigen::new(gram).eigenvalues.iter().copied().collect()
    }
}

/// `ln p_i` and eigenvectors of a density matrix.
#[derive(Debug, Clone)]
struct LogSpectrum {
    log_p: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

/// Density matrix on the truncated space.
#[derive(Debug, Clone)]
pub struct FockState {
    rho: DMatrix<Complex64>,
    ensemble: Option<Ensemble>,
    spectrum: Option<LogSpectrum>,
}

impl FockState {
    /// Wraps a density matrix after checking Hermiticity and unit trace.
    pub fn from_density(rho: DMatrix<Complex64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(OttoError::DimensionMismatch(rho.nrows(), rho.ncols()));
        }
        let defect = (&rho - rho.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        let trace = rho.trace();
        if defect > 1e-10 || (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(OttoError::InvalidParameter {
                name: "rho",
                value: trace.re,
                reason: "density matrix must be Hermitian with unit trace",
            });
        }
        Ok(FockState {
            rho,
            ensemble: None,
            spectrum: None,
        })
    }

    /// Pure state `|ψ⟩⟨ψ|` of a normalized vector.
    pub fn pure(psi: DVector<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        let psi = psi / Complex64::new(norm, 0.0);
        let dim = psi.len();
        let ensemble = Ensemble {
            weights: vec![1.0],
            vectors: DMatrix::from_column_slice(dim, 1, psi.as_slice()),
        };
        Ok(FockState {
            rho: ensemble.density(),
            ensemble: Some(ensemble),
            spectrum: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn density(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.min()
    }

    /// `tr(ρ H)`.
    pub fn energy(&self, ham: &FockOperator) -> Result<Energy> {
        if ham.dim() != self.dim() {
            return Err(OttoError::DimensionMismatch(ham.dim(), self.dim()));
        }
        Ok(self.rho.component_mul(&ham.matrix.transpose()).sum().re)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        if let Some(s) = &self.spectrum {
            return -s
                .log_p
                .iter()
                .filter(|l| l.is_finite())
                .map(|&l| l.exp() * l)
                .sum::<f64>();
        }
        let eigenvalues = match &self.ensemble {
            Some(e) => e.spectrum(),
            None => SymmetricEigen::new(self.rho.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect(),
        };
        -eigenvalues
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    /// Weight on the `levels` highest number states.
    pub fn tail_weight(&self, levels: usize) -> f64 {
        let dim = self.dim();
        (dim.saturating_sub(levels)..dim).map(|n| self.rho[(n, n)].re).sum()
    }

    /// Quadrature covariance `σ` from `⟨a†a⟩` and `⟨a²⟩`.
    pub fn covariance(&self) -> Matrix2<f64> {
        let dim = self.dim();
        let number: f64 = (0..dim).map(|n| n as f64 * self.rho[(n, n)].re).sum();
        let pair: Complex64 = (0..dim.saturating_sub(2))
            .map(|n| self.rho[(n + 2, n)] * (((n + 1) * (n + 2)) as f64).sqrt())
            .sum();
        let base = number + 0.5;
        Matrix2::new(base + pair.re, pair.im, pair.im, base - pair.re)
    }

    fn ensemble(&self) -> Ensemble {
        if let Some(e) = &self.ensemble {
            return e.clone();
        }
        let (values, vectors) = match &self.spectrum {
            Some(s) => (s.log_p.iter().map(|l| l.exp()).collect::<Vec<_>>(), s.vectors.clone()),
            None => {
                let e = SymmetricEigen::new(self.rho.clone());
                (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
            }
        };
        keep_heavy(&values, &vectors)
    }

    fn log_spectrum(&self) -> Result<LogSpectrum> {
        if let Some(s) = &self.spectrum {
            return Ok(s.clone());
        }
        let e = SymmetricEigen::new(self.rho.clone());
        let min = e.eigenvalues.min();
        if min.is_nan() || min <= 0.0 {
            return Err(OttoError::RankDeficient(min));
        }
        Ok(LogSpectrum {
            log_p: e.eigenvalues.iter().map(|p| p.ln()).collect(),
            vectors: e.eigenvectors,
        })
    }
}

fn keep_heavy(weights: &[f64], vectors: &DMatrix<Complex64>) -> Ensemble {
    let kept: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > WEIGHT_FLOOR).collect();
    let total: f64 = kept.iter().map(|&i| weights[i]).sum();
    let columns: Vec<_> = kept.iter().map(|&i| vectors.column(i).into_owned()).collect();
    Ensemble {
        weights: kept.iter().map(|&i| weights[i] / total).collect(),
        vectors: DMatrix::from_columns(&columns),
    }
}

/// Eigendecomposition of a Hamiltonian, reused for Gibbs states at
/// several temperatures.
#[derive(Debug, Clone)]
struct HamiltonianSpectrum {
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl HamiltonianSpectrum {
    fn new(ham: &FockOperator) -> Self {
        let (energies, vectors) = ham.eigen();
        HamiltonianSpectrum { energies, vectors }
    }

    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn log_boltzmann(&self, beta: InverseTemperature) -> Vec<f64> {
        let e0 = self.energies[0];
        if beta.is_infinite() {
            return (0..self.dim())
                .map(|i| if i == 0 { 0.0 } else { f64::NEG_INFINITY })
                .collect();
        }
        let shifted: Vec<f64> = self.energies.iter().map(|e| -beta * (e - e0)).collect();
        let log_z = shifted.iter().map(|x| x.exp()).sum::<f64>().ln();
        shifted.iter().map(|x| x - log_z).collect()
    }

    /// Weight on the top two levels of `Σ_i p_i |v_i⟩⟨v_i|`.
    fn tail_of(&self, populations: &[f64]) -> f64 {
        let dim = self.dim();
        (dim - 2..dim)
            .map(|n| {
                populations
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * self.vectors[(n, i)].norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    fn gibbs(&self, beta: InverseTemperature, tail_limit: f64) -> Result<FockState> {
        let log_p = self.log_boltzmann(beta);
        let p: Vec<f64> = log_p.iter().map(|l| l.exp()).collect();
        let tail = self.tail_of(&p);
        if tail > tail_limit {
            return Err(OttoError::CutoffTooSmall {
                dim: self.dim(),
                tail,
                limit: tail_limit,
            });
        }
        let heavy: Vec<usize> = (0..p.len()).filter(|&i| p[i] > DENSE_FLOOR).collect();
        let basis = DMatrix::from_columns(&heavy.iter().map(|&i| self.vectors.column(i)).collect::<Vec<_>>());
        let mut weighted = basis.clone();
        for (mut col, &i) in weighted.column_iter_mut().zip(&heavy) {
            col *= Complex64::new(p[i], 0.0);
        }
        Ok(FockState {
            rho: weighted * basis.adjoint(),
            ensemble: Some(keep_heavy(&p, &self.vectors)),
            spectrum: Some(LogSpectrum {
                log_p,
                vectors: self.vectors.clone(),
            }),
        })
    }
}

/// Gibbs state `e^{−βH}/Z`; `beta = f64::INFINITY` gives the ground state.
pub fn gibbs_state(ham: &FockOperator, beta: InverseTemperature) -> Result<FockState> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(OttoError::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must be positive",
        });
    }
    HamiltonianSpectrum::new(ham).gibbs(beta, TAIL_LIMIT)
}

/// `D(ρ ‖ σ) = tr ρ ln ρ − tr ρ ln σ`.
pub fn relative_entropy_fock(rho: &FockState, sigma: &FockState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(OttoError::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let log_sigma = sigma.log_spectrum()?;
    let populations = match &rho.ensemble {
        Some(e) => e.populations(&log_sigma.vectors),
        None => {
            let v = &log_sigma.vectors;
            let rv = &rho.rho * v;
            (0..v.ncols()).map(|i| v.column(i).dotc(&rv.column(i)).re).collect()
        }
    };
    let mut cross = 0.0;
    for (pop, l) in populations.iter().zip(&log_sigma.log_p) {
        if l.is_finite() {
            cross += pop * l;
        } else if *pop > 1e-14 {
            return Err(OttoError::RankDeficient(0.0));
        }
    }
    Ok(-rho.entropy() - cross)
}

/// Hermitian pentadiagonal matrix: real diagonal and the complex coupling
/// `off[n] = ⟨n + 2|H|n⟩`.
struct Band {
    diag: Vec<f64>,
    off: Vec<Complex64>,
}

impl Band {
    fn hamiltonian(omega: f64, chi: f64, dim: usize) -> Self {
        Band {
            diag: (0..dim).map(|n| omega * (n as f64 + 0.5)).collect(),
            off: (0..dim.saturating_sub(2))
                .map(|n| Complex64::new(chi * (((n + 1) * (n + 2)) as f64).sqrt(), 0.0))
                .collect(),
        }
    }

    /// Gershgorin enclosure of the spectrum.
    fn bounds(&self) -> (f64, f64) {
        let dim = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for n in 0..dim {
            let mut radius = 0.0;
            if n >= 2 {
                radius += self.off[n - 2].norm();
            }
            if n + 2 < dim {
                radius += self.off[n].norm();
            }
            lo = lo.min(self.diag[n] - radius);
            hi = hi.max(self.diag[n] + radius);
        }
        (lo, hi)
    }
}

/// `out ← α (H − shift)/scale · x − β out` on a row-major block of `k` vectors.
#[allow(clippy::too_many_arguments)]
fn band_apply(
    band: &Band,
    shift: f64,
    scale: f64,
    x: &[Complex64],
    out: &mut [Complex64],
    k: usize,
    alpha: f64,
    beta: f64,
) {
    let dim = band.diag.len();
    let a = alpha / scale;
    for n in 0..dim {
        let d = Complex64::new((band.diag[n] - shift) * a, 0.0);
        let lower = (n >= 2).then(|| band.off[n - 2] * a);
        let upper = (n + 2 < dim).then(|| band.off[n].conj() * a);
        for j in 0..k {
            let mut y = d * x[n * k + j];
            if let Some(l) = lower {
                y += l * x[(n - 2) * k + j];
            }
            if let Some(u) = upper {
                y += u * x[(n + 2) * k + j];
            }
            let o = &mut out[n * k + j];
            *o = y - *o * beta;
        }
    }
}

/// `J_0(z) … J_n(z)` by Miller's backward recurrence normalised with
/// `J_0 + 2 Σ J_2m = 1`.
fn bessel_j(z: f64, n: usize) -> Vec<f64> {
    if z == 0.0 {
        let mut j = vec![0.0; n + 1];
        j[0] = 1.0;
        return j;
    }
    let start = n + 30 + (z.sqrt() as usize) * 4;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for m in (1..=start).rev() {
        j[m - 1] = 2.0 * m as f64 / z * j[m] - j[m + 1];
        if j[m - 1].abs() > 1e250 {
            for v in &mut j[m - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(n + 1);
    j.iter().map(|v| v / norm).collect()
}

/// Applies `exp(−i h H)` to the block by a Chebyshev expansion.
fn chebyshev_exp(band: &Band, h: f64, block: &mut [Complex64], k: usize, work: &mut [Vec<Complex64>; 3]) {
    let (lo, hi) = band.bounds();
    let shift = 0.5 * (hi + lo);
    let scale = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE) * (1.0 + 1e-12);
    let z = h * scale;
    let n_max = (z + 10.0 * z.cbrt().max(1.0) + 25.0) as usize;
    let bessel = bessel_j(z, n_max);
    let last = bessel.iter().rposition(|b| b.abs() > 1e-18).unwrap_or(0);

    let [prev, cur, acc] = work;
    prev.copy_from_slice(block);
    let a0 = bessel[0];
    for (a, x) in acc.iter_mut().zip(prev.iter()) {
        *a = x * a0;
    }
    if last >= 1 {
        band_apply(band, shift, scale, prev, cur, k, 1.0, 0.0);
        let c = Complex64::new(0.0, -2.0 * bessel[1]);
        for (a, x) in acc.iter_mut().zip(cur.iter()) {
            *a += x * c;
        }
    }
    let mut phase = Complex64::new(0.0, -1.0);
    for &jm in bessel.iter().take(last + 1).skip(2) {
        // T_m = 2X T_{m−1} − T_{m−2}, written over T_{m−2}
        band_apply(band, shift, scale, cur, prev, k, 2.0, 1.0);
        std::mem::swap(prev, cur);
        phase *= Complex64::new(0.0, -1.0);
        let c = phase * (2.0 * jm);
        for (a, x) in acc.iter_mut().zip(cur.iter()) {
            *a += x * c;
        }
    }
    let global = Complex64::from_polar(1.0, -h * shift);
    for (b, a) in block.iter_mut().zip(acc.iter()) {
        *b = a * global;
    }
}

/// Evolves the state through one stroke with fourth-order Magnus steps.
///
/// For `H(t) = H₀ + χ(t) K` with `K = a†² + a²` the commutator term is
/// exact, `[H₀, K] = 2ω(a†² − a²)`, so each step applies the exponential
/// of a fixed pentadiagonal matrix.
pub fn propagate_fock(
    state: &FockState,
    schedule: &RampSchedule,
    omega: Frequency,
    config: &FockConfig,
) -> Result<FockState> {
    config.validate()?;
    schedule.endpoints(omega)?;
    let periods = match schedule.duration {
        StrokeDuration::Sudden => return Ok(state.clone()),
        StrokeDuration::Periods(p) if p > 0.0 && p.is_finite() => p,
        StrokeDuration::Periods(p) => {
            return Err(OttoError::InvalidParameter {
                name: "tau",
                value: p,
                reason: "stroke duration must be positive and finite",
            })
        }
    };
    if schedule.chi_final == 0.0 {
        return Ok(state.clone());
    }

    let dim = state.dim();
    let ensemble = state.ensemble();
    let k = ensemble.weights.len();
    let mut block = vec![ZERO; dim * k];
    for (j, col) in ensemble.vectors.column_iter().enumerate() {
        for n in 0..dim {
            block[n * k + j] = col[n];
        }
    }
    let mut work = [vec![ZERO; dim * k], vec![ZERO; dim * k], vec![ZERO; dim * k]];

    let period = 2.0 * std::f64::consts::PI / omega;
    let duration = periods * period;
    let steps = (duration / (config.step * period)).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let offset = 3f64.sqrt() / 6.0;
    let mut band = Band::hamiltonian(omega, 0.0, dim);
    let root: Vec<f64> = (0..dim.saturating_sub(2))
        .map(|n| (((n + 1) * (n + 2)) as f64).sqrt())
        .collect();

    for step in 0..steps {
        let t0 = step as f64 * h;
        let chi1 = schedule.chi_at((t0 + (0.5 - offset) * h) / duration);
        let chi2 = schedule.chi_at((t0 + (0.5 + offset) * h) / duration);
        let mean = 0.5 * (chi1 + chi2);
        let comm = 3f64.sqrt() * h / 12.0 * (chi1 - chi2) * 2.0 * omega;
        for (o, s) in band.off.iter_mut().zip(&root) {
            *o = Complex64::new(mean * s, -comm * s);
        }
        chebyshev_exp(&band, h, &mut block, k, &mut work);

        let tail: f64 = (dim - 2..dim)
            .flat_map(|n| (0..k).map(move |j| (n, j)))
            .map(|(n, j)| ensemble.weights[j] * block[n * k + j].norm_sqr())
            .sum();
        if tail > config.tail_limit {
            return Err(OttoError::CutoffTooSmall {
                dim,
                tail,
                limit: config.tail_limit,
            });
        }
    }

    let vectors = DMatrix::from_fn(dim, k, |n, j| block[n * k + j]);
    let evolved = Ensemble {
        weights: ensemble.weights,
        vectors,
    };
    Ok(FockState {
        rho: evolved.density(),
        ensemble: Some(evolved),
        spectrum: None,
    })
}

/// Cycle computed in the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockCycleReport {
    pub dim: usize,
    pub tau: StrokeDuration,
    pub summary: CycleSummary,
}

/// Gibbs states and adiabatic references of one parameter set at a fixed
/// cutoff, shared by all stroke durations.
#[derive(Debug, Clone)]
pub struct FockCycle {
    params: EngineParams,
    config: FockConfig,
    free: FockOperator,
    pumped: FockOperator,
    hot: FockState,
    cold: FockState,
    adiabatic_compression: Energy,
    adiabatic_expansion: Energy,
}

impl FockCycle {
    /// Prepares the cycle at the smallest cutoff, starting from
    /// `config.initial_dim`, that keeps all reference states within the
    /// tail limit.
    pub fn prepare(params: &EngineParams, config: &FockConfig) -> Result<Self> {
        config.validate()?;
        params::validate(*params)?;
        let mut dim = config.initial_dim;
        loop {
            match Self::prepare_at(params, config, dim) {
                Err(OttoError::CutoffTooSmall { .. }) if dim < config.max_dim => {
                    dim = FockConfig::next_dim(dim).min(config.max_dim);
                }
                other => return other,
            }
        }
    }

    fn prepare_at(params: &EngineParams, config: &FockConfig, dim: usize) -> Result<Self> {
        let free = build_hamiltonian(params.omega, 0.0, dim)?;
        let pumped = build_hamiltonian(params.omega, params.chi(), dim)?;
        let free_spectrum = HamiltonianSpectrum::new(&free);
        let pumped_spectrum = HamiltonianSpectrum::new(&pumped);
        let hot = free_spectrum.gibbs(params.beta_h, config.tail_limit)?;
        let cold = pumped_spectrum.gibbs(params.beta_c, config.tail_limit)?;

        // adiabatic image: populations carried over level by level
        let image = |from: &HamiltonianSpectrum, beta: f64, to: &HamiltonianSpectrum| -> Result<Energy> {
            let p: Vec<f64> = from.log_boltzmann(beta).iter().map(|l| l.exp()).collect();
            let tail = to.tail_of(&p);
            if tail > config.tail_limit {
                return Err(OttoError::CutoffTooSmall {
                    dim,
                    tail,
                    limit: config.tail_limit,
                });
            }
            Ok(p.iter().zip(to.energies.iter()).map(|(p, e)| p * e).sum())
        };
        let adiabatic_compression = image(&free_spectrum, params.beta_h, &pumped_spectrum)?;
        let adiabatic_expansion = image(&pumped_spectrum, params.beta_c, &free_spectrum)?;

        Ok(FockCycle {
            params: *params,
            config: *config,
            free,
            pumped,
            hot,
            cold,
            adiabatic_compression,
            adiabatic_expansion,
        })
    }

    pub fn dim(&self) -> usize {
        self.free.dim()
    }

    /// Runs both unitary strokes for one duration.
    pub fn run(&self, tau: StrokeDuration) -> Result<FockCycleReport> {
        let omega = self.params.omega;
        let chi = self.params.chi();
        let rho1 = &self.hot;
        let rho3 = &self.cold;
        let rho2 = propagate_fock(rho1, &RampSchedule::compression(chi, tau), omega, &self.config)?;
        let rho4 = propagate_fock(rho3, &RampSchedule::expansion(chi, tau), omega, &self.config)?;

        let e1 = rho1.energy(&self.free)?;
        let e2 = rho2.energy(&self.pumped)?;
        let e3 = rho3.energy(&self.pumped)?;
        let e4 = rho4.energy(&self.free)?;

        let sigma_compression = relative_entropy_fock(&rho2, rho3)?;
        let sigma_expansion = relative_entropy_fock(&rho4, rho1)?;
        let efficiency = analytic::classify((e2 - e1) + (e4 - e3), e1 - e4, e3 - e2);

        Ok(FockCycleReport {
            dim: self.dim(),
            tau,
            summary: CycleSummary {
                energies: [e1, e2, e3, e4],
                entropies: [rho1.entropy(), rho2.entropy(), rho3.entropy(), rho4.entropy()],
                sigma_compression,
                sigma_expansion,
                q_star_compression: e2 / self.adiabatic_compression,
                q_star_expansion: e4 / self.adiabatic_expansion,
                efficiency,
            },
        })
    }
}

/// One cycle per duration. A duration whose strokes outgrow the cutoff is
/// repeated at a larger one, which is then kept for the remaining points.
pub fn fock_cycle_sweep(
    params: &EngineParams,
    taus: &[StrokeDuration],
    config: &FockConfig,
) -> Result<Vec<FockCycleReport>> {
    let mut cycle = FockCycle::prepare(params, config)?;
    let mut reports = Vec::with_capacity(taus.len());
    for &tau in taus {
        loop {
            match cycle.run(tau) {
                Err(OttoError::CutoffTooSmall { dim, .. }) if dim < config.max_dim => {
                    let bigger = FockConfig {
                        initial_dim: FockConfig::next_dim(dim).min(config.max_dim),
                        ..*config
                    };
                    cycle = FockCycle::prepare(params, &bigger)?;
                }
                other => {
                    reports.push(other?);
                    break;
                }
            }
        }
    }
    Ok(reports)
}

/// A single cycle with automatic cutoff.
pub fn run_fock_cycle(params: &EngineParams, tau: StrokeDuration, config: &FockConfig) -> Result<FockCycleReport> {
    Ok(fock_cycle_sweep(params, &[tau], config)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{self, QuadraticHamiltonian};
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI;

    fn chi(r: f64) -> f64 {
        bogoliubov::chi_from_r(OMEGA, r)
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let h = build_hamiltonian(OMEGA, 0.0, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j { OMEGA * (i as f64 + 0.5) } else { 0.0 };
                assert_eq!(h.matrix()[(i, j)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn pumped_hamiltonian_matches_ladder_operators() {
        let dim = 12;
        let h = build_hamiltonian(OMEGA, 1.3, dim).unwrap();
        let a = FockOperator::annihilation(dim);
        let a = a.matrix();
        let ad = a.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let expected = (&ad * a + DMatrix::identity(dim, dim) * half) * Complex64::new(OMEGA, 0.0)
            + (&ad * &ad + a * a) * Complex64::new(1.3, 0.0);
        assert!((h.matrix() - expected).norm() < 1e-12);
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn rejects_tiny_cutoff_and_unstable_pump() {
        assert!(build_hamiltonian(OMEGA, 0.0, 1).is_err());
        assert!(matches!(
            build_hamiltonian(OMEGA, PI, 10),
            Err(OttoError::UnstablePump { .. })
        ));
    }

    #[test]
    fn low_gaps_equal_normal_frequency() {
        let h = build_hamiltonian(OMEGA, chi(0.4), 80).unwrap();
        let (e, _) = h.eigen();
        let big_omega = OMEGA / 0.8f64.cosh();
        for n in 0..10 {
            assert!((e[n + 1] - e[n] - big_omega).abs() < 1e-8, "gap {n}");
        }
        assert!((e[0] - 0.5 * big_omega).abs() < 1e-8);
    }

    #[test]
    fn ground_state_covariance_matches_gaussian() {
        let h = build_hamiltonian(OMEGA, chi(0.4), 80).unwrap();
        let ground = gibbs_state(&h, f64::INFINITY).unwrap();
        let expected = gaussian::thermal_state(&QuadraticHamiltonian::squeezed(OMEGA, 0.4).unwrap(), f64::INFINITY);
        assert!((ground.covariance() - expected.sigma()).norm() < 1e-10);
        assert!((ground.purity() - 1.0).abs() < 1e-12);
        assert!(ground.entropy().abs() < 1e-12);
    }

    #[test]
    fn thermal_energy_and_entropy() {
        let h = build_hamiltonian(OMEGA, 0.0, 80).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        assert!((g.energy(&h).unwrap() - 3.153_348_094_937_162).abs() < 1e-10);
        assert!((g.entropy() - 0.013_624_629_924_104_187).abs() < 1e-10);
        assert!((g.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hot_thermal_state_needs_more_levels_than_a_small_cutoff() {
        let h = build_hamiltonian(OMEGA, 0.0, 20).unwrap();
        assert!(matches!(
            gibbs_state(&h, 0.1),
            Err(OttoError::CutoffTooSmall { dim: 20, .. })
        ));
        let h = build_hamiltonian(OMEGA, 0.0, 80).unwrap();
        let g = gibbs_state(&h, 0.1).unwrap();
        assert!((g.energy(&h).unwrap() - 10.326_842_314_930_173).abs() < 1e-9);
    }

    #[test]
    fn squeezed_gibbs_state_matches_gaussian() {
        let r = 0.8;
        let h = build_hamiltonian(OMEGA, chi(r), 200).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let gauss = gaussian::thermal_state(&QuadraticHamiltonian::squeezed(OMEGA, r).unwrap(), 1.0);
        assert!((g.covariance() - gauss.sigma()).norm() < 1e-9);
        assert!((g.entropy() - gaussian::von_neumann_entropy(&gauss).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_matches_gaussian_closed_form() {
        let dim = 120;
        let free = build_hamiltonian(OMEGA, 0.0, dim).unwrap();
        let pumped = build_hamiltonian(OMEGA, chi(0.4), dim).unwrap();
        let rho = gibbs_state(&free, 0.1).unwrap();
        let sigma = gibbs_state(&pumped, 1.0).unwrap();
        let d = relative_entropy_fock(&rho, &sigma).unwrap();
        let closed = gaussian::relative_entropy_to_thermal(
            &gaussian::thermal_state(&QuadraticHamiltonian::free(OMEGA).unwrap(), 0.1),
            &QuadraticHamiltonian::squeezed(OMEGA, 0.4).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(d > 0.0);
        assert!((d - closed).abs() < 1e-6, "{d} vs {closed}");
        assert!(relative_entropy_fock(&sigma, &sigma).unwrap().abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_against_pure_state_is_rank_deficient() {
        let h = build_hamiltonian(OMEGA, 0.0, 30).unwrap();
        let mixed = gibbs_state(&h, 0.5).unwrap();
        let mut psi = DVector::from_element(30, ZERO);
        psi[0] = Complex64::new(1.0, 0.0);
        let pure = FockState::from_density(FockState::pure(psi).unwrap().density().clone()).unwrap();
        assert!(matches!(
            relative_entropy_fock(&mixed, &pure),
            Err(OttoError::RankDeficient(_))
        ));
        assert!(matches!(
            relative_entropy_fock(&mixed, &gibbs_state(&h, f64::INFINITY).unwrap()),
            Err(OttoError::RankDeficient(_))
        ));
    }

    #[test]
    fn bessel_values() {
        // J_0(1), J_1(1), J_5(10) from tables
        let j = bessel_j(1.0, 10);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j(10.0, 40);
        assert!((j[5] - (-0.234_061_528_186_793_6)).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_matches_dense_exponential() {
        let dim = 16;
        let mut band = Band::hamiltonian(OMEGA, 1.1, dim);
        for (i, o) in band.off.iter_mut().enumerate() {
            o.im = 0.3 * (i as f64 + 1.0).sqrt();
        }
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for n in 0..dim {
            m[(n, n)] = Complex64::new(band.diag[n], 0.0);
        }
        for (n, &c) in band.off.iter().enumerate() {
            m[(n + 2, n)] = c;
            m[(n, n + 2)] = c.conj();
        }
        let h = 0.05;
        let e = SymmetricEigen::new(m);
        let phases = e.eigenvalues.map(|l| Complex64::from_polar(1.0, -h * l));
        let u = &e.eigenvectors * DMatrix::from_diagonal(&phases) * e.eigenvectors.adjoint();

        let k = 2;
        let x0 = DMatrix::from_fn(dim, k, |n, j| Complex64::new((n + j) as f64, (n * j) as f64 * 0.1));
        let mut block: Vec<Complex64> = (0..dim * k).map(|i| x0[(i / k, i % k)]).collect();
        let mut work = [vec![ZERO; dim * k], vec![ZERO; dim * k], vec![ZERO; dim * k]];
        chebyshev_exp(&band, h, &mut block, k, &mut work);
        let expected = u * x0;
        for n in 0..dim {
            for j in 0..k {
                assert!((block[n * k + j] - expected[(n, j)]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn unpumped_ramp_leaves_gibbs_state_invariant() {
        let h = build_hamiltonian(OMEGA, 0.0, 60).unwrap();
        let g = gibbs_state(&h, 1.0).unwrap();
        let out = propagate_fock(
            &g,
            &RampSchedule::compression(0.0, StrokeDuration::Periods(1.0)),
            OMEGA,
            &FockConfig::default(),
        )
        .unwrap();
        assert!((out.density() - g.density()).norm() < 1e-14);
    }

    #[test]
    fn propagation_is_unitary_and_matches_gaussian() {
        let dim = 120;
        let free = build_hamiltonian(OMEGA, 0.0, dim).unwrap();
        let rho = gibbs_state(&free, 1.0).unwrap();
        let sched = RampSchedule::compression(chi(0.4), StrokeDuration::Periods(0.7));
        let out = propagate_fock(&rho, &sched, OMEGA, &FockConfig::default()).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-10);
        assert!((out.purity() - rho.purity()).abs() < 1e-8);
        assert!((out.entropy() - rho.entropy()).abs() < 1e-8);
        assert!(out.min_eigenvalue() > -1e-10);

        let gauss = crate::dynamics::propagate(
            &gaussian::thermal_state(&QuadraticHamiltonian::free(OMEGA).unwrap(), 1.0),
            &sched,
            OMEGA,
            &crate::dynamics::IntegratorConfig::default(),
        )
        .unwrap();
        assert!((out.covariance() - gauss.sigma()).norm() < 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = gibbs_state(&build_hamiltonian(OMEGA, 0.0, 30).unwrap(), 1.0).unwrap();
        let b = gibbs_state(&build_hamiltonian(OMEGA, 0.0, 40).unwrap(), 1.0).unwrap();
        assert!(matches!(
            relative_entropy_fock(&a, &b),
            Err(OttoError::DimensionMismatch(30, 40))
        ));
    }
}
