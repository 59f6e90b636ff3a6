//! Polynomial (Jacobi-Anger) emulation of the block-encoded propagator.
//!
//! `exp(i tau x) = J_0(tau) + 2 sum_k i^k J_k(tau) T_k(x)`; the even part
//! approximates `cos`, the odd part `sin`. Polynomials act on
//! `Hhat = (H - s) / alpha` through a Clenshaw recurrence.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{GreensTrajectory, TimeGrid};
use crate::hamiltonian::Hamiltonian;
use crate::oracle::CoreHoleLehmann;
use crate::spectra::{fourier_spectrum, OmegaGrid};

/// `J_0(x) .. J_n(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = n.max(ax as usize);
    let mut m = top + 32 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut vals = vec![0.0; n + 1];
    for k in (0..=m).rev() {
        if k <= n {
            vals[k] = cur;
        }
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in vals.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for (k, v) in vals.iter().enumerate() {
        let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        out[k] = sign * v / norm;
    }
    out
}

/// Chebyshev coefficients of the truncated `cos(tau x)` (even degrees up to
/// `d_cos`) and `sin(tau x)` (odd degrees up to `d_sin`), indexed by degree.
pub fn chebyshev_coeffs(tau: f64, d_cos: usize, d_sin: usize) -> (Vec<f64>, Vec<f64>) {
    let j = bessel_j(d_cos.max(d_sin), tau);
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut even = vec![0.0; d_cos + 1];
    for k in (0..=d_cos).step_by(2) {
        even[k] = if k == 0 { j[0] } else { 2.0 * sign(k / 2) * j[k] };
    }
    let mut odd = vec![0.0; d_sin + 1];
    for k in (1..=d_sin).step_by(2) {
        odd[k] = 2.0 * sign((k - 1) / 2) * j[k];
    }
    (even, odd)
}

/// Upper bound `2 sum_{k>d} |J_k(tau)|` on the sup-norm error of the
/// degree-`d` Jacobi-Anger truncation of `exp(i tau x)` on `[-1, 1]`.
pub fn truncation_bound(tau: f64, d: usize) -> f64 {
    let n = d + 40 + 2 * tau.abs() as usize;
    bessel_j(n, tau)[d + 1..].iter().map(|x| 2.0 * x.abs()).sum()
}

/// Affine map `Hhat = (H - shift) / alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub alpha: f64,
    pub shift: f64,
}

fn power_iteration(m: &DMatrix<f64>, iterations: usize) -> f64 {
    let n = m.nrows();
    let mut v = DVector::from_iterator(n, (0..n).map(|i| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0));
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = m * &v;
        lambda = v.dot(&w);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / nw;
    }
    lambda
}

impl BlockEncoding {
    /// Spectral ends from two power iterations; `alpha` is `margin` times
    /// the half-spread.
    pub fn estimate(m: &DMatrix<f64>, margin: f64) -> Self {
        let n = m.nrows();
        let a = power_iteration(m, 2000);
        let shifted = m - DMatrix::identity(n, n) * a;
        let b = power_iteration(&shifted, 2000) + a;
        let shift = 0.5 * (a + b);
        let half = 0.5 * (a - b).abs();
        Self { alpha: margin * half.max(1e-12), shift }
    }

    /// Errors when the power-iteration norm of `Hhat` exceeds 1.
    pub fn check(&self, m: &DMatrix<f64>) -> Result<()> {
        let n = m.nrows();
        let centered = m - DMatrix::identity(n, n) * self.shift;
        let a = power_iteration(&centered, 2000).abs();
        if !(self.alpha > 0.0) || a > self.alpha * (1.0 + 1e-9) {
            return Err(Error::AlphaTooSmall { estimate: a, alpha: self.alpha });
        }
        Ok(())
    }
}

/// `p(Hhat) v` with `p = sum c_k T_k`, by Clenshaw's recurrence.
pub fn apply_poly(m: &DMatrix<f64>, enc: &BlockEncoding, coeffs: &[Complex64], v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.len();
    let hhat = |x: &DVector<Complex64>| -> DVector<Complex64> {
        let mut y = DVector::<Complex64>::zeros(n);
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += m[(i, j)] * x[j];
            }
            y[i] = (acc - enc.shift * x[i]) / enc.alpha;
        }
        y
    };
    if coeffs.is_empty() {
        return DVector::zeros(n);
    }
    let mut b1 = DVector::<Complex64>::zeros(n);
    let mut b2 = DVector::<Complex64>::zeros(n);
    for k in (1..coeffs.len()).rev() {
        let b0 = v * coeffs[k] + hhat(&b1) * Complex64::new(2.0, 0.0) - &b2;
        b2 = b1;
        b1 = b0;
    }
    v * coeffs[0] + hhat(&b1) - b2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DegreeMode {
    /// The same `(d_cos, d_sin)` at every time.
    Fixed,
    /// Smallest degrees whose truncation bound is below `tol`, capped by the
    /// configured degrees.
    Adaptive { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QspConfig {
    pub d_cos: usize,
    pub d_sin: usize,
    /// Block-encoding normalization; estimated when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default = "default_margin")]
    pub alpha_margin: f64,
    #[serde(default = "default_mode")]
    pub degree_mode: DegreeMode,
}

fn default_margin() -> f64 {
    1.05
}

fn default_mode() -> DegreeMode {
    DegreeMode::Fixed
}

impl QspConfig {
    pub fn new(d_cos: usize, d_sin: usize) -> Self {
        Self { d_cos, d_sin, alpha: None, shift: None, alpha_margin: default_margin(), degree_mode: DegreeMode::Fixed }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.d_cos.is_multiple_of(2) {
            return Err(Error::DegreeParity(format!("cosine degree {} must be even", self.d_cos)));
        }
        if self.d_sin % 2 != 1 {
            return Err(Error::DegreeParity(format!("sine degree {} must be odd", self.d_sin)));
        }
        if !(self.alpha_margin >= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha margin {} below 1", self.alpha_margin)));
        }
        Ok(())
    }

    /// Oracle calls for one time point: one per degree of each polynomial.
    pub fn queries_per_timestep(&self) -> usize {
        self.d_cos + self.d_sin
    }

    fn degrees_at(&self, tau: f64) -> (usize, usize) {
        match self.degree_mode {
            DegreeMode::Fixed => (self.d_cos, self.d_sin),
            DegreeMode::Adaptive { tol } => {
                let mut d = 1;
                while d < self.d_cos.max(self.d_sin) && truncation_bound(tau, d) > tol {
                    d += 1;
                }
                let even = (d + d % 2).min(self.d_cos);
                let odd = (d + 1 - d % 2).min(self.d_sin);
                (even, odd)
            }
        }
    }
}

/// Coefficients of `cos + i sin` truncated at `(d_cos, d_sin)`.
pub fn propagator_coeffs(tau: f64, d_cos: usize, d_sin: usize) -> Vec<Complex64> {
    let (even, odd) = chebyshev_coeffs(tau, d_cos, d_sin);
    let n = even.len().max(odd.len());
    (0..n)
        .map(|k| Complex64::new(even.get(k).copied().unwrap_or(0.0), odd.get(k).copied().unwrap_or(0.0)))
        .collect()
}

/// Ionized state and (N-1) sector used by the polynomial propagator.
#[derive(Debug, Clone)]
pub struct QspProblem {
    pub ground_energy: f64,
    pub matrix: DMatrix<f64>,
    pub ionized: DVector<Complex64>,
    pub encoding: BlockEncoding,
}

impl QspProblem {
    pub fn new(h: &Hamiltonian, core: usize, cfg: &QspConfig) -> Result<Self> {
        cfg.validate()?;
        Self::from_lehmann(&CoreHoleLehmann::compute(h, core)?, cfg)
    }

    /// Reuses the ground state and (N-1) matrix of an exact solution.
    pub fn from_lehmann(exact: &CoreHoleLehmann, cfg: &QspConfig) -> Result<Self> {
        cfg.validate()?;
        let matrix = exact.ionized_spectrum.matrix.clone();
        let mut encoding = BlockEncoding::estimate(&matrix, cfg.alpha_margin);
        if let Some(s) = cfg.shift {
            encoding.shift = s;
        }
        if let Some(a) = cfg.alpha {
            encoding.alpha = a;
        }
        encoding.check(&matrix)?;
        let ionized = DVector::from_vec(exact.ionized.coefficients.clone());
        Ok(Self { ground_energy: exact.ground_energy, matrix, ionized, encoding })
    }

    /// `-i e^{-i E_g t} <psi_c| p(Hhat) |psi_c>` with the shift phase restored.
    pub fn value_at(&self, t: f64, cfg: &QspConfig) -> Complex64 {
        let tau = self.encoding.alpha * t;
        let (dc, ds) = cfg.degrees_at(tau);
        let coeffs = propagator_coeffs(tau, dc, ds);
        let w = apply_poly(&self.matrix, &self.encoding, &coeffs, &self.ionized);
        let overlap: Complex64 = self.ionized.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
        let phase = Complex64::cis((self.encoding.shift - self.ground_energy) * t);
        -Complex64::i() * phase * overlap
    }

    pub fn trajectory(&self, grid: TimeGrid, cfg: &QspConfig) -> GreensTrajectory {
        let g = (0..grid.len()).into_par_iter().map(|k| self.value_at(grid.time(k), cfg)).collect();
        GreensTrajectory::new(grid, g, "qsp")
    }
}

/// Green's function from the fixed-degree polynomial propagator.
pub fn qsp_greens(h: &Hamiltonian, core: usize, grid: TimeGrid, cfg: &QspConfig) -> Result<GreensTrajectory> {
    Ok(QspProblem::new(h, core, cfg)?.trajectory(grid, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QspErrorReport {
    pub degrees: (usize, usize),
    pub rel_err_g: f64,
    pub rel_err_a: f64,
    pub queries_per_timestep: usize,
}

fn relative_mean_error(x: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    let (num, den, n) = x.fold((0.0, 0.0, 0usize), |(a, b, n), (u, v)| (a + (u - v).norm(), b + v.norm(), n + 1));
    if n == 0 || den == 0.0 {
        return 0.0;
    }
    num / den
}

/// Relative mean errors of `approx` against `exact` in time and in the
/// broadened spectrum.
pub fn error_report(
    approx: &GreensTrajectory,
    exact: &GreensTrajectory,
    cfg: &QspConfig,
    eta: f64,
    omega: &OmegaGrid,
) -> Result<QspErrorReport> {
    approx.grid.check_same(&exact.grid)?;
    let rel_err_g = relative_mean_error(approx.g.iter().copied().zip(exact.g.iter().copied()));
    let a = fourier_spectrum(approx, eta, omega)?;
    let b = fourier_spectrum(exact, eta, omega)?;
    let rel_err_a = relative_mean_error(a.a.iter().zip(&b.a).map(|(&x, &y)| (Complex64::new(x, 0.0), Complex64::new(y, 0.0))));
    Ok(QspErrorReport { degrees: (cfg.d_cos, cfg.d_sin), rel_err_g, rel_err_a, queries_per_timestep: cfg.queries_per_timestep() })
}
