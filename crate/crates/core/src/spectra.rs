//! Broadened spectral functions, peak search and quasiparticle fits.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::GreensTrajectory;

pub const HARTREE_TO_EV: f64 = 27.211386245988;
pub const DEFAULT_ETA: f64 = 0.01;

/// Uniform frequency grid in hartree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self { lo: -4.0, hi: 1.0, n: 5001 }
    }
}

impl OmegaGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.hi > self.lo) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidParameter(format!("bad frequency grid [{}, {}] x {}", self.lo, self.hi, self.n)));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Same range with twice the density.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub grid: OmegaGrid,
    pub a: Vec<f64>,
    pub eta: f64,
    /// Factor the raw transform was divided by (1 when unnormalized).
    pub normalization: f64,
}

fn trapezoid(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (y[1..n - 1].iter().sum::<f64>() + 0.5 * (y[0] + y[n - 1])),
    }
}

impl SpectralFunction {
    pub fn omegas(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.a, self.grid.step())
    }

    pub fn normalized(&self) -> Result<Self> {
        let s = self.integral();
        if s == 0.0 || !s.is_finite() {
            return Err(Error::ZeroSpectrum);
        }
        Ok(Self { a: self.a.iter().map(|x| x / s).collect(), normalization: self.normalization * s, ..self.clone() })
    }

    pub fn max(&self) -> f64 {
        self.a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega_hartree,omega_eV,A")?;
        for (j, a) in self.a.iter().enumerate() {
            let om = self.grid.point(j);
            writeln!(w, "{:.10},{:.10},{:.17e}", om, om * HARTREE_TO_EV, a)?;
        }
        Ok(())
    }
}

impl SpectralFunction {
    /// Reads the output of [`SpectralFunction::write_csv`]; the grid is
    /// rebuilt from the first and last frequency.
    pub fn read_csv<R: BufRead>(r: R, eta: f64) -> Result<Self> {
        let mut omegas = Vec::new();
        let mut a = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::GridMismatch(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 3 {
                return Err(Error::GridMismatch(format!("line {}: expected 3 columns", lineno + 1)));
            }
            omegas.push(cols[0]);
            a.push(cols[2]);
        }
        let grid = OmegaGrid { lo: *omegas.first().unwrap_or(&0.0), hi: *omegas.last().unwrap_or(&0.0), n: omegas.len() };
        grid.validate()?;
        Ok(Self { grid, a, eta, normalization: 1.0 })
    }
}

/// `A(w) = -(1/pi) Im int_0^tmax e^{i w t} e^{-eta t} G(t) dt` by the
/// trapezoid rule on the trajectory grid.
pub fn fourier_spectrum(g: &GreensTrajectory, eta: f64, grid: &OmegaGrid) -> Result<SpectralFunction> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidEta(eta));
    }
    grid.validate()?;
    let dt = g.grid.dt();
    let n = g.g.len();
    let weighted: Vec<(f64, Complex64)> = (0..n)
        .map(|k| {
            let t = g.grid.time(k);
            let w = if k == 0 || k + 1 == n { 0.5 * dt } else { dt };
            (t, g.g[k] * (w * (-eta * t).exp()))
        })
        .collect();
    let a = (0..grid.n)
        .into_par_iter()
        .map(|j| {
            let om = grid.point(j);
            let sum: Complex64 = weighted.iter().map(|&(t, x)| x * Complex64::cis(om * t)).sum();
            -sum.im / std::f64::consts::PI
        })
        .collect();
    Ok(SpectralFunction { grid: *grid, a, eta, normalization: 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpFit {
    pub omega0: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub window: (f64, f64),
    pub residual: f64,
}

/// Half-width of the fit window in units of `eta`.
pub const FIT_HALF_WIDTH: f64 = 5.0;

/// Fits `Z L(w)` to the unit-normalized spectrum near its maximum, where
/// `L` is the `eta`-Lorentzian at the peak normalized to unit area on the
/// grid.
pub fn fit_qp_weight(a: &SpectralFunction) -> Result<QpFit> {
    if a.a.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    let a = a.normalized()?;
    let omegas = a.omegas();
    let (j0, _) = a.a.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (j, &x)| if x > best.1 { (j, x) } else { best });
    let omega0 = omegas[j0];
    let eta = a.eta;
    let lorentz: Vec<f64> = omegas.iter().map(|w| eta / std::f64::consts::PI / ((w - omega0).powi(2) + eta * eta)).collect();
    let area = trapezoid(&lorentz, a.grid.step());
    let window = (omega0 - FIT_HALF_WIDTH * eta, omega0 + FIT_HALF_WIDTH * eta);
    let idx: Vec<usize> = (0..omegas.len()).filter(|&j| omegas[j] >= window.0 && omegas[j] <= window.1).collect();
    if idx.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (num, den) = idx.iter().fold((0.0, 0.0), |(n, d), &j| {
        let l = lorentz[j] / area;
        (n + l * a.a[j], d + l * l)
    });
    let z = (num / den).max(0.0);
    let residual = idx.iter().map(|&j| (z * lorentz[j] / area - a.a[j]).powi(2)).sum::<f64>().sqrt();
    Ok(QpFit { omega0, z, window, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
}

/// Local maxima above `rel_threshold * max A`, refined by a parabola through
/// the three surrounding samples.
pub fn find_peaks(a: &SpectralFunction, rel_threshold: f64) -> Vec<Peak> {
    let top = a.max();
    if !(top > 0.0) {
        return Vec::new();
    }
    let h = a.grid.step();
    let y = &a.a;
    (1..y.len().saturating_sub(1))
        .filter(|&j| y[j] > y[j - 1] && y[j] >= y[j + 1] && y[j] > rel_threshold * top)
        .map(|j| {
            let (l, c, r) = (y[j - 1], y[j], y[j + 1]);
            let denom = l - 2.0 * c + r;
            let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            Peak { omega: a.grid.point(j) + shift * h, height: c - 0.25 * (l - r) * shift }
        })
        .collect()
}

/// Pairs each reference peak with the nearest candidate peak within `tol`.
pub fn match_peaks(reference: &[Peak], candidates: &[Peak], tol: f64) -> Vec<(Peak, Option<Peak>)> {
    reference
        .iter()
        .map(|r| {
            let best = candidates
                .iter()
                .filter(|c| (c.omega - r.omega).abs() <= tol)
                .min_by(|x, y| (x.omega - r.omega).abs().total_cmp(&(y.omega - r.omega).abs()))
                .copied();
            (*r, best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::TimeGrid;

    fn one_pole(w0: f64, weight: f64, grid: TimeGrid) -> Vec<Complex64> {
        grid.times().map(|t| -Complex64::i() * weight * Complex64::cis(-w0 * t)).collect()
    }

    fn traj(g: Vec<Complex64>, grid: TimeGrid) -> GreensTrajectory {
        GreensTrajectory::new(grid, g, "synthetic")
    }

    #[test]
    fn one_pole_is_lorentzian_at_pole() {
        let grid = TimeGrid::span(0.1, 900.0).unwrap();
        let a = fourier_spectrum(&traj(one_pole(0.167, 1.0, grid), grid), 0.01, &OmegaGrid::default()).unwrap();
        let peaks = find_peaks(&a, 0.02);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].omega - 0.167).abs() < 1e-4);
        assert!((peaks[0].height - 1.0 / (std::f64::consts::PI * 0.01)).abs() < 0.01 * peaks[0].height);
        let fit = fit_qp_weight(&a).unwrap();
        assert!((fit.z - 1.0).abs() < 1e-3, "{}", fit.z);
        assert!((a.integral() - 1.0).abs() < 0.02);
    }

    #[test]
    fn two_pole_weight() {
        let grid = TimeGrid::span(0.1, 900.0).unwrap();
        let g: Vec<Complex64> =
            one_pole(0.167, 0.7, grid).iter().zip(one_pole(-1.5, 0.3, grid)).map(|(x, y)| x + y).collect();
        let fit = fit_qp_weight(&fourier_spectrum(&traj(g, grid), 0.01, &OmegaGrid::default()).unwrap()).unwrap();
        assert!((fit.z - 0.7).abs() < 0.01, "{}", fit.z);
        assert!((fit.omega0 - 0.167).abs() < 1e-3);
    }

    #[test]
    fn transform_is_linear() {
        let grid = TimeGrid::span(0.1, 50.0).unwrap();
        let og = OmegaGrid { lo: -2.0, hi: 1.0, n: 301 };
        let g1 = one_pole(0.3, 0.5, grid);
        let g2: Vec<Complex64> = grid.times().map(|t| Complex64::new(0.1 * t.cos(), -0.2)).collect();
        let sum: Vec<Complex64> = g1.iter().zip(&g2).map(|(x, y)| x + y).collect();
        let a1 = fourier_spectrum(&traj(g1, grid), 0.01, &og).unwrap();
        let a2 = fourier_spectrum(&traj(g2, grid), 0.01, &og).unwrap();
        let a = fourier_spectrum(&traj(sum, grid), 0.01, &og).unwrap();
        for j in 0..og.n {
            assert!((a.a[j] - a1.a[j] - a2.a[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_inputs() {
        let grid = TimeGrid::span(0.1, 1.0).unwrap();
        let t = traj(one_pole(0.0, 1.0, grid), grid);
        assert!(matches!(fourier_spectrum(&t, 0.0, &OmegaGrid::default()), Err(Error::InvalidEta(_))));
        let flat = SpectralFunction { grid: OmegaGrid::default(), a: vec![0.0; 5001], eta: 0.01, normalization: 1.0 };
        assert!(matches!(fit_qp_weight(&flat), Err(Error::ZeroSpectrum)));
        assert!(find_peaks(&flat, 0.02).is_empty());
        let coarse = OmegaGrid { lo: -4.0, hi: 1.0, n: 3 };
        let spiky = SpectralFunction { grid: coarse, a: vec![0.0, 1.0, 0.0], eta: 0.01, normalization: 1.0 };
        assert!(fit_qp_weight(&spiky).is_ok());
    }

    #[test]
    fn csv_has_ev_column() {
        let a = SpectralFunction { grid: OmegaGrid { lo: 0.0, hi: 1.0, n: 2 }, a: vec![0.5, 0.25], eta: 0.01, normalization: 1.0 };
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let back = SpectralFunction::read_csv(buf.as_slice(), a.eta).unwrap();
        assert_eq!(back.a, a.a);
        assert_eq!(back.grid, a.grid);
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("1.0000000000,27.2113862460,"));
    }
}
