//! Uniform time grids and complex Green's function samples.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `n` points `0, dt, 2 dt, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("time grid needs at least one point".into()));
        }
        Ok(Self { dt, n })
    }

    /// Grid from 0 to `t_max` inclusive (rounded to the nearest whole step).
    pub fn span(dt: f64, t_max: f64) -> Result<Self> {
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be non-negative, got {t_max}")));
        }
        let steps = (t_max / dt).round();
        if !steps.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        Self::new(dt, steps as usize + 1)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    pub fn check_same(&self, other: &TimeGrid) -> Result<()> {
        if self.n != other.n || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!(
                "time grids differ: ({}, {}) vs ({}, {})",
                self.dt, self.n, other.dt, other.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensTrajectory {
    pub grid: TimeGrid,
    pub g: Vec<Complex64>,
    pub method_tag: String,
    /// Time-dependent (N-1) energy, when the method provides one.
    pub energy: Option<Vec<Complex64>>,
}

impl GreensTrajectory {
    pub fn new(grid: TimeGrid, g: Vec<Complex64>, method_tag: impl Into<String>) -> Self {
        assert_eq!(grid.len(), g.len());
        Self { grid, g, method_tag: method_tag.into(), energy: None }
    }

    pub fn with_energy(mut self, energy: Vec<Complex64>) -> Self {
        assert_eq!(energy.len(), self.g.len());
        self.energy = Some(energy);
        self
    }

    /// Writes `t, Re G, Im G, Re E_Nm1, Im E_Nm1`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re_g,im_g,re_e_nm1,im_e_nm1")?;
        for k in 0..self.g.len() {
            let e = self.energy.as_ref().map(|e| e[k]).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            writeln!(
                w,
                "{:.10},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid.time(k),
                self.g[k].re,
                self.g[k].im,
                e.re,
                e.im
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, method_tag: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut g = Vec::new();
        let mut energy = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::GridMismatch(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 5 {
                return Err(Error::GridMismatch(format!("line {}: expected 5 columns", lineno + 1)));
            }
            times.push(cols[0]);
            g.push(Complex64::new(cols[1], cols[2]));
            energy.push(Complex64::new(cols[3], cols[4]));
        }
        if times.len() < 2 {
            return Err(Error::GridMismatch("need at least two samples".into()));
        }
        let dt = times[1] - times[0];
        let grid = TimeGrid::new(dt, times.len())?;
        for (k, &t) in times.iter().enumerate() {
            if (t - grid.time(k)).abs() > 1e-8 * (1.0 + t.abs()) {
                return Err(Error::GridMismatch(format!("non-uniform time at row {k}")));
            }
        }
        let traj = Self::new(grid, g, method_tag);
        if energy.iter().all(|e| e.re.is_nan()) {
            Ok(traj)
        } else {
            Ok(traj.with_energy(energy))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_includes_endpoint() {
        let g = TimeGrid::span(0.1, 900.0).unwrap();
        assert_eq!(g.len(), 9001);
        assert!((g.t_max() - 900.0).abs() < 1e-9);
        assert!(TimeGrid::span(0.0, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let grid = TimeGrid::new(0.5, 4).unwrap();
        let g: Vec<_> = (0..4).map(|k| Complex64::new(k as f64 * 0.1, -1.0 / (k as f64 + 1.0))).collect();
        let e: Vec<_> = (0..4).map(|k| Complex64::new(-2.0, k as f64)).collect();
        let t = GreensTrajectory::new(grid, g, "x").with_energy(e);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = GreensTrajectory::read_csv(&buf[..], "x").unwrap();
        assert_eq!(back, t);
    }
}
