//! Variable-order (1 to 5) backward differentiation integrator with
//! numerical differentiation formula corrections, quasi-constant step size
//! and dense output. Works on complex state vectors with a holomorphic
//! right-hand side; Jacobians come from central differences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ORDER: usize = 5;
const NEWTON_MAXITER: usize = 4;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const KAPPA: [f64; 6] = [0.0, -0.1850, -1.0 / 9.0, -0.0823, -0.0415, 0.0];

type Vector = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdfOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
}

impl Default for BdfOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-11, max_step: f64::INFINITY, first_step: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BdfStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub jacobians: usize,
    pub factorizations: usize,
}

fn rms(v: &Vector, scale: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let s: f64 = v.iter().zip(scale).map(|(x, s)| (x.norm() / s).powi(2)).sum();
    (s / v.len() as f64).sqrt()
}

/// `R` matrix used to rescale the difference array when the step changes.
fn compute_r(order: usize, factor: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(order + 1, order + 1);
    for j in 0..=order {
        m[(0, j)] = 1.0;
    }
    for i in 1..=order {
        for j in 1..=order {
            m[(i, j)] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    // cumulative product down each column
    for i in 1..=order {
        for j in 0..=order {
            m[(i, j)] *= m[(i - 1, j)];
        }
    }
    m
}

fn change_d(d: &mut [Vector], order: usize, factor: f64) {
    let r = compute_r(order, factor);
    let u = compute_r(order, 1.0);
    let ru = r * u;
    let n = d[0].len();
    let old: Vec<Vector> = d[..=order].to_vec();
    for (k, slot) in d.iter_mut().enumerate().take(order + 1) {
        let mut acc = Vector::zeros(n);
        for (j, dj) in old.iter().enumerate() {
            let c = ru[(j, k)];
            if c != 0.0 {
                acc.axpy(Complex64::new(c, 0.0), dj, Complex64::new(1.0, 0.0));
            }
        }
        *slot = acc;
    }
}

/// Polynomial interpolant over the last accepted step.
#[derive(Debug, Clone)]
pub struct DenseOutput {
    t: f64,
    h: f64,
    order: usize,
    d: Vec<Vector>,
}

impl DenseOutput {
    pub fn eval(&self, t: f64) -> Vector {
        let mut y = self.d[0].clone();
        let mut p = 1.0;
        for k in 0..self.order {
            let shift = self.t - self.h * k as f64;
            p *= (t - shift) / (self.h * (k + 1) as f64);
            y.axpy(Complex64::new(p, 0.0), &self.d[k + 1], Complex64::new(1.0, 0.0));
        }
        y
    }
}

pub struct Bdf<F> {
    fun: F,
    pub t: f64,
    pub y: Vector,
    t_bound: f64,
    opts: BdfOptions,
    h_abs: f64,
    order: usize,
    n_equal_steps: usize,
    d: Vec<Vector>,
    jac: Option<DMatrix<Complex64>>,
    lu: Option<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>>,
    lu_c: f64,
    newton_tol: f64,
    gamma: [f64; MAX_ORDER + 1],
    alpha: [f64; MAX_ORDER + 1],
    error_const: [f64; MAX_ORDER + 1],
    pub stats: BdfStats,
}

impl<F> Bdf<F>
where
    F: FnMut(f64, &Vector) -> Result<Vector>,
{
    pub fn new(mut fun: F, t0: f64, y0: Vector, t_bound: f64, opts: BdfOptions) -> Result<Self> {
        let mut stats = BdfStats::default();
        let f0 = fun(t0, &y0)?;
        stats.rhs_evaluations += 1;
        let h_abs = match opts.first_step {
            Some(h) => h,
            None => {
                let h = Self::initial_step(&mut fun, t0, &y0, &f0, t_bound, &opts)?;
                stats.rhs_evaluations += 1;
                h
            }
        };
        let mut gamma = [0.0; MAX_ORDER + 1];
        for k in 1..=MAX_ORDER {
            gamma[k] = gamma[k - 1] + 1.0 / k as f64;
        }
        let mut alpha = [0.0; MAX_ORDER + 1];
        let mut error_const = [0.0; MAX_ORDER + 1];
        for k in 0..=MAX_ORDER {
            alpha[k] = (1.0 - KAPPA[k]) * gamma[k];
            error_const[k] = KAPPA[k] * gamma[k] + 1.0 / (k + 1) as f64;
        }
        let n = y0.len();
        let mut d = vec![Vector::zeros(n); MAX_ORDER + 3];
        d[0] = y0.clone();
        d[1] = f0 * Complex64::new(h_abs, 0.0);
        let newton_tol = (10.0 * f64::EPSILON / opts.rtol).max(opts.rtol.sqrt().min(0.03));
        Ok(Self {
            fun,
            t: t0,
            y: y0,
            t_bound,
            opts,
            h_abs,
            order: 1,
            n_equal_steps: 0,
            d,
            jac: None,
            lu: None,
            lu_c: 0.0,
            newton_tol,
            gamma,
            alpha,
            error_const,
            stats,
        })
    }

    fn initial_step(fun: &mut F, t0: f64, y0: &Vector, f0: &Vector, t_bound: f64, opts: &BdfOptions) -> Result<f64> {
        let interval = (t_bound - t0).abs();
        if y0.is_empty() || interval == 0.0 {
            return Ok(interval.max(1e-6));
        }
        let scale: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.norm()).collect();
        let d0 = rms(y0, &scale);
        let d1 = rms(f0, &scale);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(interval);
        let y1 = y0 + f0 * Complex64::new(h0, 0.0);
        let f1 = fun(t0 + h0, &y1)?;
        let d2 = rms(&(&f1 - f0), &scale) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).sqrt() };
        Ok((100.0 * h0).min(h1).min(interval).min(opts.max_step))
    }

    fn jacobian(&mut self, t: f64, y: &Vector) -> Result<DMatrix<Complex64>> {
        let n = y.len();
        let mut j = DMatrix::zeros(n, n);
        for k in 0..n {
            let delta = 1e-6 * y[k].norm().max(1.0);
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[k] += delta;
            ym[k] -= delta;
            let fp = (self.fun)(t, &yp)?;
            let fm = (self.fun)(t, &ym)?;
            let col = (fp - fm) / Complex64::new(2.0 * delta, 0.0);
            j.set_column(k, &col);
        }
        self.stats.rhs_evaluations += 2 * n;
        self.stats.jacobians += 1;
        Ok(j)
    }

    fn factorize(&mut self, c: f64) {
        let n = self.y.len();
        let j = self.jac.as_ref().expect("jacobian available");
        let m = DMatrix::<Complex64>::identity(n, n) - j * Complex64::new(c, 0.0);
        self.lu = Some(m.lu());
        self.lu_c = c;
        self.stats.factorizations += 1;
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_system(
        &mut self,
        t_new: f64,
        y_predict: &Vector,
        c: f64,
        psi: &Vector,
        scale: &[f64],
    ) -> Result<(bool, usize, Vector, Vector)> {
        let n = y_predict.len();
        let mut d = Vector::zeros(n);
        let mut y = y_predict.clone();
        let mut dy_norm_old: Option<f64> = None;
        let mut converged = false;
        let mut k = 0;
        while k < NEWTON_MAXITER {
            let f = (self.fun)(t_new, &y)?;
            self.stats.rhs_evaluations += 1;
            if f.iter().any(|x| !x.is_finite()) {
                break;
            }
            let rhs = f * Complex64::new(c, 0.0) - psi - &d;
            let dy = match self.lu.as_ref().and_then(|lu| lu.solve(&rhs)) {
                Some(v) => v,
                None => break,
            };
            let dy_norm = rms(&dy, scale);
            let rate = dy_norm_old.map(|old| dy_norm / old);
            if let Some(r) = rate {
                if r >= 1.0 || r.powi((NEWTON_MAXITER - k) as i32) / (1.0 - r) * dy_norm > self.newton_tol {
                    break;
                }
            }
            y += &dy;
            d += &dy;
            if dy_norm == 0.0 || rate.is_some_and(|r| r / (1.0 - r) * dy_norm < self.newton_tol) {
                converged = true;
                break;
            }
            dy_norm_old = Some(dy_norm);
            k += 1;
        }
        Ok((converged, k + 1, y, d))
    }

    /// Advances one accepted step and returns its interpolant.
    pub fn step(&mut self) -> Result<DenseOutput> {
        let t = self.t;
        let min_step = 10.0 * (next_up(t.abs()) - t.abs()).max(f64::MIN_POSITIVE);
        let mut h_abs = self.h_abs;
        if h_abs > self.opts.max_step {
            change_d(&mut self.d, self.order, self.opts.max_step / h_abs);
            h_abs = self.opts.max_step;
            self.n_equal_steps = 0;
        } else if h_abs < min_step {
            change_d(&mut self.d, self.order, min_step / h_abs);
            h_abs = min_step;
            self.n_equal_steps = 0;
        }
        let order = self.order;
        let mut current_jac = false;
        let (t_new, y_new, d_corr, error_norm, n_iter);
        loop {
            if h_abs < min_step {
                return Err(Error::StepFailure { time: t, step: h_abs });
            }
            let mut tn = t + h_abs;
            if tn > self.t_bound {
                tn = self.t_bound;
                change_d(&mut self.d, order, (tn - t).abs() / h_abs);
                self.n_equal_steps = 0;
                self.lu = None;
            }
            let h = tn - t;
            h_abs = h.abs();
            let n = self.y.len();
            let mut y_predict = Vector::zeros(n);
            for k in 0..=order {
                y_predict += &self.d[k];
            }
            let scale: Vec<f64> = y_predict.iter().map(|y| self.opts.atol + self.opts.rtol * y.norm()).collect();
            let mut psi = Vector::zeros(n);
            for k in 1..=order {
                psi.axpy(Complex64::new(self.gamma[k] / self.alpha[order], 0.0), &self.d[k], Complex64::new(1.0, 0.0));
            }
            let c = h / self.alpha[order];
            let mut result = None;
            loop {
                if self.jac.is_none() {
                    self.jac = Some(self.jacobian(tn, &y_predict)?);
                    current_jac = true;
                    self.lu = None;
                }
                if self.lu.is_none() || self.lu_c != c {
                    self.factorize(c);
                }
                let (conv, iters, y, d) = self.solve_system(tn, &y_predict, c, &psi, &scale)?;
                if conv {
                    result = Some((iters, y, d));
                    break;
                }
                if current_jac {
                    break;
                }
                self.jac = Some(self.jacobian(tn, &y_predict)?);
                current_jac = true;
                self.lu = None;
            }
            let Some((iters, y, d)) = result else {
                h_abs *= 0.5;
                change_d(&mut self.d, order, 0.5);
                self.n_equal_steps = 0;
                self.lu = None;
                self.stats.rejected += 1;
                continue;
            };
            let safety = 0.9 * (2 * NEWTON_MAXITER + 1) as f64 / (2 * NEWTON_MAXITER + iters) as f64;
            let scale: Vec<f64> = y.iter().map(|v| self.opts.atol + self.opts.rtol * v.norm()).collect();
            let err = rms(&(&d * Complex64::new(self.error_const[order], 0.0)), &scale);
            if err > 1.0 {
                let factor = MIN_FACTOR.max(safety * err.powf(-1.0 / (order as f64 + 1.0)));
                h_abs *= factor;
                change_d(&mut self.d, order, factor);
                self.n_equal_steps = 0;
                self.stats.rejected += 1;
                continue;
            }
            t_new = tn;
            y_new = y;
            d_corr = d;
            error_norm = err;
            n_iter = iters;
            break;
        }
        self.stats.steps += 1;
        self.n_equal_steps += 1;
        let t_old = self.t;
        self.t = t_new;
        self.y = y_new.clone();
        self.h_abs = h_abs;
        self.d[order + 2] = &d_corr - &self.d[order + 1];
        self.d[order + 1] = d_corr;
        for k in (0..=order).rev() {
            let next = self.d[k + 1].clone();
            self.d[k] += next;
        }
        let dense = DenseOutput { t: t_new, h: t_new - t_old, order, d: self.d[..=order].to_vec() };
        if self.n_equal_steps < order + 1 {
            return Ok(dense);
        }
        let scale: Vec<f64> = y_new.iter().map(|v| self.opts.atol + self.opts.rtol * v.norm()).collect();
        let em = if order > 1 {
            rms(&(&self.d[order] * Complex64::new(self.error_const[order - 1], 0.0)), &scale)
        } else {
            f64::INFINITY
        };
        let ep = if order < MAX_ORDER {
            rms(&(&self.d[order + 2] * Complex64::new(self.error_const[order + 1], 0.0)), &scale)
        } else {
            f64::INFINITY
        };
        let norms = [em, error_norm, ep];
        let factors: Vec<f64> =
            norms.iter().enumerate().map(|(k, e)| e.powf(-1.0 / (order + k) as f64)).collect();
        let (best, fmax) = factors
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let new_order = (order as isize + best as isize - 1) as usize;
        self.order = new_order;
        let safety = 0.9 * (2 * NEWTON_MAXITER + 1) as f64 / (2 * NEWTON_MAXITER + n_iter) as f64;
        let factor = MAX_FACTOR.min(safety * fmax);
        self.h_abs *= factor;
        change_d(&mut self.d, new_order, factor);
        self.n_equal_steps = 0;
        self.lu = None;
        Ok(dense)
    }

    pub fn finished(&self) -> bool {
        self.t >= self.t_bound
    }

    /// Current Jacobian is discarded, e.g. after an external state change.
    pub fn reset_jacobian(&mut self) {
        self.jac = None;
        self.lu = None;
    }
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// Integrates `y' = f(t, y)` and samples the solution at `times` (sorted,
/// starting at or after `t0`).
pub fn integrate_on_grid<F>(fun: F, t0: f64, y0: Vector, times: &[f64], opts: BdfOptions) -> Result<(Vec<Vector>, BdfStats)>
where
    F: FnMut(f64, &Vector) -> Result<Vector>,
{
    integrate_on_grid_with(fun, t0, y0, times, opts, |_, _| Ok(()))
}

/// As [`integrate_on_grid`], calling `check` after every accepted step.
pub fn integrate_on_grid_with<F, C>(
    fun: F,
    t0: f64,
    y0: Vector,
    times: &[f64],
    opts: BdfOptions,
    mut check: C,
) -> Result<(Vec<Vector>, BdfStats)>
where
    F: FnMut(f64, &Vector) -> Result<Vector>,
    C: FnMut(f64, &Vector) -> Result<()>,
{
    let t_end = times.last().copied().unwrap_or(t0);
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] <= t0 {
        out.push(y0.clone());
        next += 1;
    }
    if next == times.len() {
        return Ok((out, BdfStats::default()));
    }
    let mut solver = Bdf::new(fun, t0, y0, t_end, opts)?;
    while next < times.len() {
        let dense = solver.step()?;
        check(solver.t, &solver.y)?;
        while next < times.len() && times[next] <= solver.t {
            out.push(if times[next] == solver.t { solver.y.clone() } else { dense.eval(times[next]) });
            next += 1;
        }
        if solver.finished() && next < times.len() {
            return Err(Error::StepFailure { time: solver.t, step: 0.0 });
        }
    }
    Ok((out, solver.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn harmonic_phase() {
        // y' = i w y
        let w = 0.7;
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.5).collect();
        let f = |_t: f64, y: &Vector| Ok(y * c(0.0, w));
        let (ys, stats) = integrate_on_grid(f, 0.0, Vector::from_vec(vec![c(1.0, 0.0)]), &times, BdfOptions::default()).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = Complex64::from_polar(1.0, w * t);
            assert!((y[0] - exact).norm() < 1e-6, "t={t}: {} vs {exact}", y[0]);
        }
        assert!(stats.steps > 10);
    }

    #[test]
    fn stiff_linear_system() {
        // fast decay coupled to a slow one
        let f = |_t: f64, y: &Vector| Ok(Vector::from_vec(vec![-1000.0 * (y[0] - y[1]), -y[1]]));
        let times = [0.0, 1.0, 2.0];
        let (ys, stats) =
            integrate_on_grid(f, 0.0, Vector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]), &times, BdfOptions::default())
                .unwrap();
        let e2 = (-2.0f64).exp();
        assert!((ys[2][1].re - e2).abs() < 1e-7);
        assert!((ys[2][0].re - e2 * 1000.0 / 999.0).abs() < 1e-6);
        assert!(stats.steps < 2000);
    }

    #[test]
    fn nonlinear_riccati() {
        // y' = y^2, y(0)=1 -> 1/(1-t)
        let f = |_t: f64, y: &Vector| Ok(y.map(|v| v * v));
        let times = [0.0, 0.25, 0.5, 0.75];
        let (ys, _) = integrate_on_grid(f, 0.0, Vector::from_vec(vec![c(1.0, 0.0)]), &times, BdfOptions::default()).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0].re - 1.0 / (1.0 - t)).abs() < 1e-6 * (1.0 / (1.0 - t)));
        }
    }

    #[test]
    fn check_can_abort() {
        let f = |_t: f64, y: &Vector| Ok(y.clone());
        let times = [0.0, 100.0];
        let r = integrate_on_grid_with(f, 0.0, Vector::from_vec(vec![c(1.0, 0.0)]), &times, BdfOptions::default(), |t, y| {
            if y[0].norm() > 1e3 {
                Err(Error::Diverged { time: t, norm: y[0].norm() })
            } else {
                Ok(())
            }
        });
        assert!(matches!(r, Err(Error::Diverged { .. })));
    }
}
