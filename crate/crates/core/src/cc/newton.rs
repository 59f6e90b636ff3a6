//! Newton iterations on packed amplitude equations with Jacobians from
//! complex-step differentiation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::amplitudes::ClusterAmplitudes;
use super::blocks::Blocks;
use super::residual::{energy, residual};

const STEP: f64 = 1e-20;

fn packed_residual(b: &Blocks<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let t = ClusterAmplitudes::unpack(x, b.n_occupied(), b.n_virtual());
    residual(b, &t).pack()
}

pub fn residual_real(b: &Blocks<Complex64>, x: &[f64]) -> Vec<f64> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    packed_residual(b, &xc).iter().map(|c| c.re).collect()
}

/// `d r / d x` at real `x`, exact to rounding.
pub fn jacobian(b: &Blocks<Complex64>, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            xc[m].im = STEP;
            packed_residual(b, &xc).iter().map(|c| c.im / STEP).collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `d E / d x` at real `x`.
pub fn energy_gradient(b: &Blocks<Complex64>, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|m| {
            let mut xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            xc[m].im = STEP;
            let t = ClusterAmplitudes::unpack(&xc, b.n_occupied(), b.n_virtual());
            energy(b, &t).im / STEP
        })
        .collect()
}

/// Solves `a x = rhs`, falling back to a least-squares SVD solve when LU
/// reports a singular matrix.
pub fn solve_dense(a: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    if let Some(x) = a.clone().lu().solve(&rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let svd = a.svd(true, true);
    let x = svd.solve(&rhs, 1e-13).ok()?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iteration from `x0`. Returns the solution, iteration count and
/// final residual norm, or `None` if `max_iter` is exhausted.
pub fn newton(b: &Blocks<Complex64>, x0: &[f64], tol: f64, max_iter: usize) -> (Option<Vec<f64>>, usize, f64) {
    let mut x = x0.to_vec();
    let mut rn = f64::INFINITY;
    for it in 0..=max_iter {
        let r = residual_real(b, &x);
        rn = norm(&r);
        if !rn.is_finite() {
            return (None, it, rn);
        }
        if rn < tol {
            return (Some(x), it, rn);
        }
        if it == max_iter {
            break;
        }
        let j = jacobian(b, &x);
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        match solve_dense(j, rhs) {
            Some(dx) => x.iter_mut().zip(dx.iter()).for_each(|(xi, d)| *xi += d),
            None => return (None, it, rn),
        }
    }
    (None, max_iter, rn)
}
