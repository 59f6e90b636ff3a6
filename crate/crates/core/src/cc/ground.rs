//! Ground-state CCSD.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::amplitudes::ClusterAmplitudes;
use super::blocks::Blocks;
use super::newton::{newton, norm};
use super::residual::{energy, residual};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ReferencePartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CcsdStrategy {
    /// Jacobi updates with one-body-diagonal denominators and DIIS.
    Diis,
    /// Newton continuation in the two-electron coupling from the one-body
    /// limit, which follows the root connected to the reference.
    #[default]
    Continuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcsdOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub diis_size: usize,
    pub strategy: CcsdStrategy,
}

impl Default for CcsdOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 500, diis_size: 8, strategy: CcsdStrategy::Continuation }
    }
}

#[derive(Debug, Clone)]
pub struct CcsdSolution {
    pub energy: f64,
    pub t: ClusterAmplitudes<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

pub fn solve_ccsd(h: &Hamiltonian, part: &ReferencePartition) -> Result<CcsdSolution> {
    solve_ccsd_with(h, part, &CcsdOptions::default())
}

pub fn solve_ccsd_with(h: &Hamiltonian, part: &ReferencePartition, opts: &CcsdOptions) -> Result<CcsdSolution> {
    let gap = part.diagonal_gap(h);
    if !part.occupied.is_empty() && !part.virtual_.is_empty() && gap <= 1e-8 {
        return Err(Error::DegenerateReference(gap));
    }
    let (no, nv) = (part.occupied.len(), part.virtual_.len());
    let real = Blocks::<f64>::new(h, &part.occupied, &part.virtual_);
    let (x, iterations) = match opts.strategy {
        CcsdStrategy::Diis => diis(h, part, opts)?,
        CcsdStrategy::Continuation => continuation(h, part, opts)?,
    };
    let t = ClusterAmplitudes::unpack(&x, no, nv);
    let residual_norm = residual(&real, &t).norm();
    if !(residual_norm < opts.tolerance.max(1e-9)) {
        return Err(Error::NotConverged { what: "CCSD", iterations, residual: residual_norm });
    }
    Ok(CcsdSolution { energy: energy(&real, &t), t, residual_norm, iterations })
}

fn diis(h: &Hamiltonian, part: &ReferencePartition, opts: &CcsdOptions) -> Result<(Vec<f64>, usize)> {
    let b = Blocks::<f64>::new(h, &part.occupied, &part.virtual_);
    let (no, nv) = (b.n_occupied(), b.n_virtual());
    let d = |p: usize| h.h1()[[p, p]];
    let mut denom1 = vec![0.0; no * nv];
    for i in 0..no {
        for a in 0..nv {
            denom1[i * nv + a] = d(part.occupied[i]) - d(part.virtual_[a]);
        }
    }
    let mut denom = denom1.clone();
    for i in 0..no {
        for j in i + 1..no {
            for a in 0..nv {
                for c in a + 1..nv {
                    denom.push(
                        d(part.occupied[i]) + d(part.occupied[j]) - d(part.virtual_[a]) - d(part.virtual_[c]),
                    );
                }
            }
        }
    }
    let mut x = vec![0.0; denom.len()];
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut rn = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let r = residual(&b, &ClusterAmplitudes::unpack(&x, no, nv)).pack();
        rn = norm(&r);
        if !rn.is_finite() {
            break;
        }
        if rn < opts.tolerance {
            return Ok((x, it));
        }
        let step: Vec<f64> = r.iter().zip(&denom).map(|(r, d)| r / d).collect();
        x.iter_mut().zip(&step).for_each(|(xi, s)| *xi += s);
        history.push((x.clone(), step));
        if history.len() > opts.diis_size {
            history.remove(0);
        }
        if history.len() >= 3 {
            if let Some(extrap) = diis_extrapolate(&history) {
                x = extrap;
            }
        }
    }
    Err(Error::NotConverged { what: "CCSD", iterations: opts.max_iterations, residual: rn })
}

fn diis_extrapolate(history: &[(Vec<f64>, Vec<f64>)]) -> Option<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let m = history.len();
    let mut bm = DMatrix::from_element(m + 1, m + 1, -1.0);
    bm[(m, m)] = 0.0;
    for a in 0..m {
        for c in 0..m {
            bm[(a, c)] = history[a].1.iter().zip(&history[c].1).map(|(u, v)| u * v).sum();
        }
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -1.0;
    let coef = bm.lu().solve(&rhs)?;
    if coef.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let n = history[0].0.len();
    let mut out = vec![0.0; n];
    for (k, (x, _)) in history.iter().enumerate() {
        out.iter_mut().zip(x).for_each(|(o, xi)| *o += coef[k] * xi);
    }
    Some(out)
}

fn continuation(h: &Hamiltonian, part: &ReferencePartition, opts: &CcsdOptions) -> Result<(Vec<f64>, usize)> {
    let (no, nv) = (part.occupied.len(), part.virtual_.len());
    let blocks = |lambda: f64| Blocks::<Complex64>::scaled(h, &part.occupied, &part.virtual_, lambda);
    let n = ClusterAmplitudes::<f64>::packed_len(no, nv);
    let inner_tol = opts.tolerance.min(1e-10);
    let mut total = 0;
    let (start, it, rn) = newton(&blocks(0.0), &vec![0.0; n], inner_tol, 50);
    total += it;
    let mut x = start.ok_or(Error::NotConverged { what: "CCSD one-body limit", iterations: it, residual: rn })?;
    let mut lambda: f64 = 0.0;
    let mut step: f64 = 0.1;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    while lambda < 1.0 {
        let target = (lambda + step).min(1.0);
        let pred: Vec<f64> = match &prev {
            Some((lp, xp)) => x.iter().zip(xp).map(|(xi, pi)| xi + (xi - pi) * (target - lambda) / (lambda - lp)).collect(),
            None => x.clone(),
        };
        let (sol, it, _) = newton(&blocks(target), &pred, inner_tol, 8);
        total += it;
        let accepted = sol.filter(|y| match &prev {
            // the corrector must stay close to the secant prediction
            Some(_) => {
                let moved: f64 = norm(&y.iter().zip(&pred).map(|(a, b)| a - b).collect::<Vec<_>>());
                let predicted: f64 = norm(&pred.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
                moved < 0.05 * predicted.max(1e-3) + 1e-3
            }
            None => true,
        });
        match accepted {
            Some(y) => {
                prev = Some((lambda, std::mem::replace(&mut x, y)));
                lambda = target;
                step = (step * 1.5).min(0.2);
            }
            None => {
                step *= 0.5;
                if step < 1e-6 {
                    let r = super::newton::residual_real(&blocks(lambda), &x);
                    return Err(Error::NotConverged { what: "CCSD continuation", iterations: total, residual: norm(&r) });
                }
            }
        }
        if total > opts.max_iterations * 10 {
            break;
        }
    }
    if lambda < 1.0 {
        return Err(Error::NotConverged { what: "CCSD continuation", iterations: total, residual: f64::NAN });
    }
    Ok((x, total))
}
