//! Ground-state de-excitation amplitudes.
//!
//! The Lagrangian `E(T) + sum_mu l_mu R_mu(T)` is stationary in `T` when
//! `J^T l = -dE/dT`, with `J` the amplitude-equation Jacobian. Both are
//! differentiated exactly, so the linear equations are the full CCSD
//! left-hand equations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::amplitudes::{ClusterAmplitudes, LambdaAmplitudes};
use super::blocks::Blocks;
use super::newton::{energy_gradient, jacobian, solve_dense};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ReferencePartition};

#[derive(Debug, Clone)]
pub struct LambdaSolution {
    pub lambda: LambdaAmplitudes,
    pub residual_norm: f64,
}

/// Residual of the left-hand equations, `J^T l + dE/dT`.
pub fn lambda_residual(h: &Hamiltonian, part: &ReferencePartition, t: &ClusterAmplitudes<f64>, l: &LambdaAmplitudes) -> Vec<f64> {
    let b = Blocks::<Complex64>::new(h, &part.occupied, &part.virtual_);
    let x = t.pack();
    let j = jacobian(&b, &x);
    let g = DVector::from_vec(energy_gradient(&b, &x));
    let lv = DVector::from_vec(l.pack());
    (j.transpose() * lv + g).iter().copied().collect()
}

pub fn solve_lambda(h: &Hamiltonian, part: &ReferencePartition, t: &ClusterAmplitudes<f64>) -> Result<LambdaSolution> {
    let b = Blocks::<Complex64>::new(h, &part.occupied, &part.virtual_);
    let (no, nv) = (part.occupied.len(), part.virtual_.len());
    let x = t.pack();
    if x.is_empty() {
        return Ok(LambdaSolution { lambda: LambdaAmplitudes::zeros(no, nv), residual_norm: 0.0 });
    }
    let j: DMatrix<f64> = jacobian(&b, &x);
    let g = DVector::from_vec(energy_gradient(&b, &x));
    let jt = j.transpose();
    let l = solve_dense(jt.clone(), -g.clone()).ok_or_else(|| Error::Singular("CCSD Jacobian".into()))?;
    let residual_norm = (jt * &l + g).norm();
    if !(residual_norm < 1e-9) {
        return Err(Error::NotConverged { what: "lambda equations", iterations: 1, residual: residual_norm });
    }
    let lambda = ClusterAmplitudes::unpack(l.as_slice(), no, nv);
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda amplitudes".into()));
    }
    Ok(LambdaSolution { lambda, residual_norm })
}
