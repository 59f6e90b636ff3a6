//! Dense operator algebra on the full Fock space of a few spin orbitals.
//!
//! Used to cross-check closed-form cluster expressions against explicit
//! products of second-quantized operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cc::{ClusterAmplitudes, Scalar};
use crate::error::{Error, Result};
use crate::fock::{apply_string, Det, Op};
use crate::hamiltonian::Hamiltonian;

pub const MAX_ORBITALS: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct FockSpace {
    n: usize,
}

impl FockSpace {
    pub fn new(n_orbitals: usize) -> Result<Self> {
        if n_orbitals > MAX_ORBITALS {
            return Err(Error::SectorTooLarge { dim: 1 << n_orbitals, cap: 1 << MAX_ORBITALS });
        }
        Ok(Self { n: n_orbitals })
    }

    pub fn n_orbitals(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn basis_vector(&self, det: Det) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim());
        v[det as usize] = Complex64::new(1.0, 0.0);
        v
    }

    fn add_string(&self, m: &mut DMatrix<Complex64>, coef: Complex64, ops: &[Op]) {
        if coef == Complex64::new(0.0, 0.0) {
            return;
        }
        for d in 0..self.dim() as Det {
            if let Some((s, out)) = apply_string(ops, d) {
                m[(out as usize, d as usize)] += coef * s;
            }
        }
    }

    pub fn string(&self, ops: &[Op]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        self.add_string(&mut m, Complex64::new(1.0, 0.0), ops);
        m
    }

    /// `sum t_i^a a+_a a_i + 1/4 sum t_ij^ab a+_a a+_b a_j a_i`.
    pub fn excitation<S: Scalar>(&self, amps: &ClusterAmplitudes<S>, occ: &[usize], vir: &[usize]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, &p) in occ.iter().enumerate() {
            for (a, &q) in vir.iter().enumerate() {
                self.add_string(&mut m, amps.t1[[i, a]].to_complex(), &[Op::Create(q), Op::Annihilate(p)]);
                for (j, &r) in occ.iter().enumerate() {
                    for (b, &u) in vir.iter().enumerate() {
                        let c = 0.25 * amps.t2[[i, j, a, b]].to_complex();
                        self.add_string(&mut m, c, &[Op::Create(q), Op::Create(u), Op::Annihilate(r), Op::Annihilate(p)]);
                    }
                }
            }
        }
        m
    }

    /// `sum l_i^a a+_i a_a + 1/4 sum l_ij^ab a+_i a+_j a_b a_a`.
    pub fn deexcitation<S: Scalar>(&self, amps: &ClusterAmplitudes<S>, occ: &[usize], vir: &[usize]) -> DMatrix<Complex64> {
        self.excitation(amps, occ, vir).transpose()
    }

    pub fn hamiltonian(&self, h: &Hamiltonian) -> DMatrix<Complex64> {
        let n = h.n_spin_orbitals();
        let mut m = DMatrix::identity(self.dim(), self.dim()) * Complex64::new(h.scalar_shift(), 0.0);
        for p in 0..n {
            for q in 0..n {
                self.add_string(&mut m, Complex64::new(h.h1()[[p, q]], 0.0), &[Op::Create(p), Op::Annihilate(q)]);
                for r in 0..n {
                    for s in 0..n {
                        let v = 0.25 * h.v2()[[p, q, r, s]];
                        self.add_string(
                            &mut m,
                            Complex64::new(v, 0.0),
                            &[Op::Create(p), Op::Create(q), Op::Annihilate(s), Op::Annihilate(r)],
                        );
                    }
                }
            }
        }
        m
    }

    /// Coefficients `<E_mu ref|v>` of the singles and doubles of `ref`, as
    /// antisymmetric amplitude tensors.
    pub fn amplitudes_of(&self, v: &DVector<Complex64>, reference: Det, occ: &[usize], vir: &[usize]) -> ClusterAmplitudes<Complex64> {
        let mut out = ClusterAmplitudes::zeros(occ.len(), vir.len());
        let coef = |ops: &[Op]| apply_string(ops, reference).map(|(s, d)| s * v[d as usize]).unwrap_or_default();
        for (i, &p) in occ.iter().enumerate() {
            for (a, &q) in vir.iter().enumerate() {
                out.t1[[i, a]] = coef(&[Op::Create(q), Op::Annihilate(p)]);
                for (j, &r) in occ.iter().enumerate() {
                    for (b, &u) in vir.iter().enumerate() {
                        out.t2[[i, j, a, b]] = coef(&[Op::Create(q), Op::Create(u), Op::Annihilate(r), Op::Annihilate(p)]);
                    }
                }
            }
        }
        out
    }
}

/// `exp(m)` by Taylor series; exact for nilpotent excitation operators.
pub fn exp_nilpotent(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut out = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=n.max(1) {
        term = &term * m / Complex64::new(k as f64, 0.0);
        if term.iter().all(|z| z.norm() == 0.0) {
            break;
        }
        out += &term;
    }
    out
}
