//! Occupation-number determinants and fermionic operator strings.
//!
//! A determinant is a bitmask over spin orbitals. The state is
//! `a+_{p1} a+_{p2} ... a+_{pk} |vac>` with `p1 < p2 < ... < pk`, i.e. creators
//! are applied to the vacuum in descending index order. Acting with `a_p` or
//! `a+_p` then picks up `(-1)^(number of occupied orbitals below p)`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

pub type Det = u64;

#[inline]
fn parity_below(det: Det, p: usize) -> f64 {
    let mask = (1u64 << p) - 1;
    if (det & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn annihilate(det: Det, p: usize) -> Option<(f64, Det)> {
    if det >> p & 1 == 0 {
        return None;
    }
    Some((parity_below(det, p), det ^ (1 << p)))
}

#[inline]
pub fn create(det: Det, p: usize) -> Option<(f64, Det)> {
    if det >> p & 1 == 1 {
        return None;
    }
    Some((parity_below(det, p), det | (1 << p)))
}

pub fn occupied_orbitals(det: Det) -> impl Iterator<Item = usize> {
    let mut bits = det;
    std::iter::from_fn(move || {
        if bits == 0 {
            None
        } else {
            let p = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(p)
        }
    })
}

pub fn det_from_orbitals(orbitals: &[usize]) -> Det {
    orbitals.iter().fold(0, |d, &p| d | (1 << p))
}

/// One factor of an operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Create(usize),
    Annihilate(usize),
}

/// Applies an operator string, written left to right as in the algebra,
/// to a determinant. The rightmost operator acts first.
pub fn apply_string(ops: &[Op], det: Det) -> Option<(f64, Det)> {
    let mut sign = 1.0;
    let mut d = det;
    for op in ops.iter().rev() {
        let (s, next) = match *op {
            Op::Create(p) => create(d, p)?,
            Op::Annihilate(p) => annihilate(d, p)?,
        };
        sign *= s;
        d = next;
    }
    Some((sign, d))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All determinants with a fixed particle number, in increasing bitmask order.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_orbitals: usize,
    n_electrons: usize,
    dets: Vec<Det>,
    index: HashMap<Det, usize>,
}

impl SectorBasis {
    pub fn dimension_of(n_orbitals: usize, n_electrons: usize) -> usize {
        binomial(n_orbitals, n_electrons)
    }

    pub fn new(n_orbitals: usize, n_electrons: usize) -> Self {
        let mut dets = Vec::with_capacity(binomial(n_orbitals, n_electrons));
        if n_electrons <= n_orbitals {
            if n_electrons == 0 {
                dets.push(0);
            } else {
                // Gosper's hack enumerates k-subsets in increasing order
                let mut d: Det = (1u64 << n_electrons) - 1;
                let limit: u128 = 1u128 << n_orbitals;
                while (d as u128) < limit {
                    dets.push(d);
                    let c = d & d.wrapping_neg();
                    let r = d + c;
                    if r == 0 {
                        break;
                    }
                    d = (((r ^ d) >> 2) / c) | r;
                }
            }
        }
        let index = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        Self { n_orbitals, n_electrons, dets, index }
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn dets(&self) -> &[Det] {
        &self.dets
    }

    pub fn index_of(&self, det: Det) -> Option<usize> {
        self.index.get(&det).copied()
    }

    /// Applies `coeff * ops` to `input` (in `self`) and accumulates into
    /// `output` (in `target`).
    pub fn apply_into(
        &self,
        target: &SectorBasis,
        ops: &[Op],
        coeff: Complex64,
        input: &[Complex64],
        output: &mut [Complex64],
    ) {
        for (j, &d) in self.dets.iter().enumerate() {
            let x = input[j];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            if let Some((s, dd)) = apply_string(ops, d) {
                if let Some(i) = target.index_of(dd) {
                    output[i] += coeff * s * x;
                }
            }
        }
    }
}

/// Dense matrix of a Hamiltonian restricted to one particle-number sector.
pub fn sector_hamiltonian(h: &Hamiltonian, basis: &SectorBasis) -> DMatrix<f64> {
    let n = h.n_spin_orbitals();
    let dim = basis.len();
    let h1 = h.h1();
    let v2 = h.v2();
    let mut m = DMatrix::zeros(dim, dim);
    for (j, &d) in basis.dets().iter().enumerate() {
        m[(j, j)] += h.scalar_shift();
        let occ: Vec<usize> = occupied_orbitals(d).collect();
        // one-body: a+_p a_q
        for &q in &occ {
            let (s1, d1) = annihilate(d, q).unwrap();
            for p in 0..n {
                let x = h1[[p, q]];
                if x == 0.0 {
                    continue;
                }
                if let Some((s2, d2)) = create(d1, p) {
                    let i = basis.index_of(d2).unwrap();
                    m[(i, j)] += x * s1 * s2;
                }
            }
        }
        // two-body: sum_{p<q, r<s} <pq||rs> a+_p a+_q a_s a_r
        for (ir, &r) in occ.iter().enumerate() {
            for &s in &occ[ir + 1..] {
                let (sa, da) = annihilate(d, r).unwrap();
                let (sb, db) = annihilate(da, s).unwrap();
                for q in 0..n {
                    if db >> q & 1 == 1 {
                        continue;
                    }
                    for p in 0..q {
                        if db >> p & 1 == 1 {
                            continue;
                        }
                        let x = v2[[p, q, r, s]];
                        if x == 0.0 {
                            continue;
                        }
                        let (sc, dc) = create(db, q).unwrap();
                        let (sd, dd) = create(dc, p).unwrap();
                        let i = basis.index_of(dd).unwrap();
                        m[(i, j)] += x * sa * sb * sc * sd;
                    }
                }
            }
        }
    }
    m
}

/// Builds the sector basis, enforcing the dimension cap.
pub fn checked_sector(n_orbitals: usize, n_electrons: usize, cap: usize) -> Result<SectorBasis> {
    let dim = SectorBasis::dimension_of(n_orbitals, n_electrons);
    if dim > cap {
        return Err(Error::SectorTooLarge { dim, cap });
    }
    Ok(SectorBasis::new(n_orbitals, n_electrons))
}
