//! Second-quantized Hamiltonians in a spin-orbital basis.
//!
//! Spin orbitals are interleaved: spatial orbital `p` maps to `2p` (up) and
//! `2p + 1` (down). Two-electron integrals are stored antisymmetrized,
//! `v2[[p, q, r, s]] = <pq||rs>`, so that
//! `H = sum h_pq a+_p a_q + 1/4 sum <pq||rs> a+_p a+_q a_s a_r + shift`.

use ndarray::{Array2, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hartree to electron-volt.
pub const HARTREE_TO_EV: f64 = 27.211386245988;

#[inline]
pub fn spin_of(p: usize) -> usize {
    p % 2
}

#[inline]
pub fn spatial_of(p: usize) -> usize {
    p / 2
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    h1: Array2<f64>,
    v2: Array4<f64>,
    scalar_shift: f64,
    n_electrons: usize,
    orbital_labels: Vec<String>,
}

impl Hamiltonian {
    pub fn new(
        h1: Array2<f64>,
        v2: Array4<f64>,
        scalar_shift: f64,
        n_electrons: usize,
        orbital_labels: Vec<String>,
    ) -> Result<Self> {
        let n = h1.nrows();
        if h1.ncols() != n || v2.shape() != [n, n, n, n] {
            return Err(Error::InvalidParameter(format!(
                "inconsistent integral shapes: h1 {:?}, v2 {:?}",
                h1.shape(),
                v2.shape()
            )));
        }
        if n > 64 {
            return Err(Error::InvalidParameter(format!("{n} spin orbitals exceeds the 64-orbital limit")));
        }
        if n_electrons > n {
            return Err(Error::InvalidParameter(format!("{n_electrons} electrons in {n} spin orbitals")));
        }
        if orbital_labels.len() != n {
            return Err(Error::InvalidParameter("one label per spin orbital required".into()));
        }
        if !scalar_shift.is_finite() || h1.iter().chain(v2.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Hamiltonian integrals".into()));
        }
        Ok(Self { h1, v2, scalar_shift, n_electrons, orbital_labels })
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.h1.nrows()
    }

    pub fn h1(&self) -> &Array2<f64> {
        &self.h1
    }

    pub fn v2(&self) -> &Array4<f64> {
        &self.v2
    }

    pub fn scalar_shift(&self) -> f64 {
        self.scalar_shift
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn orbital_labels(&self) -> &[String] {
        &self.orbital_labels
    }

    /// Energy of the determinant occupying `occupied`.
    pub fn determinant_energy(&self, occupied: &[usize]) -> f64 {
        let one: f64 = occupied.iter().map(|&i| self.h1[[i, i]]).sum();
        let mut two = 0.0;
        for &i in occupied {
            for &j in occupied {
                two += self.v2[[i, j, i, j]];
            }
        }
        one + 0.5 * two + self.scalar_shift
    }

    /// Lists every violated structural invariant (hermiticity, antisymmetry,
    /// spin conservation) with elementwise tolerance `tol`.
    pub fn invariant_violations(&self, tol: f64) -> Vec<String> {
        let n = self.n_spin_orbitals();
        let mut out = Vec::new();
        for p in 0..n {
            for q in 0..n {
                let x = self.h1[[p, q]];
                if (x - self.h1[[q, p]]).abs() > tol {
                    out.push(format!("h1[{p},{q}] not symmetric"));
                }
                if spin_of(p) != spin_of(q) && x.abs() > tol {
                    out.push(format!("h1[{p},{q}] couples opposite spins"));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let x = self.v2[[p, q, r, s]];
                        if (x + self.v2[[q, p, r, s]]).abs() > tol || (x + self.v2[[p, q, s, r]]).abs() > tol {
                            out.push(format!("v2[{p},{q},{r},{s}] not antisymmetric"));
                        }
                        if (x - self.v2[[r, s, p, q]]).abs() > tol {
                            out.push(format!("v2[{p},{q},{r},{s}] not hermitian"));
                        }
                        let conserving = (spin_of(p) == spin_of(r) && spin_of(q) == spin_of(s))
                            || (spin_of(p) == spin_of(s) && spin_of(q) == spin_of(r));
                        if !conserving && x.abs() > tol {
                            out.push(format!("v2[{p},{q},{r},{s}] breaks spin conservation"));
                        }
                    }
                }
            }
        }
        out
    }

    /// Builds a spin-orbital Hamiltonian from spatial integrals: `h[p][q]`
    /// and chemists'-notation `(pq|rs)` given by `eri`.
    pub fn from_spatial(
        h: &Array2<f64>,
        eri: &Array4<f64>,
        scalar_shift: f64,
        n_electrons: usize,
        spatial_labels: &[String],
    ) -> Result<Self> {
        let m = h.nrows();
        let n = 2 * m;
        let mut h1 = Array2::zeros((n, n));
        let mut v2 = Array4::zeros((n, n, n, n));
        for p in 0..n {
            for q in 0..n {
                if spin_of(p) == spin_of(q) {
                    h1[[p, q]] = h[[spatial_of(p), spatial_of(q)]];
                }
            }
        }
        // <pq|rs> = (pr|qs) with spin deltas
        let coulomb = |p: usize, q: usize, r: usize, s: usize| -> f64 {
            if spin_of(p) == spin_of(r) && spin_of(q) == spin_of(s) {
                eri[[spatial_of(p), spatial_of(r), spatial_of(q), spatial_of(s)]]
            } else {
                0.0
            }
        };
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        v2[[p, q, r, s]] = coulomb(p, q, r, s) - coulomb(p, q, s, r);
                    }
                }
            }
        }
        let labels = (0..n)
            .map(|p| {
                let base = spatial_labels.get(spatial_of(p)).cloned().unwrap_or_else(|| format!("{}", spatial_of(p)));
                format!("{base}{}", if spin_of(p) == 0 { "_up" } else { "_dn" })
            })
            .collect();
        Self::new(h1, v2, scalar_shift, n_electrons, labels)
    }

    /// Recovers spatial integrals `(h, (pq|rs))`. Only meaningful for
    /// spin-restricted Hamiltonians.
    pub fn spatial_integrals(&self) -> (Array2<f64>, Array4<f64>) {
        let m = self.n_spin_orbitals() / 2;
        let mut h = Array2::zeros((m, m));
        let mut eri = Array4::zeros((m, m, m, m));
        for p in 0..m {
            for q in 0..m {
                h[[p, q]] = self.h1[[2 * p, 2 * q]];
                for r in 0..m {
                    for s in 0..m {
                        // <p_up r_dn || q_up s_dn> = (pq|rs)
                        eri[[p, q, r, s]] = self.v2[[2 * p, 2 * r + 1, 2 * q, 2 * s + 1]];
                    }
                }
            }
        }
        (h, eri)
    }
}

/// Single-impurity Anderson model parameters (hartree).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiamParams {
    pub eps_impurity: f64,
    pub bath_energies: Vec<f64>,
    pub hybridization: f64,
    pub onsite_u: f64,
}

impl SiamParams {
    pub fn validate(&self) -> Result<()> {
        if self.bath_energies.is_empty() {
            return Err(Error::InvalidParameter("SIAM needs at least one bath level".into()));
        }
        let all = [self.eps_impurity, self.hybridization, self.onsite_u];
        if all.iter().chain(self.bath_energies.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("SIAM parameters must be finite".into()));
        }
        if self.hybridization < 0.0 {
            return Err(Error::InvalidParameter("hybridization must be non-negative".into()));
        }
        Ok(())
    }

    /// Number of electrons filled by aufbau on the one-body diagonal: every
    /// level at or below the Fermi level (zero) is doubly occupied.
    pub fn aufbau_electrons(&self) -> usize {
        let below = |e: f64| usize::from(e < 0.0);
        2 * (below(self.eps_impurity) + self.bath_energies.iter().map(|&e| below(e)).sum::<usize>())
    }
}

/// Builds the SIAM Hamiltonian. Spatial orbital 0 is the impurity, baths
/// follow in the given order. The electron count is the aufbau filling of
/// the negative one-body levels.
pub fn build_siam(params: &SiamParams) -> Result<Hamiltonian> {
    params.validate()?;
    let m = 1 + params.bath_energies.len();
    let mut h = Array2::zeros((m, m));
    h[[0, 0]] = params.eps_impurity;
    for (k, &e) in params.bath_energies.iter().enumerate() {
        h[[k + 1, k + 1]] = e;
        h[[0, k + 1]] = params.hybridization;
        h[[k + 1, 0]] = params.hybridization;
    }
    let mut eri = Array4::zeros((m, m, m, m));
    eri[[0, 0, 0, 0]] = params.onsite_u;
    let labels: Vec<String> = std::iter::once("imp".to_string())
        .chain((0..params.bath_energies.len()).map(|k| format!("bath{k}")))
        .collect();
    Hamiltonian::from_spatial(&h, &eri, 0.0, params.aufbau_electrons(), &labels)
}

/// Occupied/virtual split of the N-electron reference determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferencePartition {
    pub occupied: Vec<usize>,
    pub virtual_: Vec<usize>,
    pub core_index: usize,
}

impl ReferencePartition {
    /// The (N-1)-electron partition: `core_index` moves from the occupied to
    /// the virtual set.
    pub fn ionized(&self) -> ReferencePartition {
        let occupied = self.occupied.iter().copied().filter(|&i| i != self.core_index).collect();
        let mut virtual_ = self.virtual_.clone();
        virtual_.push(self.core_index);
        virtual_.sort_unstable();
        ReferencePartition { occupied, virtual_, core_index: self.core_index }
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.occupied.len() + self.virtual_.len()
    }

    /// Smallest virtual minus largest occupied one-body diagonal.
    pub fn diagonal_gap(&self, h: &Hamiltonian) -> f64 {
        let d = |p: usize| h.h1()[[p, p]];
        let homo = self.occupied.iter().map(|&i| d(i)).fold(f64::NEG_INFINITY, f64::max);
        let lumo = self.virtual_.iter().map(|&a| d(a)).fold(f64::INFINITY, f64::min);
        lumo - homo
    }
}

/// Occupies the `n_electrons` spin orbitals of lowest one-body diagonal
/// (ties broken by index) and checks that `core_index` is among them.
pub fn partition_reference(h: &Hamiltonian, core_index: usize) -> Result<ReferencePartition> {
    let n = h.n_spin_orbitals();
    if core_index >= n {
        return Err(Error::IndexOutOfRange { index: core_index, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| h.h1()[[a, a]].total_cmp(&h.h1()[[b, b]]).then(a.cmp(&b)));
    let mut occupied = order[..h.n_electrons()].to_vec();
    let mut virtual_ = order[h.n_electrons()..].to_vec();
    occupied.sort_unstable();
    virtual_.sort_unstable();
    if !occupied.contains(&core_index) {
        return Err(Error::CoreUnoccupied(core_index));
    }
    Ok(ReferencePartition { occupied, virtual_, core_index })
}
