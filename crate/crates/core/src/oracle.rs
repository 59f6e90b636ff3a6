//! Full configuration interaction in fixed particle-number sectors and the
//! exact retarded core-hole Green's function.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{annihilate, checked_sector, sector_hamiltonian, SectorBasis};
use crate::greens::{GreensTrajectory, TimeGrid};
use crate::hamiltonian::Hamiltonian;

pub const DEFAULT_SECTOR_CAP: usize = 200_000;

/// Largest sector handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 6_000;

#[derive(Debug, Clone)]
pub struct CiVector {
    pub basis: SectorBasis,
    pub coefficients: Vec<Complex64>,
}

impl CiVector {
    pub fn sector(&self) -> usize {
        self.basis.n_electrons()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &CiVector) -> Complex64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a.conj() * b).sum()
    }

    /// `a_p |self>` in the (n-1) sector.
    pub fn annihilate(&self, p: usize) -> CiVector {
        let target = SectorBasis::new(self.basis.n_orbitals(), self.basis.n_electrons() - 1);
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        for (j, &d) in self.basis.dets().iter().enumerate() {
            if let Some((s, dd)) = annihilate(d, p) {
                out[target.index_of(dd).unwrap()] += s * self.coefficients[j];
            }
        }
        CiVector { basis: target, coefficients: out }
    }
}

/// Eigen-decomposition of one sector.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub basis: SectorBasis,
    pub matrix: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SectorSpectrum {
    pub fn compute(h: &Hamiltonian, n_electrons: usize, cap: usize) -> Result<Self> {
        let basis = checked_sector(h.n_spin_orbitals(), n_electrons, cap)?;
        if basis.len() > DENSE_LIMIT {
            return Err(Error::Eigensolver(format!(
                "sector dimension {} exceeds the dense eigensolver limit {DENSE_LIMIT}",
                basis.len()
            )));
        }
        let matrix = sector_hamiltonian(h, &basis);
        let eig = SymmetricEigen::try_new(matrix.clone(), 1e-14, 10_000)
            .ok_or_else(|| Error::Eigensolver("symmetric eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..basis.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(basis.len(), basis.len(), |i, k| eig.eigenvectors[(i, order[k])]);
        Ok(Self { basis, matrix, energies, vectors })
    }

    pub fn ground(&self) -> (f64, CiVector) {
        let coefficients = self.vectors.column(0).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        (self.energies[0], CiVector { basis: self.basis.clone(), coefficients })
    }
}

/// Lowest eigenpair in the `n_electrons` sector.
pub fn fci_ground(h: &Hamiltonian, n_electrons: usize) -> Result<(f64, CiVector)> {
    fci_ground_capped(h, n_electrons, DEFAULT_SECTOR_CAP)
}

pub fn fci_ground_capped(h: &Hamiltonian, n_electrons: usize, cap: usize) -> Result<(f64, CiVector)> {
    Ok(SectorSpectrum::compute(h, n_electrons, cap)?.ground())
}

/// Lehmann representation of the core-hole Green's function:
/// `G(t) = -i sum_k w_k exp(i (E_k - E_g) t)` with `w_k = |<k|a_c|Psi>|^2`.
#[derive(Debug, Clone)]
pub struct CoreHoleLehmann {
    pub ground_energy: f64,
    pub ground: CiVector,
    /// `a_c |Psi^(N)>`.
    pub ionized: CiVector,
    pub ionized_spectrum: SectorSpectrum,
    pub poles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CoreHoleLehmann {
    pub fn compute(h: &Hamiltonian, core_index: usize) -> Result<Self> {
        let n = h.n_spin_orbitals();
        if core_index >= n {
            return Err(Error::IndexOutOfRange { index: core_index, n });
        }
        if h.n_electrons() == 0 {
            return Err(Error::ZeroNorm(0.0));
        }
        let (ground_energy, ground) = fci_ground(h, h.n_electrons())?;
        let ionized = ground.annihilate(core_index);
        let occupation = ionized.norm().powi(2);
        if occupation < 1e-12 {
            return Err(Error::ZeroNorm(occupation));
        }
        let ionized_spectrum = SectorSpectrum::compute(h, h.n_electrons() - 1, DEFAULT_SECTOR_CAP)?;
        let psi = DVector::from_iterator(ionized.coefficients.len(), ionized.coefficients.iter().map(|c| c.re));
        let overlaps = ionized_spectrum.vectors.transpose() * psi;
        let weights = overlaps.iter().map(|x| x * x).collect();
        let poles = ionized_spectrum.energies.iter().map(|e| e - ground_energy).collect();
        Ok(Self { ground_energy, ground, ionized, ionized_spectrum, poles, weights })
    }

    /// Core occupation `<Psi|a+_c a_c|Psi>`.
    pub fn core_occupation(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn value_at(&self, t: f64) -> Complex64 {
        let s: Complex64 = self
            .poles
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| w * Complex64::from_polar(1.0, e * t))
            .sum();
        -Complex64::i() * s
    }

    pub fn trajectory(&self, grid: TimeGrid) -> GreensTrajectory {
        let g = (0..grid.len()).into_par_iter().map(|k| self.value_at(grid.time(k))).collect();
        GreensTrajectory::new(grid, g, "exact")
    }

    /// Same quantity from the dense propagator `exp(iHt)` acting on `a_c|Psi>`.
    pub fn dense_value_at(&self, t: f64) -> Complex64 {
        let spec = &self.ionized_spectrum;
        let dim = spec.basis.len();
        let u = &spec.vectors;
        let psi = DVector::from_iterator(dim, self.ionized.coefficients.iter().map(|c| c.re));
        // exp(iHt) = U diag(exp(iEt)) U^T assembled densely
        let mut prop = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..dim {
            let phase = Complex64::from_polar(1.0, spec.energies[k] * t);
            for i in 0..dim {
                for j in 0..dim {
                    prop[(i, j)] += u[(i, k)] * phase * u[(j, k)];
                }
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += psi[i] * prop[(i, j)] * psi[j];
            }
        }
        -Complex64::i() * Complex64::from_polar(1.0, -self.ground_energy * t) * acc
    }
}

/// Exact retarded core-hole Green's function on `grid`.
pub fn exact_greens(h: &Hamiltonian, core_index: usize, grid: TimeGrid) -> Result<GreensTrajectory> {
    Ok(CoreHoleLehmann::compute(h, core_index)?.trajectory(grid))
}
