//! Helpers shared by unit tests.

use ndarray::{Array2, Array4};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cc::ClusterAmplitudes;
use crate::hamiltonian::{Hamiltonian, ReferencePartition};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Spin-restricted Hamiltonian with 8-fold symmetric random integrals and
/// well separated one-body levels.
pub fn random_hamiltonian(m: usize, n_electrons: usize, seed: u64) -> Hamiltonian {
    let mut r = rng(seed);
    let mut h = Array2::zeros((m, m));
    for p in 0..m {
        h[[p, p]] = -2.0 + 1.2 * p as f64;
        for q in 0..p {
            let x = r.random_range(-0.1..0.1);
            h[[p, q]] = x;
            h[[q, p]] = x;
        }
    }
    let mut eri = Array4::zeros((m, m, m, m));
    for p in 0..m {
        for q in 0..=p {
            for s in 0..m {
                for t in 0..=s {
                    if p * (p + 1) / 2 + q < s * (s + 1) / 2 + t {
                        continue;
                    }
                    let x = r.random_range(-0.1..0.1) + if p == q && s == t { 0.3 } else { 0.0 };
                    for (a, b, c, d) in [(p, q, s, t), (q, p, s, t), (p, q, t, s), (q, p, t, s)] {
                        eri[[a, b, c, d]] = x;
                        eri[[c, d, a, b]] = x;
                    }
                }
            }
        }
    }
    let labels: Vec<String> = (0..m).map(|p| format!("o{p}")).collect();
    Hamiltonian::from_spatial(&h, &eri, 0.0, n_electrons, &labels).unwrap()
}

pub fn partition(n: usize, n_occ: usize, core: usize) -> ReferencePartition {
    ReferencePartition { occupied: (0..n_occ).collect(), virtual_: (n_occ..n).collect(), core_index: core }
}

pub fn random_real_amplitudes(no: usize, nv: usize, scale: f64, seed: u64) -> ClusterAmplitudes<f64> {
    let mut r = rng(seed);
    let x: Vec<f64> = (0..ClusterAmplitudes::<f64>::packed_len(no, nv)).map(|_| scale * r.random_range(-1.0..1.0)).collect();
    ClusterAmplitudes::unpack(&x, no, nv)
}

pub fn random_complex_amplitudes(no: usize, nv: usize, scale: f64, seed: u64) -> ClusterAmplitudes<Complex64> {
    let mut r = rng(seed);
    let x: Vec<Complex64> = (0..ClusterAmplitudes::<Complex64>::packed_len(no, nv))
        .map(|_| scale * Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    ClusterAmplitudes::unpack(&x, no, nv)
}

pub fn max_diff(a: &ClusterAmplitudes<Complex64>, b: &ClusterAmplitudes<Complex64>) -> f64 {
    let d1 = a.t1.iter().zip(&b.t1).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let d2 = a.t2.iter().zip(&b.t2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    d1.max(d2)
}
