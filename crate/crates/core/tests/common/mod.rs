#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, RowDVector};
use ndarray::{Array2, Array4};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rtcc::cc::{ClusterAmplitudes, LambdaAmplitudes};
use rtcc::expansion::FockSpace;
use rtcc::fock::{det_from_orbitals, Op};
use rtcc::hamiltonian::{build_siam, Hamiltonian, ReferencePartition, SiamParams};
use rtcc::overlap::OmegaAmplitudes;
use rtcc::rteom::{AnsatzKind, CoreCoupling};

pub fn siam(u: f64) -> Hamiltonian {
    build_siam(&SiamParams { eps_impurity: -1.5, bath_energies: vec![-1.0, 1.0, 2.0], hybridization: 0.4, onsite_u: u })
        .unwrap()
}

pub fn siam_toml(u: f64) -> String {
    format!(
        "[system.siam]\neps_impurity = -1.5\nbath_energies = [-1.0, 1.0, 2.0]\nhybridization = 0.4\nonsite_u = {u:?}\n"
    )
}

/// Random spin-restricted Hamiltonian with 8-fold symmetric integrals and
/// separated one-body levels.
pub fn random_hamiltonian(m: usize, n_electrons: usize, seed: u64) -> Hamiltonian {
    let mut r = StdRng::seed_from_u64(seed);
    let mut h = Array2::zeros((m, m));
    for p in 0..m {
        h[[p, p]] = -2.0 + 1.1 * p as f64;
        for q in 0..p {
            let x = r.random_range(-0.15..0.15);
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
                    let x = r.random_range(-0.1..0.1) + if p == q && s == t { 0.4 } else { 0.0 };
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

pub fn random_real(no: usize, nv: usize, scale: f64, seed: u64) -> ClusterAmplitudes<f64> {
    let mut r = StdRng::seed_from_u64(seed);
    let x: Vec<f64> = (0..ClusterAmplitudes::<f64>::packed_len(no, nv)).map(|_| scale * r.random_range(-1.0..1.0)).collect();
    ClusterAmplitudes::unpack(&x, no, nv)
}

pub fn random_complex(no: usize, nv: usize, scale: f64, seed: u64) -> ClusterAmplitudes<Complex64> {
    let mut r = StdRng::seed_from_u64(seed);
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

type Mat = DMatrix<Complex64>;

/// Overlap and hole-mediated amplitudes by explicit operator products on
/// the 8-spin-orbital Fock space, 4 electrons, core spin-orbital 1.
pub struct OverlapOracle {
    fs: FockSpace,
    pub cp: CoreCoupling,
    t_full: Mat,
    t_rest: Mat,
    bra: RowDVector<Complex64>,
    create_c: Mat,
    ionized_ref: DVector<Complex64>,
}

impl OverlapOracle {
    pub fn new(t: &ClusterAmplitudes<f64>, l: &LambdaAmplitudes) -> Self {
        let part = partition(8, 4, 1);
        let cp = CoreCoupling::new(&part, t).unwrap();
        let fs = FockSpace::new(8).unwrap();
        let (occ, vir) = (&part.occupied, &part.virtual_);
        let t_full = fs.excitation(t, occ, vir);
        let mut tr = t.clone();
        tr.t1.row_mut(1).fill(0.0);
        for j in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    tr.t2[[1, j, a, b]] = 0.0;
                    tr.t2[[j, 1, a, b]] = 0.0;
                }
            }
        }
        let t_rest = fs.excitation(&tr, occ, vir);
        let id = Mat::identity(fs.dim(), fs.dim());
        let lam = fs.deexcitation(l, occ, vir);
        let phi = fs.basis_vector(det_from_orbitals(occ));
        let bra = phi.transpose() * (&id + lam) * (&id - &t_full + &t_full * &t_full * Complex64::new(0.5, 0.0));
        let create_c = fs.string(&[Op::Create(1)]);
        let ionized_ref = fs.string(&[Op::Annihilate(1)]) * &phi;
        Self { fs, cp, t_full, t_rest, bra, create_c, ionized_ref }
    }

    fn delta(&self, kind: AnsatzKind, s_op: &Mat) -> Mat {
        if !kind.singles_correction() {
            return Mat::zeros(self.fs.dim(), self.fs.dim());
        }
        let (occ1, vir1) = (&self.cp.ionized.occupied, &self.cp.ionized.virtual_);
        let comm = (&self.t_full * s_op - s_op * &self.t_full) * Complex64::new(0.5, 0.0);
        let reference = det_from_orbitals(occ1);
        let mut d = self.fs.amplitudes_of(&comm.column(reference as usize).into_owned(), reference, occ1, vir1);
        if !kind.doubles_correction() {
            d.t2.fill(Complex64::new(0.0, 0.0));
        }
        self.fs.excitation(&d, occ1, vir1)
    }

    /// Total overlap and the hole-mediated ket amplitudes on the ground
    /// partition (determinant normalization).
    pub fn evaluate(&self, kind: AnsatzKind, s: &ClusterAmplitudes<Complex64>) -> (Complex64, ClusterAmplitudes<Complex64>) {
        let (occ1, vir1) = (&self.cp.ionized.occupied, &self.cp.ionized.virtual_);
        let half = Complex64::new(0.5, 0.0);
        let id = Mat::identity(self.fs.dim(), self.fs.dim());
        let s_op = self.fs.excitation(s, occ1, vir1);
        let d = self.delta(kind, &s_op);
        let x = &self.t_full + &s_op;
        let k = &id + &x + &x * &x * half + &d + (&x * &d + &d * &x) * half;
        let y = &self.t_rest + &s_op;
        let k_direct = &id + &y + &y * &y * half;
        let ket = &self.create_c * (&k * &self.ionized_ref);
        let hm = &self.create_c * ((k - k_direct) * &self.ionized_ref);
        let occ = &self.cp.ground.occupied;
        let vir = &self.cp.ground.virtual_;
        let amps = self.fs.amplitudes_of(&hm, det_from_orbitals(occ), occ, vir);
        ((&self.bra * ket)[0], amps)
    }

    /// Omega in the ionized layout mapped onto ground indices, determinant
    /// normalization.
    pub fn omega_on_ground(&self, w: &OmegaAmplitudes) -> ClusterAmplitudes<Complex64> {
        let cp = &self.cp;
        let (occ, vir) = (&cp.ground.occupied, &cp.ground.virtual_);
        let mut out = ClusterAmplitudes::zeros(occ.len(), vir.len());
        let oi = |p: usize| cp.ionized.occupied.iter().position(|&q| q == p);
        let vi = |p: usize| cp.ionized.virtual_.iter().position(|&q| q == p).unwrap();
        for (gi, &p) in occ.iter().enumerate() {
            let Some(i) = oi(p) else { continue };
            for (ga, &q) in vir.iter().enumerate() {
                out.t1[[gi, ga]] = w.omega1[[i, vi(q)]];
                for (gj, &r) in occ.iter().enumerate() {
                    let Some(j) = oi(r) else { continue };
                    for (gb, &u) in vir.iter().enumerate() {
                        out.t2[[gi, gj, ga, gb]] = 4.0 * w.omega2[[i, j, vi(q), vi(u)]];
                    }
                }
            }
        }
        out
    }
}
