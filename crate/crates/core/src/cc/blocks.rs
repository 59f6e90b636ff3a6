//! Fock matrix and integral blocks of a Hamiltonian partitioned around a
//! reference determinant.

use ndarray::{Array2, Array4};

use super::amplitudes::Scalar;
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone)]
pub struct Blocks<S> {
    pub occupied: Vec<usize>,
    pub virtual_: Vec<usize>,
    pub foo: Array2<S>,
    pub fov: Array2<S>,
    pub fvv: Array2<S>,
    pub oooo: Array4<S>,
    pub ooov: Array4<S>,
    pub oovv: Array4<S>,
    pub ovvo: Array4<S>,
    pub ovvv: Array4<S>,
    pub vvvv: Array4<S>,
    pub vvvo: Array4<S>,
    pub ovoo: Array4<S>,
    pub ovov: Array4<S>,
    /// Reference energy including the scalar shift.
    pub reference_energy: f64,
}

impl<S: Scalar> Blocks<S> {
    pub fn new(h: &Hamiltonian, occupied: &[usize], virtual_: &[usize]) -> Self {
        Self::scaled(h, occupied, virtual_, 1.0)
    }

    /// Blocks of `h1 + lambda * V`.
    pub fn scaled(h: &Hamiltonian, occupied: &[usize], virtual_: &[usize], lambda: f64) -> Self {
        let h1 = h.h1();
        let v = h.v2();
        let fock = |p: usize, q: usize| h1[[p, q]] + lambda * occupied.iter().map(|&m| v[[p, m, q, m]]).sum::<f64>();
        let f2 = |rows: &[usize], cols: &[usize]| {
            Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| S::from_f64(fock(rows[i], cols[j])))
        };
        let g = |a: &[usize], b: &[usize], c: &[usize], d: &[usize]| {
            Array4::from_shape_fn((a.len(), b.len(), c.len(), d.len()), |(p, q, r, s)| {
                S::from_f64(lambda * v[[a[p], b[q], c[r], d[s]]])
            })
        };
        let (o, w) = (occupied, virtual_);
        let reference_energy = h.scalar_shift()
            + o.iter().map(|&i| h1[[i, i]]).sum::<f64>()
            + 0.5 * lambda * o.iter().flat_map(|&i| o.iter().map(move |&j| v[[i, j, i, j]])).sum::<f64>();
        Self {
            occupied: o.to_vec(),
            virtual_: w.to_vec(),
            foo: f2(o, o),
            fov: f2(o, w),
            fvv: f2(w, w),
            oooo: g(o, o, o, o),
            ooov: g(o, o, o, w),
            oovv: g(o, o, w, w),
            ovvo: g(o, w, w, o),
            ovvv: g(o, w, w, w),
            vvvv: g(w, w, w, w),
            vvvo: g(w, w, w, o),
            ovoo: g(o, w, o, o),
            ovov: g(o, w, o, w),
            reference_energy,
        }
    }

    pub fn n_occupied(&self) -> usize {
        self.occupied.len()
    }

    pub fn n_virtual(&self) -> usize {
        self.virtual_.len()
    }
}
