//! Singles/doubles amplitude tensors.
//!
//! Operators are `T = sum t_i^a a+_a a_i + 1/4 sum t_ij^ab a+_a a+_b a_j a_i`
//! with `t2` antisymmetric in both index pairs. Indices are positions within
//! the occupied and virtual lists of a partition.

use std::ops::Neg;

use ndarray::{Array2, Array4};
use num_complex::Complex64;
use num_traits::NumAssign;

/// Scalar field shared by the real ground-state and complex time-dependent
/// amplitude equations.
pub trait Scalar: Copy + NumAssign + Neg<Output = Self> + Send + Sync + std::fmt::Debug + 'static {
    fn from_f64(x: f64) -> Self;
    fn is_finite(self) -> bool;
    fn norm_sqr(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAmplitudes<S> {
    pub t1: Array2<S>,
    pub t2: Array4<S>,
}

/// De-excitation amplitudes, stored with the same index layout.
pub type LambdaAmplitudes = ClusterAmplitudes<f64>;

impl<S: Scalar> ClusterAmplitudes<S> {
    pub fn zeros(no: usize, nv: usize) -> Self {
        Self { t1: Array2::from_elem((no, nv), S::zero()), t2: Array4::from_elem((no, no, nv, nv), S::zero()) }
    }

    pub fn n_occupied(&self) -> usize {
        self.t1.nrows()
    }

    pub fn n_virtual(&self) -> usize {
        self.t1.ncols()
    }

    /// Number of independent parameters: all singles plus `i<j, a<b` doubles.
    pub fn packed_len(no: usize, nv: usize) -> usize {
        no * nv + no * no.saturating_sub(1) / 2 * (nv * nv.saturating_sub(1) / 2)
    }

    pub fn pack(&self) -> Vec<S> {
        let (no, nv) = (self.n_occupied(), self.n_virtual());
        let mut out = Vec::with_capacity(Self::packed_len(no, nv));
        out.extend(self.t1.iter().copied());
        for i in 0..no {
            for j in i + 1..no {
                for a in 0..nv {
                    for b in a + 1..nv {
                        out.push(self.t2[[i, j, a, b]]);
                    }
                }
            }
        }
        out
    }

    pub fn unpack(x: &[S], no: usize, nv: usize) -> Self {
        assert_eq!(x.len(), Self::packed_len(no, nv));
        let mut amps = Self::zeros(no, nv);
        for (dst, &src) in amps.t1.iter_mut().zip(x) {
            *dst = src;
        }
        let mut k = no * nv;
        for i in 0..no {
            for j in i + 1..no {
                for a in 0..nv {
                    for b in a + 1..nv {
                        amps.set_double(i, j, a, b, x[k]);
                        k += 1;
                    }
                }
            }
        }
        amps
    }

    /// Sets all four antisymmetric images of `t_ij^ab`.
    pub fn set_double(&mut self, i: usize, j: usize, a: usize, b: usize, x: S) {
        self.t2[[i, j, a, b]] = x;
        self.t2[[j, i, a, b]] = -x;
        self.t2[[i, j, b, a]] = -x;
        self.t2[[j, i, b, a]] = x;
    }

    /// Frobenius norm over the independent parameters.
    pub fn norm(&self) -> f64 {
        self.pack().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.t1.iter().chain(self.t2.iter()).all(|x| x.is_finite())
    }

    /// Largest deviation from antisymmetry in `t2`.
    pub fn antisymmetry_error(&self) -> f64 {
        let (no, nv) = (self.n_occupied(), self.n_virtual());
        let mut err: f64 = 0.0;
        for i in 0..no {
            for j in 0..no {
                for a in 0..nv {
                    for b in 0..nv {
                        let x = self.t2[[i, j, a, b]];
                        err = err.max((x + self.t2[[j, i, a, b]]).norm_sqr().sqrt());
                        err = err.max((x + self.t2[[i, j, b, a]]).norm_sqr().sqrt());
                    }
                }
            }
        }
        err
    }

    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> ClusterAmplitudes<R> {
        ClusterAmplitudes { t1: self.t1.mapv(&f), t2: self.t2.mapv(&f) }
    }

    pub fn scaled_add(&mut self, alpha: S, other: &Self) {
        self.t1.zip_mut_with(&other.t1, |x, &y| *x += alpha * y);
        self.t2.zip_mut_with(&other.t2, |x, &y| *x += alpha * y);
    }
}

impl ClusterAmplitudes<f64> {
    pub fn to_complex(&self) -> ClusterAmplitudes<Complex64> {
        self.map(|x| Complex64::new(x, 0.0))
    }
}
