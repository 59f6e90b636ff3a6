use num_complex::Complex64;

use super::ansatz::AnsatzKind;
use super::delta::effective_delta;
use super::system::CoreCoupling;
use crate::cc::{energy, residual, Blocks, ClusterAmplitudes};
use crate::error::{Error, Result};

/// Cluster operator that defines the similarity transform for `kind`:
/// `S`, `T + S`, or `T + S + Delta`, with core rows of `T` removed since
/// they annihilate the ionized reference.
pub fn effective_amplitudes(
    kind: AnsatzKind,
    coupling: &CoreCoupling,
    s: &ClusterAmplitudes<Complex64>,
) -> ClusterAmplitudes<Complex64> {
    let mut sigma = s.clone();
    if kind.uses_ground_state() {
        sigma.t1.zip_mut_with(&coupling.t_rest.t1, |x, &t| *x += t);
        sigma.t2.zip_mut_with(&coupling.t_rest.t2, |x, &t| *x += t);
    }
    if kind.singles_correction() {
        let d = effective_delta(kind, coupling, s);
        sigma.scaled_add(Complex64::new(1.0, 0.0), &d);
    }
    sigma
}

/// Time derivative `i <mu|Hbar|ref>` of the ionized amplitudes and the
/// instantaneous energy `<ref|Hbar|ref>`.
pub fn eom_rhs(
    kind: AnsatzKind,
    blocks: &Blocks<Complex64>,
    coupling: &CoreCoupling,
    s: &ClusterAmplitudes<Complex64>,
) -> Result<(ClusterAmplitudes<Complex64>, Complex64)> {
    let sigma = effective_amplitudes(kind, coupling, s);
    let mut r = residual(blocks, &sigma);
    let e = energy(blocks, &sigma);
    if r.t1.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("singles derivative".into()));
    }
    if r.t2.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("doubles derivative".into()));
    }
    if !e.is_finite() {
        return Err(Error::NonFinite("ionized energy".into()));
    }
    let i = Complex64::i();
    r.t1.mapv_inplace(|x| i * x);
    r.t2.mapv_inplace(|x| i * x);
    Ok((r, e))
}
