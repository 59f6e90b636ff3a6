//! Commutator corrections `1/2 [T, S]` restricted to the singles/doubles
//! manifold of the ionized reference.
//!
//! Only contractions through the core survive: `T` may annihilate `c`
//! while `S` may create it. `[T2, S2]` yields triples and is dropped.

use num_complex::Complex64;

use super::ansatz::AnsatzKind;
use super::system::CoreCoupling;
use crate::cc::ClusterAmplitudes;

pub fn effective_delta(
    kind: AnsatzKind,
    coupling: &CoreCoupling,
    s: &ClusterAmplitudes<Complex64>,
) -> ClusterAmplitudes<Complex64> {
    let (no, nv) = (coupling.n_occupied(), coupling.n_virtual());
    if !kind.singles_correction() {
        return ClusterAmplitudes::zeros(no, nv);
    }
    let mut delta = core_contractions(coupling, s, kind.doubles_correction());
    delta.t1.mapv_inplace(|x| 0.5 * x);
    delta.t2.mapv_inplace(|x| 0.5 * x);
    delta
}

/// `[T, S]` restricted to singles and doubles. Only contractions of `a_c`
/// in `T` with `a_c^+` in `S` contribute, so this is also `T S |ref>`.
/// Doubles are left at zero unless `doubles` is set.
pub(crate) fn core_contractions(
    cp: &CoreCoupling,
    s: &ClusterAmplitudes<Complex64>,
    doubles: bool,
) -> ClusterAmplitudes<Complex64> {
    let c = cp.core_pos;
    let (no, nv) = (cp.n_occupied(), cp.n_virtual());
    let mut out = ClusterAmplitudes::zeros(no, nv);
    for i in 0..no {
        let sic = s.t1[[i, c]];
        for a in 0..nv {
            out.t1[[i, a]] = cp.tc1[a] * sic;
        }
    }
    if !doubles {
        return out;
    }
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for b in 0..nv {
                    // [T1, S2]: t_c^a s_ij^cb, antisymmetrized in ab
                    let x = cp.tc1[a] * s.t2[[i, j, c, b]] - cp.tc1[b] * s.t2[[i, j, c, a]];
                    // [T2, S1]: t_cj^ab s_i^c, antisymmetrized in ij
                    let y = cp.tc2[[j, a, b]] * s.t1[[i, c]] - cp.tc2[[i, a, b]] * s.t1[[j, c]];
                    out.t2[[i, j, a, b]] = x + y;
                }
            }
        }
    }
    out
}
