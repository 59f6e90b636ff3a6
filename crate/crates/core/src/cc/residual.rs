//! Spin-orbital CCSD projections `<mu| e^{-T} H e^{T} |ref>` in the
//! Stanton-Gauss intermediate formulation, valid for non-canonical Fock
//! matrices.

use ndarray::{Array2, Array4};

use super::amplitudes::{ClusterAmplitudes, Scalar};
use super::blocks::Blocks;

/// `<ref| e^{-T} H e^{T} |ref>`.
pub fn energy<S: Scalar>(b: &Blocks<S>, t: &ClusterAmplitudes<S>) -> S {
    let (no, nv) = (b.n_occupied(), b.n_virtual());
    let half = S::from_f64(0.5);
    let quarter = S::from_f64(0.25);
    let mut e = S::from_f64(b.reference_energy);
    for i in 0..no {
        for a in 0..nv {
            e += b.fov[[i, a]] * t.t1[[i, a]];
        }
    }
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for c in 0..nv {
                    let v = b.oovv[[i, j, a, c]];
                    e += quarter * v * t.t2[[i, j, a, c]] + half * v * t.t1[[i, a]] * t.t1[[j, c]];
                }
            }
        }
    }
    e
}

/// Singles and doubles projections of the similarity-transformed
/// Hamiltonian. `r2` is antisymmetric whenever `t2` is.
pub fn residual<S: Scalar>(b: &Blocks<S>, t: &ClusterAmplitudes<S>) -> ClusterAmplitudes<S> {
    let (no, nv) = (b.n_occupied(), b.n_virtual());
    let t1 = &t.t1;
    let t2 = &t.t2;
    let z = S::zero();
    let half = S::from_f64(0.5);
    let quarter = S::from_f64(0.25);

    let tau = Array4::from_shape_fn((no, no, nv, nv), |(i, j, a, c)| {
        t2[[i, j, a, c]] + t1[[i, a]] * t1[[j, c]] - t1[[i, c]] * t1[[j, a]]
    });
    let taut = Array4::from_shape_fn((no, no, nv, nv), |(i, j, a, c)| {
        t2[[i, j, a, c]] + half * (t1[[i, a]] * t1[[j, c]] - t1[[i, c]] * t1[[j, a]])
    });

    let mut fae = Array2::from_elem((nv, nv), z);
    for a in 0..nv {
        for e in 0..nv {
            let mut x = if a == e { z } else { b.fvv[[a, e]] };
            for m in 0..no {
                x -= half * b.fov[[m, e]] * t1[[m, a]];
                for f in 0..nv {
                    x += t1[[m, f]] * b.ovvv[[m, a, f, e]];
                    for n in 0..no {
                        x -= half * taut[[m, n, a, f]] * b.oovv[[m, n, e, f]];
                    }
                }
            }
            fae[[a, e]] = x;
        }
    }
    let mut fmi = Array2::from_elem((no, no), z);
    for m in 0..no {
        for i in 0..no {
            let mut x = if m == i { z } else { b.foo[[m, i]] };
            for e in 0..nv {
                x += half * t1[[i, e]] * b.fov[[m, e]];
                for n in 0..no {
                    x += t1[[n, e]] * b.ooov[[m, n, i, e]];
                    for f in 0..nv {
                        x += half * taut[[i, n, e, f]] * b.oovv[[m, n, e, f]];
                    }
                }
            }
            fmi[[m, i]] = x;
        }
    }
    let mut fme = b.fov.clone();
    for m in 0..no {
        for e in 0..nv {
            let mut x = z;
            for n in 0..no {
                for f in 0..nv {
                    x += t1[[n, f]] * b.oovv[[m, n, e, f]];
                }
            }
            fme[[m, e]] += x;
        }
    }

    let mut wmnij = b.oooo.clone();
    for m in 0..no {
        for n in 0..no {
            for i in 0..no {
                for j in 0..no {
                    let mut x = z;
                    for e in 0..nv {
                        x += t1[[j, e]] * b.ooov[[m, n, i, e]] - t1[[i, e]] * b.ooov[[m, n, j, e]];
                        for f in 0..nv {
                            x += quarter * tau[[i, j, e, f]] * b.oovv[[m, n, e, f]];
                        }
                    }
                    wmnij[[m, n, i, j]] += x;
                }
            }
        }
    }
    let mut wabef = b.vvvv.clone();
    for a in 0..nv {
        for bb in 0..nv {
            for e in 0..nv {
                for f in 0..nv {
                    let mut x = z;
                    for m in 0..no {
                        x += t1[[m, bb]] * b.ovvv[[m, a, e, f]] - t1[[m, a]] * b.ovvv[[m, bb, e, f]];
                        for n in 0..no {
                            x += quarter * tau[[m, n, a, bb]] * b.oovv[[m, n, e, f]];
                        }
                    }
                    wabef[[a, bb, e, f]] += x;
                }
            }
        }
    }
    let mut wmbej = b.ovvo.clone();
    for m in 0..no {
        for bb in 0..nv {
            for e in 0..nv {
                for j in 0..no {
                    let mut x = z;
                    for f in 0..nv {
                        x += t1[[j, f]] * b.ovvv[[m, bb, e, f]];
                    }
                    for n in 0..no {
                        x += t1[[n, bb]] * b.ooov[[m, n, j, e]];
                        for f in 0..nv {
                            x -= (half * t2[[j, n, f, bb]] + t1[[j, f]] * t1[[n, bb]]) * b.oovv[[m, n, e, f]];
                        }
                    }
                    wmbej[[m, bb, e, j]] += x;
                }
            }
        }
    }

    // singles
    let mut r1 = b.fov.clone();
    for i in 0..no {
        for a in 0..nv {
            let mut x = z;
            for e in 0..nv {
                x += t1[[i, e]] * fae[[a, e]];
            }
            for m in 0..no {
                x -= t1[[m, a]] * fmi[[m, i]];
                for e in 0..nv {
                    x += t2[[i, m, a, e]] * fme[[m, e]];
                    for f in 0..nv {
                        x -= half * t2[[i, m, e, f]] * b.ovvv[[m, a, e, f]];
                    }
                    for n in 0..no {
                        x += half * t2[[m, n, a, e]] * b.ooov[[n, m, i, e]];
                    }
                }
            }
            for n in 0..no {
                for f in 0..nv {
                    x -= t1[[n, f]] * b.ovov[[n, a, i, f]];
                }
            }
            x += (b.fvv[[a, a]] - b.foo[[i, i]]) * t1[[i, a]];
            r1[[i, a]] += x;
        }
    }

    // doubles
    let mut fbe = fae.clone();
    for bb in 0..nv {
        for e in 0..nv {
            for m in 0..no {
                fbe[[bb, e]] -= half * t1[[m, bb]] * fme[[m, e]];
            }
        }
    }
    let mut fmj = fmi.clone();
    for m in 0..no {
        for j in 0..no {
            for e in 0..nv {
                fmj[[m, j]] += half * t1[[j, e]] * fme[[m, e]];
            }
        }
    }
    // unsymmetrized pieces, antisymmetrized below
    let mut pab = Array4::from_elem((no, no, nv, nv), z); // P(ab)
    let mut pij = Array4::from_elem((no, no, nv, nv), z); // P(ij)
    let mut pijab = Array4::from_elem((no, no, nv, nv), z); // P(ij)P(ab)
    let mut r2 = b.oovv.clone();
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for bb in 0..nv {
                    let mut xab = z;
                    let mut xij = z;
                    let mut xboth = z;
                    let mut direct = z;
                    for e in 0..nv {
                        xab += t2[[i, j, a, e]] * fbe[[bb, e]];
                        xij += t1[[i, e]] * b.vvvo[[a, bb, e, j]];
                        for f in 0..nv {
                            direct += half * tau[[i, j, e, f]] * wabef[[a, bb, e, f]];
                        }
                    }
                    for m in 0..no {
                        xij -= t2[[i, m, a, bb]] * fmj[[m, j]];
                        xab -= t1[[m, a]] * b.ovoo[[m, bb, i, j]];
                        for n in 0..no {
                            direct += half * tau[[m, n, a, bb]] * wmnij[[m, n, i, j]];
                        }
                        for e in 0..nv {
                            xboth += t2[[i, m, a, e]] * wmbej[[m, bb, e, j]]
                                - t1[[i, e]] * t1[[m, a]] * b.ovvo[[m, bb, e, j]];
                        }
                    }
                    pab[[i, j, a, bb]] = xab;
                    pij[[i, j, a, bb]] = xij;
                    pijab[[i, j, a, bb]] = xboth;
                    r2[[i, j, a, bb]] += direct;
                }
            }
        }
    }
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for bb in 0..nv {
                    let d = b.foo[[i, i]] + b.foo[[j, j]] - b.fvv[[a, a]] - b.fvv[[bb, bb]];
                    r2[[i, j, a, bb]] += pab[[i, j, a, bb]] - pab[[i, j, bb, a]] + pij[[i, j, a, bb]]
                        - pij[[j, i, a, bb]]
                        + pijab[[i, j, a, bb]]
                        - pijab[[j, i, a, bb]]
                        - pijab[[i, j, bb, a]]
                        + pijab[[j, i, bb, a]]
                        - d * t2[[i, j, a, bb]];
                }
            }
        }
    }
    ClusterAmplitudes { t1: r1, t2: r2 }
}
