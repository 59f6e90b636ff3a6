//! Time-dependent overlap `O(t)` and its decomposition into direct and
//! hole-mediated channels.
//!
//! The exponential is expanded as
//! `1 + X + X^2/2 + D + {X, D}/2` with `X = T + S`, the bra as
//! `<ref|(1 + L)(1 - T + T^2/2)`. Both sides are evaluated in closed form on
//! the singles/doubles manifold that survives `a_c^+`.

use std::fmt;
use std::io::{BufRead, Write};

use ndarray::{Array2, Array4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cc::{ClusterAmplitudes, LambdaAmplitudes};
use crate::error::{Error, Result};
use crate::greens::{GreensTrajectory, TimeGrid};
use crate::rteom::delta::core_contractions;
use crate::rteom::{cumulant_greens, effective_delta, AnsatzKind, CoreCoupling, Propagation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// `<ref|(1+L)(1-T+T^2/2)|ref>` times the unit ket coefficient.
    Reference,
    DirectSingle,
    DirectDouble,
    HmSingle,
    HmDouble,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Reference => "reference",
            ChannelKind::DirectSingle => "direct_single",
            ChannelKind::DirectDouble => "direct_double",
            ChannelKind::HmSingle => "hm_single",
            ChannelKind::HmDouble => "hm_double",
        }
    }

    pub fn is_hole_mediated(self) -> bool {
        matches!(self, ChannelKind::HmSingle | ChannelKind::HmDouble)
    }
}

/// Channel identity. `indices` holds spin orbitals `(i, a)` or
/// `(i, j, a, b)` with `i < j`, `a < b`. An empty index list on a
/// non-reference kind is the remainder of that kind after truncation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub kind: ChannelKind,
    pub indices: Vec<usize>,
}

impl ChannelLabel {
    pub fn is_remainder(&self) -> bool {
        self.kind != ChannelKind::Reference && self.indices.is_empty()
    }

    /// File-name friendly form, e.g. `hm_single_2_5`.
    pub fn slug(&self) -> String {
        if self.is_remainder() {
            return format!("{}_rest", self.kind.name());
        }
        let mut s = self.kind.name().to_string();
        for p in &self.indices {
            s.push('_');
            s.push_str(&p.to_string());
        }
        s
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.indices.as_slice() {
            [] if self.kind == ChannelKind::Reference => write!(f, "reference"),
            [] => write!(f, "{} (rest)", self.kind.name()),
            [i, a] => write!(f, "{} {i}->{a}", self.kind.name()),
            [i, j, a, b] => write!(f, "{} {i},{j}->{a},{b}", self.kind.name()),
            other => write!(f, "{} {:?}", self.kind.name(), other),
        }
    }
}

/// `Omega_i^a` and `Omega_ij^ab` on the ionized index space. Doubles use the
/// per-ordered-tuple normalization, so a determinant picks up `4 Omega`.
#[derive(Debug, Clone)]
pub struct OmegaAmplitudes {
    pub omega1: Array2<Complex64>,
    pub omega2: Array4<Complex64>,
}

/// Hole-mediated amplitudes of `kind` for the current `S`.
pub fn omega_amplitudes(kind: AnsatzKind, cp: &CoreCoupling, s: &ClusterAmplitudes<Complex64>) -> OmegaAmplitudes {
    let mut w = hm_coefficients(kind, cp, s);
    w.t2.mapv_inplace(|x| 0.25 * x);
    OmegaAmplitudes { omega1: w.t1, omega2: w.t2 }
}

/// HM ket coefficients in determinant normalization:
/// `T_c S/2 + D + (T + S) D` projected on singles/doubles.
fn hm_coefficients(kind: AnsatzKind, cp: &CoreCoupling, s: &ClusterAmplitudes<Complex64>) -> ClusterAmplitudes<Complex64> {
    let (no, nv) = (cp.n_occupied(), cp.n_virtual());
    if !kind.uses_ground_state() {
        return ClusterAmplitudes::zeros(no, nv);
    }
    let mut w = core_contractions(cp, s, true);
    w.t1.mapv_inplace(|x| 0.5 * x);
    w.t2.mapv_inplace(|x| 0.5 * x);
    if kind.singles_correction() {
        let d = effective_delta(kind, cp, s);
        w.scaled_add(Complex64::new(1.0, 0.0), &d);
        let y = direct_singles(cp, s);
        for i in 0..no {
            for j in 0..no {
                for a in 0..nv {
                    for b in 0..nv {
                        w.t2[[i, j, a, b]] += y[[i, a]] * d.t1[[j, b]] + y[[j, b]] * d.t1[[i, a]]
                            - y[[i, b]] * d.t1[[j, a]]
                            - y[[j, a]] * d.t1[[i, b]];
                    }
                }
            }
        }
    }
    w
}

fn direct_singles(cp: &CoreCoupling, s: &ClusterAmplitudes<Complex64>) -> Array2<Complex64> {
    let mut y = s.t1.clone();
    y.zip_mut_with(&cp.t_rest.t1, |x, &t| *x += t);
    y
}

/// Direct ket coefficients: `Y + Y1^2/2` with `Y = T + S` (core rows of
/// `T` excluded), in determinant normalization.
fn direct_coefficients(kind: AnsatzKind, cp: &CoreCoupling, s: &ClusterAmplitudes<Complex64>) -> ClusterAmplitudes<Complex64> {
    let (no, nv) = (cp.n_occupied(), cp.n_virtual());
    let mut y = s.clone();
    if kind.uses_ground_state() {
        y.t1.zip_mut_with(&cp.t_rest.t1, |x, &t| *x += t);
        y.t2.zip_mut_with(&cp.t_rest.t2, |x, &t| *x += t);
    }
    let y1 = y.t1.clone();
    for i in 0..no {
        for j in 0..no {
            for a in 0..nv {
                for b in 0..nv {
                    y.t2[[i, j, a, b]] += y1[[i, a]] * y1[[j, b]] - y1[[i, b]] * y1[[j, a]];
                }
            }
        }
    }
    y
}

/// Left-hand coefficients `<ref|(1+L)(1-T+T^2/2)|mu>` on the ionized layout
/// (entries involving the core are zero).
#[derive(Debug, Clone)]
struct BraCoefficients {
    b0: f64,
    b1: Array2<f64>,
    b2: Array4<f64>,
}

impl BraCoefficients {
    fn new(cp: &CoreCoupling, t: &ClusterAmplitudes<f64>, l: &LambdaAmplitudes) -> Self {
        let (go, gv) = (cp.ground.occupied.len(), cp.ground.virtual_.len());
        let mut b0 = 1.0;
        for i in 0..go {
            for a in 0..gv {
                b0 -= l.t1[[i, a]] * t.t1[[i, a]];
                for j in 0..go {
                    for b in 0..gv {
                        b0 += -0.25 * l.t2[[i, j, a, b]] * t.t2[[i, j, a, b]]
                            + 0.5 * l.t2[[i, j, a, b]] * t.t1[[i, a]] * t.t1[[j, b]];
                    }
                }
            }
        }
        let occ_map: Vec<usize> = cp
            .ionized
            .occupied
            .iter()
            .map(|p| cp.ground.occupied.iter().position(|q| q == p).expect("ionized occupied is ground occupied"))
            .collect();
        let vir_map: Vec<Option<usize>> =
            cp.ionized.virtual_.iter().map(|p| cp.ground.virtual_.iter().position(|q| q == p)).collect();
        let (no, nv) = (cp.n_occupied(), cp.n_virtual());
        let mut b1 = Array2::zeros((no, nv));
        let mut b2 = Array4::zeros((no, no, nv, nv));
        for (i, &gi) in occ_map.iter().enumerate() {
            for (a, ga) in vir_map.iter().enumerate() {
                let Some(ga) = *ga else { continue };
                let mut x = l.t1[[gi, ga]];
                for gj in 0..go {
                    for gb in 0..gv {
                        x -= l.t2[[gi, gj, ga, gb]] * t.t1[[gj, gb]];
                    }
                }
                b1[[i, a]] = x;
                for (j, &gj) in occ_map.iter().enumerate() {
                    for (b, gb) in vir_map.iter().enumerate() {
                        let Some(gb) = *gb else { continue };
                        b2[[i, j, a, b]] = l.t2[[gi, gj, ga, gb]];
                    }
                }
            }
        }
        Self { b0, b1, b2 }
    }
}

/// Tuning for the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentOptions {
    /// Largest channels (by peak modulus) kept per kind; the rest are summed
    /// into one remainder channel of that kind.
    pub max_channels_per_kind: usize,
}

impl Default for ComponentOptions {
    fn default() -> Self {
        Self { max_channels_per_kind: 64 }
    }
}

#[derive(Debug, Clone)]
pub struct OverlapDecomposition {
    pub kind: AnsatzKind,
    pub grid: TimeGrid,
    pub total: Vec<Complex64>,
    pub channels: Vec<(ChannelLabel, Vec<Complex64>)>,
}

impl OverlapDecomposition {
    /// Largest `|sum of channels - total|` over the grid.
    pub fn completeness_error(&self) -> f64 {
        (0..self.total.len())
            .map(|k| {
                let sum: Complex64 = self.channels.iter().map(|(_, v)| v[k]).sum();
                (sum - self.total[k]).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn channel(&self, label: &ChannelLabel) -> Option<&[Complex64]> {
        self.channels.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// The channel of `kind` with the largest peak modulus, remainders
    /// excluded.
    pub fn dominant(&self, kind: ChannelKind) -> Option<&(ChannelLabel, Vec<Complex64>)> {
        self.channels
            .iter()
            .filter(|(l, _)| l.kind == kind && !l.is_remainder())
            .max_by(|x, y| peak(&x.1).total_cmp(&peak(&y.1)))
    }
}

fn peak(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct ChannelIndex {
    kind: ChannelKind,
    ion: [usize; 4],
    label: Vec<usize>,
}

fn channel_index(cp: &CoreCoupling) -> Vec<ChannelIndex> {
    let (no, nv, c) = (cp.n_occupied(), cp.n_virtual(), cp.core_pos);
    let occ = &cp.ionized.occupied;
    let vir = &cp.ionized.virtual_;
    let mut out = Vec::new();
    for kind in [ChannelKind::DirectSingle, ChannelKind::HmSingle] {
        for i in 0..no {
            for a in (0..nv).filter(|&a| a != c) {
                out.push(ChannelIndex { kind, ion: [i, 0, a, 0], label: vec![occ[i], vir[a]] });
            }
        }
    }
    for kind in [ChannelKind::DirectDouble, ChannelKind::HmDouble] {
        for i in 0..no {
            for j in i + 1..no {
                for a in (0..nv).filter(|&a| a != c) {
                    for b in (a + 1..nv).filter(|&b| b != c) {
                        out.push(ChannelIndex { kind, ion: [i, j, a, b], label: vec![occ[i], occ[j], vir[a], vir[b]] });
                    }
                }
            }
        }
    }
    out
}

/// Channel values at one time: reference first, then the order of
/// [`channel_index`].
fn channel_values(
    kind: AnsatzKind,
    cp: &CoreCoupling,
    bra: &BraCoefficients,
    index: &[ChannelIndex],
    s: &ClusterAmplitudes<Complex64>,
) -> (Complex64, Vec<Complex64>) {
    let direct = direct_coefficients(kind, cp, s);
    let hm = hm_coefficients(kind, cp, s);
    let values = index
        .iter()
        .map(|ch| {
            let [i, j, a, b] = ch.ion;
            match ch.kind {
                ChannelKind::DirectSingle => bra.b1[[i, a]] * direct.t1[[i, a]],
                ChannelKind::HmSingle => bra.b1[[i, a]] * hm.t1[[i, a]],
                ChannelKind::DirectDouble => bra.b2[[i, j, a, b]] * direct.t2[[i, j, a, b]],
                ChannelKind::HmDouble => bra.b2[[i, j, a, b]] * hm.t2[[i, j, a, b]],
                ChannelKind::Reference => unreachable!(),
            }
        })
        .collect();
    (Complex64::new(bra.b0, 0.0), values)
}

/// `O(t)` along a propagation, with its channel decomposition. For TD-CC the
/// overlap is 1 and no channels are produced.
pub fn overlap_trajectory(
    prop: &Propagation,
    cp: &CoreCoupling,
    t: &ClusterAmplitudes<f64>,
    lambda: &LambdaAmplitudes,
    opts: &ComponentOptions,
) -> Result<OverlapDecomposition> {
    let kind = prop.kind;
    if prop.n_occupied != cp.n_occupied() || prop.n_virtual != cp.n_virtual() {
        return Err(Error::GridMismatch("propagation and coupling index spaces differ".into()));
    }
    if !kind.uses_ground_state() {
        return Ok(OverlapDecomposition {
            kind,
            grid: prop.grid,
            total: vec![Complex64::new(1.0, 0.0); prop.len()],
            channels: Vec::new(),
        });
    }
    let bra = BraCoefficients::new(cp, t, lambda);
    let index = channel_index(cp);
    let mut reference = Vec::with_capacity(prop.len());
    let mut series: Vec<Vec<Complex64>> = vec![Vec::with_capacity(prop.len()); index.len()];
    for k in 0..prop.len() {
        let (r, v) = channel_values(kind, cp, &bra, &index, &prop.amplitudes(k));
        reference.push(r);
        for (dst, x) in series.iter_mut().zip(v) {
            dst.push(x);
        }
    }
    let total: Vec<Complex64> =
        (0..prop.len()).map(|k| reference[k] + series.iter().map(|v| v[k]).sum::<Complex64>()).collect();

    let mut channels = vec![(ChannelLabel { kind: ChannelKind::Reference, indices: Vec::new() }, reference)];
    for kind in [ChannelKind::DirectSingle, ChannelKind::DirectDouble, ChannelKind::HmSingle, ChannelKind::HmDouble] {
        let mut members: Vec<usize> = (0..index.len()).filter(|&n| index[n].kind == kind).collect();
        members.sort_by(|&x, &y| peak(&series[y]).total_cmp(&peak(&series[x])).then(x.cmp(&y)));
        let keep = members.len().min(opts.max_channels_per_kind);
        let (kept, rest) = members.split_at(keep);
        let mut kept = kept.to_vec();
        kept.sort_unstable();
        for &n in &kept {
            channels.push((ChannelLabel { kind, indices: index[n].label.clone() }, std::mem::take(&mut series[n])));
        }
        if !rest.is_empty() {
            let sum = (0..prop.len()).map(|k| rest.iter().map(|&n| series[n][k]).sum()).collect();
            channels.push((ChannelLabel { kind, indices: Vec::new() }, sum));
        }
    }
    Ok(OverlapDecomposition { kind, grid: prop.grid, total, channels })
}

/// Per-channel Green's functions sharing the cumulant phase of the total.
pub fn channel_greens(
    decomp: &OverlapDecomposition,
    prop: &Propagation,
    e_ground: f64,
) -> Result<Vec<(ChannelLabel, GreensTrajectory)>> {
    decomp.grid.check_same(&prop.grid)?;
    decomp
        .channels
        .iter()
        .map(|(label, o)| {
            let mut g = cumulant_greens(prop, e_ground, Some(o))?;
            g.method_tag = format!("{}:{}", prop.kind.name(), label.slug());
            Ok((label.clone(), g))
        })
        .collect()
}

/// Writes `t, Re O, Im O`.
pub fn write_channel_csv<W: Write>(mut w: W, grid: &TimeGrid, o: &[Complex64]) -> Result<()> {
    if o.len() != grid.len() {
        return Err(Error::GridMismatch(format!("channel has {} samples, grid {}", o.len(), grid.len())));
    }
    writeln!(w, "t,re_o,im_o")?;
    for (k, z) in o.iter().enumerate() {
        writeln!(w, "{:.10},{:.17e},{:.17e}", grid.time(k), z.re, z.im)?;
    }
    Ok(())
}

pub fn read_channel_csv<R: BufRead>(r: R) -> Result<(TimeGrid, Vec<Complex64>)> {
    let mut times = Vec::new();
    let mut o = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::GridMismatch(format!("line {}: {e}", lineno + 1)))?;
        if cols.len() != 3 {
            return Err(Error::GridMismatch(format!("line {}: expected 3 columns", lineno + 1)));
        }
        times.push(cols[0]);
        o.push(Complex64::new(cols[1], cols[2]));
    }
    if times.len() < 2 {
        return Err(Error::GridMismatch("need at least two samples".into()));
    }
    Ok((TimeGrid::new(times[1] - times[0], times.len())?, o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::FockSpace;
    use crate::fock::{det_from_orbitals, Op};
    use crate::greens::TimeGrid;
    use crate::rteom::bdf::BdfStats;
    use crate::testing::{max_diff, partition, random_complex_amplitudes, random_real_amplitudes};
    use nalgebra::DMatrix;

    type Mat = DMatrix<Complex64>;

    struct Oracle {
        fs: FockSpace,
        cp: CoreCoupling,
        t_full: Mat,
        t_rest: Mat,
        bra: nalgebra::RowDVector<Complex64>,
        create_c: Mat,
        ionized_ref: nalgebra::DVector<Complex64>,
    }

    impl Oracle {
        fn new(t: &ClusterAmplitudes<f64>, l: &LambdaAmplitudes) -> Self {
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

        /// `(O, HM ket)` with the HM ket as N-electron amplitudes.
        fn evaluate(&self, kind: AnsatzKind, s: &ClusterAmplitudes<Complex64>) -> (Complex64, ClusterAmplitudes<Complex64>) {
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
    }

    /// Ionized-layout Omega mapped onto ground indices, determinant
    /// normalization.
    fn omega_on_ground(cp: &CoreCoupling, w: &OmegaAmplitudes) -> ClusterAmplitudes<Complex64> {
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

    fn fake_propagation(kind: AnsatzKind, states: &[ClusterAmplitudes<Complex64>]) -> Propagation {
        let (no, nv) = (states[0].n_occupied(), states[0].n_virtual());
        Propagation {
            kind,
            grid: TimeGrid::new(0.1, states.len()).unwrap(),
            n_occupied: no,
            n_virtual: nv,
            packed: states.iter().map(|s| s.pack()).collect(),
            energy: vec![Complex64::new(0.0, 0.0); states.len()],
            energy_integral: vec![Complex64::new(0.0, 0.0); states.len()],
            stats: BdfStats::default(),
        }
    }

    const KINDS: [AnsatzKind; 4] = [AnsatzKind::Tddcc1, AnsatzKind::Tddcc1_1b, AnsatzKind::Tddcc1_2b, AnsatzKind::Tddcc2];

    #[test]
    fn omega_matches_determinant_expansion() {
        let t = random_real_amplitudes(4, 4, 0.2, 21);
        let l = random_real_amplitudes(4, 4, 0.2, 22);
        let oracle = Oracle::new(&t, &l);
        for seed in 0..3 {
            let s = random_complex_amplitudes(3, 5, 0.3, 30 + seed);
            for kind in KINDS {
                let (_, want) = oracle.evaluate(kind, &s);
                let got = omega_on_ground(&oracle.cp, &omega_amplitudes(kind, &oracle.cp, &s));
                assert!(max_diff(&got, &want) < 1e-12, "{kind}: {}", max_diff(&got, &want));
            }
        }
    }

    #[test]
    fn total_overlap_matches_determinant_expansion() {
        let t = random_real_amplitudes(4, 4, 0.2, 41);
        let l = random_real_amplitudes(4, 4, 0.2, 42);
        let oracle = Oracle::new(&t, &l);
        let states: Vec<_> = (0..3).map(|k| random_complex_amplitudes(3, 5, 0.1 * k as f64, 50 + k)).collect();
        for kind in KINDS {
            let prop = fake_propagation(kind, &states);
            let d = overlap_trajectory(&prop, &oracle.cp, &t, &l, &ComponentOptions::default()).unwrap();
            for (k, s) in states.iter().enumerate() {
                let (want, _) = oracle.evaluate(kind, s);
                assert!((d.total[k] - want).norm() < 1e-12, "{kind} at {k}: {} vs {want}", d.total[k]);
            }
            assert!(d.completeness_error() < 1e-12);
        }
    }

    #[test]
    fn textbook_omega_entries() {
        let part = partition(8, 4, 1);
        let mut t = ClusterAmplitudes::<f64>::zeros(4, 4);
        t.t1[[1, 0]] = 0.4;
        let cp = CoreCoupling::new(&part, &t).unwrap();
        let mut s = ClusterAmplitudes::<Complex64>::zeros(3, 5);
        s.t1[[2, cp.core_pos]] = Complex64::new(0.5, 0.0);
        let a = cp.ionized.virtual_.iter().position(|&p| p == 4).unwrap();
        let w = omega_amplitudes(AnsatzKind::Tddcc1, &cp, &s);
        assert!((w.omega1[[2, a]].re - 0.1).abs() < 1e-15);
        let w = omega_amplitudes(AnsatzKind::Tddcc1_1b, &cp, &s);
        assert!((w.omega1[[2, a]].re - 0.2).abs() < 1e-15);
        let zero = omega_amplitudes(AnsatzKind::Tddcc1_2b, &cp, &ClusterAmplitudes::zeros(3, 5));
        assert!(zero.omega1.iter().chain(zero.omega2.iter()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn no_ground_amplitudes_means_unit_start_and_no_hole_mediation() {
        let t = ClusterAmplitudes::<f64>::zeros(4, 4);
        let l = random_real_amplitudes(4, 4, 0.2, 61);
        let cp = CoreCoupling::new(&partition(8, 4, 1), &t).unwrap();
        let states = vec![ClusterAmplitudes::zeros(3, 5), random_complex_amplitudes(3, 5, 0.2, 62)];
        for kind in KINDS {
            let d = overlap_trajectory(&fake_propagation(kind, &states), &cp, &t, &l, &ComponentOptions::default()).unwrap();
            assert!((d.total[0] - 1.0).norm() < 1e-15);
            for (label, v) in &d.channels {
                if label.kind.is_hole_mediated() {
                    assert!(v.iter().all(|z| z.norm() == 0.0), "{label}");
                }
            }
        }
    }

    #[test]
    fn truncated_channels_still_sum_to_total() {
        let t = random_real_amplitudes(4, 4, 0.2, 71);
        let l = random_real_amplitudes(4, 4, 0.2, 72);
        let cp = CoreCoupling::new(&partition(8, 4, 1), &t).unwrap();
        let states: Vec<_> = (0..4).map(|k| random_complex_amplitudes(3, 5, 0.2, 80 + k)).collect();
        let opts = ComponentOptions { max_channels_per_kind: 2 };
        let d = overlap_trajectory(&fake_propagation(AnsatzKind::Tddcc1_2b, &states), &cp, &t, &l, &opts).unwrap();
        assert_eq!(d.channels.len(), 1 + 4 * 3);
        assert!(d.completeness_error() < 1e-12);
        assert!(d.channels.iter().filter(|(l, _)| l.is_remainder()).count() == 4);
    }

    #[test]
    fn tdcc_overlap_is_unity() {
        let t = random_real_amplitudes(4, 4, 0.2, 91);
        let cp = CoreCoupling::new(&partition(8, 4, 1), &t).unwrap();
        let states = vec![random_complex_amplitudes(3, 5, 0.2, 92); 2];
        let d = overlap_trajectory(&fake_propagation(AnsatzKind::Tdcc, &states), &cp, &t, &t, &ComponentOptions::default()).unwrap();
        assert!(d.total.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(d.channels.is_empty());
    }
}
