//! Real-time propagation of the ionized amplitudes.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ansatz::AnsatzKind;
use super::bdf::{integrate_on_grid_with, BdfOptions, BdfStats};
use super::rhs::{eom_rhs, effective_amplitudes};
use super::system::CoreCoupling;
use crate::cc::{energy, ClusterAmplitudes};
use crate::error::{Error, Result};
use crate::greens::{GreensTrajectory, TimeGrid};
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    pub dt: f64,
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Amplitude norm beyond which the run is declared diverged.
    pub divergence_threshold: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt: 0.1, t_max: 900.0, rtol: 1e-9, atol: 1e-11, divergence_threshold: 1e3 }
    }
}

/// Snapshot at one grid time.
#[derive(Debug, Clone)]
pub struct PropagationState {
    pub time: f64,
    pub s: ClusterAmplitudes<Complex64>,
    /// `ln N_c(t) = i * energy_integral`.
    pub log_norm: Complex64,
    pub energy_integral: Complex64,
}

/// Propagation result sampled on a uniform grid. Amplitudes are kept
/// packed; [`Propagation::state`] expands one sample.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub kind: AnsatzKind,
    pub grid: TimeGrid,
    pub n_occupied: usize,
    pub n_virtual: usize,
    pub packed: Vec<Vec<Complex64>>,
    /// Instantaneous `E^(N-1)(t)`.
    pub energy: Vec<Complex64>,
    /// `int_0^t E^(N-1)`.
    pub energy_integral: Vec<Complex64>,
    pub stats: BdfStats,
}

impl Propagation {
    pub fn len(&self) -> usize {
        self.packed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    pub fn amplitudes(&self, k: usize) -> ClusterAmplitudes<Complex64> {
        ClusterAmplitudes::unpack(&self.packed[k], self.n_occupied, self.n_virtual)
    }

    pub fn state(&self, k: usize) -> PropagationState {
        PropagationState {
            time: self.grid.time(k),
            s: self.amplitudes(k),
            log_norm: Complex64::i() * self.energy_integral[k],
            energy_integral: self.energy_integral[k],
        }
    }
}

/// Integrates the amplitude equations of `kind` from `S = 0`. The energy
/// integral is carried as an extra component, offset by `energy_shift * t`
/// to keep its magnitude small.
pub fn propagate(
    kind: AnsatzKind,
    h: &Hamiltonian,
    coupling: &CoreCoupling,
    energy_shift: f64,
    opts: &PropagationOptions,
) -> Result<Propagation> {
    let grid = TimeGrid::span(opts.dt, opts.t_max)?;
    let blocks = coupling.blocks(h);
    let (no, nv) = (coupling.n_occupied(), coupling.n_virtual());
    let n = ClusterAmplitudes::<Complex64>::packed_len(no, nv);
    let shift = Complex64::new(energy_shift, 0.0);
    let rhs = |_t: f64, y: &DVector<Complex64>| -> Result<DVector<Complex64>> {
        let s = ClusterAmplitudes::unpack(&y.as_slice()[..n], no, nv);
        let (ds, e) = eom_rhs(kind, &blocks, coupling, &s)?;
        let mut out = ds.pack();
        out.push(e - shift);
        Ok(DVector::from_vec(out))
    };
    let threshold = opts.divergence_threshold;
    let check = |t: f64, y: &DVector<Complex64>| -> Result<()> {
        let norm = y.as_slice()[..n].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm <= threshold) {
            return Err(Error::Diverged { time: t, norm });
        }
        Ok(())
    };
    let times: Vec<f64> = grid.times().collect();
    let bdf = BdfOptions { rtol: opts.rtol, atol: opts.atol, max_step: f64::INFINITY, first_step: None };
    let (ys, stats) = integrate_on_grid_with(rhs, 0.0, DVector::zeros(n + 1), &times, bdf, check)?;
    let mut packed = Vec::with_capacity(ys.len());
    let mut energies = Vec::with_capacity(ys.len());
    let mut integral = Vec::with_capacity(ys.len());
    for (k, y) in ys.iter().enumerate() {
        let s: Vec<Complex64> = y.as_slice()[..n].to_vec();
        let amps = ClusterAmplitudes::unpack(&s, no, nv);
        energies.push(energy(&blocks, &effective_amplitudes(kind, coupling, &amps)));
        integral.push(y[n] + shift * grid.time(k));
        packed.push(s);
    }
    Ok(Propagation { kind, grid, n_occupied: no, n_virtual: nv, packed, energy: energies, energy_integral: integral, stats })
}

/// `G(t) = -i exp(-i (E_N t - int_0^t E^(N-1))) O(t)`, with `O = 1` when no
/// overlap is given.
pub fn cumulant_greens(prop: &Propagation, e_ground: f64, overlap: Option<&[Complex64]>) -> Result<GreensTrajectory> {
    if let Some(o) = overlap {
        if o.len() != prop.len() {
            return Err(Error::GridMismatch(format!("overlap has {} samples, trajectory {}", o.len(), prop.len())));
        }
    }
    let g = (0..prop.len())
        .map(|k| {
            let t = prop.grid.time(k);
            let phase = Complex64::new(0.0, -1.0) * (e_ground * t - prop.energy_integral[k]);
            let o = overlap.map(|o| o[k]).unwrap_or(Complex64::new(1.0, 0.0));
            -Complex64::i() * phase.exp() * o
        })
        .collect();
    Ok(GreensTrajectory::new(prop.grid, g, prop.kind.name()).with_energy(prop.energy.clone()))
}
