//! Ground-state amplitudes re-expressed in the index space of the ionized
//! reference `a_c |ref>`.

use ndarray::{Array1, Array3};
use num_complex::Complex64;

use crate::cc::{Blocks, ClusterAmplitudes};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ReferencePartition};

/// Ground-state amplitudes split by whether they carry the core index.
#[derive(Debug, Clone)]
pub struct CoreCoupling {
    /// N-electron partition.
    pub ground: ReferencePartition,
    /// (N-1)-electron partition; the core is the virtual at `core_pos`.
    pub ionized: ReferencePartition,
    pub core_pos: usize,
    /// `T` without core rows, laid out on the ionized partition.
    pub t_rest: ClusterAmplitudes<f64>,
    /// `t_c^a` on ionized virtual positions (zero at the core).
    pub tc1: Array1<f64>,
    /// `t_{cj}^{ab}` on ionized occupied/virtual positions.
    pub tc2: Array3<f64>,
}

impl CoreCoupling {
    pub fn new(ground: &ReferencePartition, t: &ClusterAmplitudes<f64>) -> Result<Self> {
        let c = ground.core_index;
        let core_occ = ground
            .occupied
            .iter()
            .position(|&p| p == c)
            .ok_or(Error::CoreUnoccupied(c))?;
        if t.n_occupied() != ground.occupied.len() || t.n_virtual() != ground.virtual_.len() {
            return Err(Error::InvalidParameter("amplitude shape does not match partition".into()));
        }
        let ionized = ground.ionized();
        let core_pos = ionized.virtual_.iter().position(|&p| p == c).expect("core is an ionized virtual");
        let (no, nv) = (ionized.occupied.len(), ionized.virtual_.len());
        // ionized position -> ground position
        let occ_map: Vec<usize> =
            ionized.occupied.iter().map(|p| ground.occupied.iter().position(|q| q == p).unwrap()).collect();
        let vir_map: Vec<Option<usize>> =
            ionized.virtual_.iter().map(|p| ground.virtual_.iter().position(|q| q == p)).collect();

        let mut t_rest = ClusterAmplitudes::zeros(no, nv);
        let mut tc1 = Array1::zeros(nv);
        let mut tc2 = Array3::zeros((no, nv, nv));
        for (a, va) in vir_map.iter().enumerate() {
            let Some(ga) = *va else { continue };
            tc1[a] = t.t1[[core_occ, ga]];
            for (i, &gi) in occ_map.iter().enumerate() {
                t_rest.t1[[i, a]] = t.t1[[gi, ga]];
            }
            for (b, vb) in vir_map.iter().enumerate() {
                let Some(gb) = *vb else { continue };
                for (j, &gj) in occ_map.iter().enumerate() {
                    tc2[[j, a, b]] = t.t2[[core_occ, gj, ga, gb]];
                    for (i, &gi) in occ_map.iter().enumerate() {
                        t_rest.t2[[i, j, a, b]] = t.t2[[gi, gj, ga, gb]];
                    }
                }
            }
        }
        Ok(Self { ground: ground.clone(), ionized, core_pos, t_rest, tc1, tc2 })
    }

    pub fn n_occupied(&self) -> usize {
        self.ionized.occupied.len()
    }

    pub fn n_virtual(&self) -> usize {
        self.ionized.virtual_.len()
    }

    /// Integral blocks around the ionized reference.
    pub fn blocks(&self, h: &Hamiltonian) -> Blocks<Complex64> {
        Blocks::new(h, &self.ionized.occupied, &self.ionized.virtual_)
    }
}
