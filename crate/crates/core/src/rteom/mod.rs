//! Real-time equations of motion for the ionized cluster amplitudes.

pub mod ansatz;
pub mod bdf;
pub mod delta;
pub mod propagate;
pub mod rhs;
pub mod system;

pub use ansatz::AnsatzKind;
pub use delta::effective_delta;
pub use propagate::{cumulant_greens, propagate, Propagation, PropagationOptions, PropagationState};
pub use rhs::{effective_amplitudes, eom_rhs};
pub use system::CoreCoupling;
