//! Coupled-cluster singles and doubles.

pub mod amplitudes;
pub mod blocks;
pub mod ground;
pub mod lambda;
pub mod newton;
pub mod residual;

pub use amplitudes::{ClusterAmplitudes, LambdaAmplitudes, Scalar};
pub use blocks::Blocks;
pub use ground::{solve_ccsd, solve_ccsd_with, CcsdOptions, CcsdSolution, CcsdStrategy};
pub use lambda::{lambda_residual, solve_lambda, LambdaSolution};
pub use residual::{energy, residual};
