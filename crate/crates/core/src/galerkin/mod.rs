//! The finite-dimensional system for the coefficients `g` of
//! `v = Σ g_k w_k`: trilinear tensor, lift matrices, projected forcing and
//! the residual `q_n` left outside the Galerkin space.

mod checkpoint;
mod convolution;
mod pseudo;
mod residual;
mod system;
mod tensor;

pub use checkpoint::Checkpoint;
pub use convolution::advect;
pub use pseudo::PseudoSpectral;
pub use residual::{q_residual, ResidualReport};
pub use system::{
    reconstruct_u, reconstruct_v, BetaMatrices, Formulation, GalerkinState, GalerkinSystem,
    NonlinearPath, PathChoice, RhsParts, SourceProjection, SystemOptions,
};
pub use tensor::TrilinearTensor;
