//! Spectrum of the Hessian of the action at a solitary wave, the
//! Vakhitov-Kolokolov inner product, the Liouville normal form and the
//! Casimir property of `F2`, `F3`.

pub mod casimir;
pub mod eigen;
pub mod liouville;
pub mod operator;
pub mod report;
pub mod vk;

pub use casimir::{apply_hamiltonian_operator, casimir_residual, CasimirReport};
pub use eigen::{EigenPairs, SymTridiagonal};
pub use liouville::{liouville_check, LiouvilleReport};
pub use operator::{assemble_hessian, DiscreteOperator};
pub use report::{spectral_report, spectral_report_with_dk, tol_zero, SpectralReport, DEFAULT_DK};
pub use vk::{hessian_identity_residual, vk_closed_form, vk_crosscheck, vk_inner_product, IdentityCheck, VkSolve};

use crate::error::Result;

/// The `n` smallest eigenpairs of the operator.
pub fn lowest_eigenpairs(op: &DiscreteOperator, n: usize) -> Result<EigenPairs> {
    op.matrix().lowest_eigenpairs(n)
}
