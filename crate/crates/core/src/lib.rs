//! Desk-scale numerics for the decoupling approach to quantum channel coding.
//!
//! The crate covers dense labeled tensor algebra ([`tensor`]), channels in
//! Kraus/Stinespring/Choi form ([`channel`]), Haar and Weyl sampling
//! ([`random`]), the one-shot decoupling average ([`decoupling`]), the
//! Uhlmann decoder ([`decoder`]), typical subspaces ([`typicality`]) and
//! end-to-end random-subspace coding experiments ([`coding`]).

pub mod channel;
pub mod coding;
pub mod decoder;
pub mod decoupling;
mod error;
pub mod linalg;
pub mod metrics;
pub mod optimize;
pub mod random;
pub mod tensor;
pub mod typicality;

pub use channel::{coherent_information, Channel, ChannelDocument, StinespringIsometry};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use random::SeededSource;
pub use tensor::{
    maximally_entangled, maximally_entangled_on, schmidt, tensor, DensityOperator, Factor, LinearOp, Schmidt,
    StateVector, TensorProduct, TensorSpace,
};

/// Tolerance for Hermiticity, unit trace, isometry and trace-preservation checks.
pub const TOL: f64 = 1e-10;

/// Tolerance on the norm of a normalized state vector.
pub const NORM_TOL: f64 = 1e-12;

/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are treated as numerical zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Default cap on materialized matrix entries (2^26).
pub const DEFAULT_BUDGET: u128 = 1 << 26;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "DECOUPLING_LAB_BUDGET";

/// Dimension budget, read from `DECOUPLING_LAB_BUDGET` when set.
pub fn dimension_budget() -> u128 {
    #[cfg(not(target_arch = "wasm32"))]
    if let Some(v) = std::env::var(BUDGET_ENV).ok().and_then(|s| s.trim().parse::<u128>().ok()) {
        return v;
    }
    DEFAULT_BUDGET
}

pub(crate) fn check_budget(required: u128) -> Result<()> {
    let budget = dimension_budget();
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}
