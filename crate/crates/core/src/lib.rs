//! Model order selection driven by the misspecified Cramér–Rao bound.
//!
//! Each candidate model is scored by its squared bias plus the mapped MCRB
//! covariance of the parameter of interest, and the smallest score wins.
//! Two applications are provided: interference-covariance rank selection for
//! array direction finding ([`doa`]) and autoregressive order selection for
//! spectral estimation ([`ar`]).
//!
//! Everything is generic over the scalar type; the aliases at the crate root
//! pin it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ar;
pub mod doa;
pub mod error;
pub mod info;
pub mod mcrb;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use info::InfoCriteria;
pub use mcrb::{
    mapped_cov_trace, sandwich_mcrb, select_model, symmetric_inverse, CriterionScore, SandwichPair,
    SelectionResult, MAX_CONDITION,
};
pub use scalar::Real;
pub use search::{golden_section_max, grid_then_golden, GridSpec};

pub type Complex = doa::Cplx<f64>;
pub type Sandwich = SandwichPair<f64>;
pub type Score = CriterionScore<f64>;
pub type Selection = SelectionResult<f64>;
pub type Grid = GridSpec<f64>;
pub type Criteria = InfoCriteria<f64>;
pub type DoaScenario = doa::DoaScenario<f64>;
pub type DoaSelection = doa::DoaSelection<f64>;
pub type Hermitian = doa::HermitianMatrix<f64>;
pub type Truncated = doa::TruncatedCovariance<f64>;

pub type Sandwich32 = SandwichPair<f32>;
pub type Selection32 = SelectionResult<f32>;
