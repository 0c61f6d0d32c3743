//! Finite-dimensional KP tau functions from Jordan-form data.
//!
//! The model: an `n×N` matrix `A`, Jordan specs `B` (`N×N`) and `D`
//! (`n×n`) with disjoint spectra, vectors `f, g` witnessing the rank-one
//! intertwining `A·B − Dᵀ·A = f·gᵀ`, and framing matrices `C` (`l×N`),
//! `F` (`l×n`).  The tau function is the `l×l` determinant
//!
//! ```text
//! τ(t) = det( F · e^{−Σ t_i (Dᵀ)^i} · A · e^{Σ t_j B^j} · Cᵀ )
//! ```
//!
//! with flows truncated at a finite index `K`.  The crate constructs these
//! models from Jordan data (including the classical rational, soliton,
//! Cauchy, and Calogero–Moser families), evaluates them on an exact
//! complex-rational backend or a complex-float backend, expands them in
//! Schur functions through Plücker coordinates, and verifies the
//! determinantal and bilinear identities that characterize KP tau
//! functions.

pub mod dd;
pub mod error;
pub mod families;
pub mod flow;
pub mod hirota;
pub mod jordan;
pub mod matrix;
pub mod rankone;
pub mod sampling;
pub mod scalar;
pub mod schur;
pub mod series;
pub mod tau;
pub mod verify;

pub use dd::CDD;
pub use error::{Error, Result};
pub use families::FamilySpec;
pub use flow::FlowVector;
pub use hirota::XiMatrix;
pub use jordan::{JordanBlock, JordanSpec};
pub use matrix::Matrix;
pub use rankone::{RankOneReport, RankOneSystem};
pub use scalar::{Scalar, Tolerance, C64, CQ};
pub use schur::{Partition, SchurExpansion};
pub use tau::{GeometricTau, MiwaPoint, ThreeFormTau};
pub use verify::{run_system_battery, Battery, CheckOutcome};
