//! Quantum metric tensors of parametrized wavefunction families sampled on
//! uniform 2D grids.
//!
//! The crate computes the Berry connection and the quantum metric
//! `G_ij = Re(∂_iψ, ∂_jψ) − β_iβ_j`, applies parameter-dependent gauge
//! transformations `ψ → e^{iα}ψ`, and evaluates the covariant metric
//! `Re(D_iψ, D_jψ)` built from a user-declared connection `Γ_i`. The Landau
//! problem is provided as a verified model, with closed-form values in
//! [`oracle`].

pub mod error;
pub mod expr;
pub mod family;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod landau;
pub mod oracle;
pub mod params;
pub mod units;

pub use error::{QmtError, Result};
pub use expr::{parse, ExprAst};
pub use family::{make_expr_family, param_derivative, DerivativeScheme, Normalization, StateFamily};
pub use field::{apply_phase, expectation, inner_product, ComplexField, RealField};
pub use geometry::{
    beta_shift_check, berry_connection, covariant_qmt, gauge_transform, line_element, qmt,
    qmt_projected, transform_connection, transform_connection_exact, Connection, GaugePhase,
    QmtResult,
};
pub use grid::Grid2D;
pub use params::ParamPoint;
pub use units::UnitSystem;
