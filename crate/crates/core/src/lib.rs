//! Numerical harmonic theory for tangent-bundle-valued differential forms
//! and almost complex structures on chart-based Riemannian manifolds.
//!
//! The crate provides:
//! - chart geometry with Levi-Civita connection data and curvature in the
//!   convention R(X,Y) = -∇_X∇_Y + ∇_Y∇_X + ∇_{[X,Y]} (`geometry`),
//! - the operator stack d, δ, Δ = dδ+δd, ∇², and the Weitzenböck curvature
//!   term on tangent-valued forms (`forms`),
//! - almost complex structures with Nijenhuis tensor, harmonicity residuals,
//!   and structure defect measures (`jstructure`),
//! - residual-based verification of the Weitzenböck, Bochner, trace, and
//!   curvature-contraction identities, including the S⁶ obstruction scan
//!   (`identities`),
//! - a constrained gradient flow relaxing grid fields of almost complex
//!   structures on the flat 2-torus (`flow`).

pub mod error;
pub mod flow;
pub mod forms;
pub mod geometry;
pub mod identities;
pub mod jstructure;
pub mod sampling;

pub use error::{Error, Result};
pub use forms::{BundleForm, TangentTensorField, TensorValue};
pub use geometry::{ChartPoint, FrameAt, ManifoldChart};
pub use identities::{CurvatureTerms, ResidualReport};
pub use jstructure::{AlmostComplexField, DefectSummary};
