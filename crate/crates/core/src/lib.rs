//! Spectral support-function geometry of smooth, strictly convex bodies in R²
//! and R³.
//!
//! Bodies are represented by their support functions sampled on a grid of the
//! unit circle or sphere. On top of that the crate computes the affine
//! differential geometry of the boundary (Gauss curvature, affine metric,
//! affine mean curvature), mixed curvatures and mixed volumes, the affine
//! Wirtinger inequality with its equality cases, and (weighted) centro-affine
//! curvature flows.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod affine;
pub mod body;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod harmonics;
pub mod mixed;
pub mod sphere;
pub mod wirtinger;

pub use affine::{identity_residual, AffineData};
pub use body::{BodyFile, ConvexBody};
pub use error::{Error, Result};
pub use flow::{FlowKind, FlowParams, FlowState, Normalization};
pub use harmonics::Harmonics;
pub use sphere::{integrate, ScalarField, SphereGrid, SymTensorField};
pub use wirtinger::{wirtinger_report, WirtingerReport};
