//! Exact levelwise boundary equations for linear subvarieties of strata of
//! differentials.
//!
//! The crate models an enhanced level graph together with an adapted
//! homology basis, and computes from a system of linear period equations:
//! the equations of the boundary at every level, the residue relations forced
//! by monodromy, and a coordinate-free cross-check of the former.

pub mod boundary;
pub mod fixture;
pub mod graph;
pub mod homology;
pub mod linalg;
pub mod monodromy;
pub mod report;
pub mod scalar;
pub mod validation;

pub use boundary::{boundary_equations, coordfree_boundary, BoundaryEquationSet};
pub use fixture::{parse_fixture, Fixture, ParseError};
pub use graph::{EnhancedLevelGraph, Level};
pub use homology::AdaptedBasisModel;
pub use scalar::Scalar;
