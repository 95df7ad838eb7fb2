//! Finite-degree computations with vertex algebras and the factorization
//! algebras on ℂ built from them.
//!
//! The crate is layered bottom-up:
//!
//! * [`scalar`] and [`grading`]: exact Gaussian-rational arithmetic, PBW
//!   monomials, graded vectors and truncated products of weight spaces.
//! * [`vertex`]: the Heisenberg, Virasoro and affine `sl₂` presets with their
//!   mode algebra.
//! * [`correlator`]: the multiplication maps `μ`, exactly for arity ≤ 2 and
//!   numerically for radially ordered configurations, plus axiom checkers.
//! * [`functional`] and [`residue`]: finite-rank analytic functionals and
//!   their exact evaluation by residues or by trapezoid quadrature.
//! * [`geometry`], [`expression`] and [`factorization`]: open sets, the
//!   expressions `E(U)`, evaluation, relation kernels, weight projections
//!   and the structural checks on the resulting precosheaf.

pub mod correlator;
pub mod error;
pub mod expression;
pub mod factorization;
pub mod functional;
pub mod geometry;
pub mod grading;
pub mod report;
pub mod residue;
pub mod scalar;
pub mod vertex;

pub use correlator::{MuOptions, PointConfiguration};
pub use error::{Error, Result};
pub use expression::{EvalOptions, Expression};
pub use functional::{Factor, Functional};
pub use geometry::OpenSet;
pub use report::CheckReport;
pub use grading::{DegreeWindow, GradedVector, Generator, ModeFactor, Monomial, ProductVector};
pub use scalar::{GaussRat, Real, Scalar};
pub use vertex::{Preset, PresetKind, PresetSpec};
