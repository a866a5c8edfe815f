//! Executable flowgraph factorizations of DCT-II/III for lengths `q * 2^m`,
//! with dense-matrix oracles, operation counting, constant folding and
//! closed-form complexity formulas.

pub mod cli;
pub mod complexity;
pub mod error;
pub mod factorizer;
pub mod flowgraph;
pub mod oracle;

pub use error::{Error, Result};
pub use factorizer::{BaseLibrary, ScaledFactorization};
pub use flowgraph::{OpCount, PlanBuilder, PlanGraph};
