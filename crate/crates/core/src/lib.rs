//! Grounded and lifted weighted model counting over the `H_k` query family.
//!
//! The crate grounds Boolean combinations of the queries `h_k0, ..., h_kk`
//! into monotone lineages, compiles them with a trace-producing DPLL
//! counter, evaluates safe combinations by Möbius inclusion-exclusion and
//! implements the diagram transformations that relate FBDDs, dec-DNNFs and
//! DLDDs for this family.

pub mod compiler;
pub mod diagram;
pub mod error;
pub mod experiment;
pub mod formula;
pub mod io;
pub mod lifted;
pub mod lineage;
pub mod oracle;
pub mod transforms;

pub use error::{Error, Result};
