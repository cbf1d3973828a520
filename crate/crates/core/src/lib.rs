//! Exact arithmetic on even integral lattices and decision procedures for
//! counting elliptic fibrations on K3 surfaces from their Picard lattice.

pub mod catalog;
pub mod dynkin;
pub mod error;
pub mod fibration;
pub mod genus;
pub mod lattice;
mod lll;
pub mod matrix;
pub mod named;
pub mod quadform;
pub mod short_vectors;
pub mod snf;

pub use error::{Error, Result};
pub use lattice::{Lattice, LatticeVector, Signature};
pub use snf::{smith_normal_form, SnfResult};
