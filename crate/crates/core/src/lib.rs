//! Exact combinatorial Floer theory for pairs of equators in the cylinder.
//!
//! An equator `L` transverse to the zero section `L0` is encoded by the two weighted
//! trees of complementary regions. From them this crate reconstructs the arrangement,
//! computes the action spectrum, counts lunes, builds the filtered Floer complex and its
//! barcode, performs leaf deletion and insertion, and evaluates Hofer-distance bounds.

pub mod action;
pub mod analysis;
pub mod arrangement;
pub mod bound;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod instance;
pub mod lunes;
pub mod persistence;
pub mod rational;
pub mod suite;
pub mod surgery;
pub mod z2;

pub use error::{Error, Result};
pub use instance::{Instance, Weight};
pub use rational::Rational;
