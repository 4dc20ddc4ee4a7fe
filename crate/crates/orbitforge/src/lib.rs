//! A workbench for structures with small orbit growth: reducts of unary
//! structures and covering reducts of strongly trivial finite covers,
//! represented as finite data.
//!
//! The library computes exact orbit counts for the represented infinite
//! groups, enumerates first-order reducts and covering reducts, and checks
//! the relevant growth bounds with exact integer arithmetic. Every symbolic
//! result can be cross-checked against a brute-force finite permutation
//! group obtained by truncating the structure to finitely many base points
//! per orbit.

pub mod caps;
pub mod error;
pub mod growth;
pub mod io;
pub mod orbits;
pub mod partitions;
pub mod permgroup;
pub mod reducts;
pub mod structures;
pub mod util;

pub use caps::Caps;
pub use error::{Error, Result};
