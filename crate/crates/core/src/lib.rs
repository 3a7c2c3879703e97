//! Torsion-free normal subgroups of hyperbolic triangle groups.
//!
//! The crate is `no_std` (it needs `alloc`). It covers the algorithmic side of
//! a census of regular dessins d'enfants and quasiplatonic surfaces:
//!
//! * [`signatures`]: exact Riemann–Hurwitz arithmetic for triangle signatures.
//! * [`fpgroup`]: words, triangle presentations, coset tables, Todd–Coxeter
//!   enumeration and Schreier generators.
//! * [`normal_search`]: exhaustive search for normal subgroups of bounded index.
//! * [`quotient`]: analysis of regular coset tables (orders, genus, keys).
//! * [`singerman`]: inclusions between triangle groups and surface
//!   identification via normalizers.
//! * [`bounds`]: growth-bound arithmetic.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod fpgroup;
pub mod normal_search;
pub mod quotient;
pub mod signatures;
pub mod singerman;

pub use fpgroup::{CosetTable, Letter, Presentation, Word};
pub use normal_search::{enumerate_normal, SearchConfig, SearchMode};
pub use quotient::QuotientInfo;
pub use signatures::Signature;
