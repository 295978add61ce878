//! Higher-order network alignment built on tensor Kronecker product structure.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] sparse symmetric motif tensors, small dense symmetric tensors
//!   and their vector contractions;
//! * [`kron`] implicit, rank-1 and rank-r contractions against `B ⊗ A`;
//! * [`eigen`] Z-eigenpairs via shifted power iteration and the decoupling check;
//! * [`motifs`] graphs, clique enumeration and clique tensors;
//! * [`align`] TAME, LowRankTAME and Λ-TAME;
//! * [`matching`] max-weight bipartite matching and alignment scores;
//! * [`refine`] nearest-neighbour local search;
//! * [`synth`] synthetic alignment problems;
//! * [`cli`] file formats, run records and the command-line front end.
//!
//! Vertices are 0-based everywhere inside the library. Files use 1-based ids.

pub mod align;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod kron;
pub mod matching;
pub mod motifs;
pub mod refine;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
