//! Finite-state independence of infinite words.
//!
//! The crate is organised bottom-up:
//!
//! * [`word`] holds symbols, finite words and the combinatorial operations on them
//!   (occurrences, aligned occurrences, regrouping, even/odd tracks and joins).
//! * [`source`] produces deterministic, unbounded symbol streams.
//! * [`perfect`] builds perfect words and the self-similar normal word `x` with `x[2n] = x[n]`.
//! * [`normality`] computes block statistics and normality diagnostics.
//! * [`automata`] models multi-tape automata, checks determinism, removes
//!   input-free transitions and executes runs.
//! * [`compression`] estimates plain and conditional compression ratios.
//!
//! Positions in the public API are 1-indexed: `w.at(1)` is the first symbol.

pub mod automata;
pub mod compression;
pub mod normality;
pub mod perfect;
pub mod source;
pub mod word;

pub use source::WordSource;
pub use word::{Alphabet, FiniteWord, Symbol, WordError};
