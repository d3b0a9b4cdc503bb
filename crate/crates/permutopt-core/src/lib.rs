//! Core algorithms for permutation-randomized gradient optimization.
//!
//! The crate is `no_std` (with `alloc`) and carries no IO: dense matrices
//! and deterministic randomness ([`numkit`]), the coordinate-permutation
//! operator with its stagnation trigger ([`operators`]), step-oriented
//! optimizers behind one interface plus the randomized wrapper and run
//! loop ([`optimizers`]), objective oracles ([`problems`]), and run
//! diagnostics such as coverage grids, contraction profiles, and ICC
//! statistics ([`analysis`]).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod numkit;
pub mod operators;
pub mod optimizers;
pub mod problems;

pub use error::CoreError;
