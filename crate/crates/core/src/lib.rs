//! Mining and classification of event-listener registrations in JavaScript.
//!
//! The crate is `no_std` (with `alloc`) and contains the pure parts of the
//! pipeline: a JavaScript front end, access-path resolution, occurrence
//! counting, the binomial rarity tests and the evaluation harness. File
//! system access, serialization formats and the command-line driver live in
//! the `deadlisten` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod corpus;
pub mod eval;
pub mod miner;
pub mod path;
pub mod stats;
pub mod syntax;
