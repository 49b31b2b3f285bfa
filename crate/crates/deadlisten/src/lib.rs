//! File formats, project mining and the command-line driver around
//! `deadlisten-core`.

pub mod check;
pub mod cli;
pub mod formats;
pub mod manifest;
pub mod project;
pub mod report;

pub use deadlisten_core as core_api;
