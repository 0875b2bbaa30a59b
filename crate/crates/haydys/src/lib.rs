//! File formats, reports and the command line for `haydys-core`.
//!
//! - [`hmf1`]: the binary field container
//! - [`report`]: JSON report envelopes
//! - [`suites`]: the verification suites behind `verify-all`
//! - [`parallel`]: a thread-backed join for the block solves
//! - [`cli`]: argument parsing and commands

pub mod cli;
pub mod hmf1;
pub mod parallel;
pub mod report;
pub mod suites;
