//! Numerical workbench for Haydys monopoles on R³.
//!
//! The crate is `no_std` with `alloc`. Fields live on a truncated cubic
//! lattice, all gauge algebra is su(2) at field level, and every reduction
//! runs through a fixed pairwise tree so results do not depend on how the
//! caller schedules work.
//!
//! Module map:
//! - [`lie`], [`grid`], [`field`], [`calculus`]: lattice geometry and exterior calculus
//! - [`bps`]: the charge-1 Bogomolny seed and its diagnostics
//! - [`linops`], [`krylov`]: the operator `D = d₂ ⊕ d₁*`, its adjoint, spectra, Green solves
//! - [`haydys`]: the Haydys map, gauge fixing, and the fixed-point construction
//! - [`dimred`]: static reduction of 4D complex connections
//! - [`linear_model`]: the quaternionic linear model and the field-level moment maps

#![no_std]

extern crate alloc;

pub mod bps;
pub mod calculus;
pub mod dimred;
mod error;
pub mod field;
pub mod grid;
pub mod haydys;
pub mod krylov;
pub mod lie;
pub mod linear_model;
pub mod linops;
pub mod reduce;
pub mod rng;

pub use error::Error;
pub use field::{Field0, Field1, Pair};
pub use grid::Grid;
pub use lie::LieValue;

pub type Result<T> = core::result::Result<T, Error>;
