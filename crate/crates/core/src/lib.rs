//! Standing waves of near-parallel vortex filaments.
//!
//! Symmetric Fourier fields ([`lattice`]), closed-form spectra of the linearization
//! ([`spectrum`]), lattice operators and preconditioners ([`operator`]), the staged
//! Newton solver with excision bookkeeping ([`nash_moser`]), the kernel equation and
//! perturbation series ([`bifurcation`]), time integration of the filament system
//! ([`dynamics`]) and relative equilibria and traveling waves ([`orbits`]).

pub mod error;
pub mod lattice;
pub mod spectrum;
pub mod operator;
pub mod nash_moser;
pub mod bifurcation;
pub mod dynamics;
pub mod orbits;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
