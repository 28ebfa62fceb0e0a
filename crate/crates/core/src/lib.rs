//! Anchored-cluster densities of the critical FK / loop models on the upper
//! half-plane, SLE observables, and the BPZ crossing data behind their
//! normalisation.
//!
//! Every closed form is checked against an independent ODE engine
//! ([`bpz_ode`]) and, at κ = 6, against triangular-lattice site percolation
//! ([`lattice_mc`]).

pub mod error;
pub mod params;
pub mod specfun;
pub mod bpz_ode;
pub mod solutions;
pub mod densities;
pub mod lattice_mc;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
