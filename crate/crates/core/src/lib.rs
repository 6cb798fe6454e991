//! Two-level emitters coupled to a square photonic lattice threaded by a
//! synthetic magnetic field.
//!
//! The crate builds Harper-Hofstadter Hamiltonians, evolves single-excitation
//! emitter-photon states, and provides the projected Landau-level theories:
//! Landau-photon polaritons in the resonant regime and complex dipole-dipole
//! couplings in the dispersive regime. Disorder ensembles are built on top.
//!
//! Units: lengths in lattice spacings, frequencies in units of the hopping
//! `J` (which may be set to any positive value), times in inverse frequency.

pub mod continuum;
pub mod dipole;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod lattice;
pub mod linalg;
pub mod lpp;
pub mod spectrum;

pub use error::{Error, Result};
pub use exec::Execution;
pub use lattice::{DissipationProfile, Gauge, LatticeSpec, Position, Site};
pub use linalg::{CMat, SparseHermitianOperator, C64};
pub use spectrum::{DiagonalizationMode, SpectrumResult};
