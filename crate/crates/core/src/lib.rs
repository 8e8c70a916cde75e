//! Simulation of Deutsch's algorithm on a single-photon, two-qubit linear
//! optics bench.
//!
//! The photon's polarization is the control qubit and its transverse spatial
//! mode is the target. Oracles are realized by a polarization Sagnac loop
//! with a dove prism; a counting layer turns the exact probabilities into
//! Poisson-distributed detector counts over a PZT voltage sweep.
//!
//! - [`qcore`]: 4-dimensional state vectors, unitaries, polarization marginals.
//! - [`optics`]: wave plates, phase shifter, beam splitter, Sagnac loop, oracles.
//! - [`deutsch`]: input preparation, the algorithm run, classification.
//! - [`labsim`]: imperfection model, sweep simulation, contrast and visibility fits.
//! - [`benchdsl`]: text format for benches, parser and compiler.

pub mod benchdsl;
pub mod deutsch;
pub mod labsim;
pub mod optics;
pub mod qcore;

pub use deutsch::{run_deutsch, FunctionClass, GateSource, PrepMode};
pub use labsim::{DetectionRecord, SweepConfig};
pub use optics::{OracleKind, SagnacConfig};
