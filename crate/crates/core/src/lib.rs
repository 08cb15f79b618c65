//! Dense quantum-circuit simulation library for studying how post-selection,
//! ancilla thermalisation and pi/3 fixed-point oblivious amplitude
//! amplification trade measurements for qubits and gates.
//!
//! The crate is organised around six pieces:
//!
//! - [`state`]: pure states and density matrices with gate application,
//!   partial trace, projection, fidelity and sampling (little-endian qubit
//!   ordering, bit strings printed most-significant qubit first);
//! - [`gates`]: the gate library, inverse QFT, Hamiltonian exponentiation,
//!   trotterisation and gate counting over a documented decomposition
//!   registry;
//! - [`hamiltonians`]: built-in benchmarks, a randomized generator and
//!   eigensystem/shift services;
//! - [`circuits`]: builders and simulators for the repeat-until-success,
//!   thermalisation and amplification strategies;
//! - [`noise`]: thermal-relaxation channels and noisy execution;
//! - [`analysis`]: the closed-form predictions and resource tables the
//!   simulators are checked against;
//! - [`experiments`]: reproducible experiment runners behind the CLI.

pub mod analysis;
pub mod circuits;
pub mod decompose;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod hamiltonians;
pub mod noise;
pub mod state;

pub use error::{Error, Result};
