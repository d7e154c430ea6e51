//! Simulation of interactive proof systems whose verifier is a quantum finite
//! automaton exchanging public messages with a prover.

pub mod automata;
pub mod linalg;
pub mod engine;
pub mod provers;
pub mod report;
pub mod specfile;
pub mod zoo;
