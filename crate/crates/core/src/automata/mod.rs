//! Verifier automata, their step operators, and the classical automata they embed.

pub mod npfa;
pub mod rfa;
mod step;
mod verifier;

use thiserror::Error;

pub use step::{
    build_step_operator, inputs_up_to, validate_public, validate_wellformed, PublicReport, PublicViolation,
    RawDelta, RawTransition, StepOperator, WellformednessFailure, WellformednessReport,
};
pub use verifier::{
    announcement_name, Alphabets, HeadKind, StateClass, StateSet, TableBuilder, TapeSymbol,
    VerifierSpec, BLANK,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("symbol {0:?} is not in the input alphabet")]
    Alphabet(char),
    #[error("malformed automaton: {0}")]
    Structure(String),
    #[error("transition table is not unitary: {0}")]
    NotUnitary(String),
    #[error("conflicting head directions for target {state},{comm}")]
    DirectionConflict { state: String, comm: String },
}
