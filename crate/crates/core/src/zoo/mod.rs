//! Concrete protocols packaged with honest provers, adversary families,
//! language oracles and claimed error bounds.

mod center;
mod npfa_embed;
mod odd;
mod rfa_embed;
mod upal;
mod zero;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{HeadKind, SpecError, VerifierSpec};
use crate::engine::{acceptance_bounds, run_protocol, EngineConfig, EngineError, RunResult};
use crate::provers::{best_schedule_acceptance, Prover, ProverStrategy, ScheduleFamily};

pub use center::{center_adversary_family, center_protocol, center_timing_prover};
pub use npfa_embed::{npfa_embed, NpfaResponder};
pub use odd::odd_protocol;
pub use rfa_embed::rfa_embed;
pub use upal::upal_protocol;
pub use zero::zero_public_protocol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZooError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown protocol {0:?}")]
    Unknown(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Claims {
    /// Acceptance probability guaranteed on members with the honest prover.
    pub completeness: Option<f64>,
    /// Rejection probability guaranteed on non-members against every prover.
    pub soundness: Option<f64>,
    #[serde(default)]
    pub public: bool,
    #[serde(default)]
    pub classical_prover: bool,
    #[serde(default)]
    pub committed_prover: bool,
    #[serde(default)]
    pub interaction_bound: Option<usize>,
    #[serde(default)]
    pub poly_time: bool,
}

pub type Language = Arc<dyn Fn(&str) -> bool + Send + Sync>;
pub type StrategyFamily = Arc<dyn Fn(&str) -> Vec<Prover> + Send + Sync>;

#[derive(Clone)]
pub enum AdversaryFamily {
    /// Every message schedule of the given family, searched exhaustively.
    Schedules(ScheduleFamily),
    /// An explicit list of strategies for each input.
    Strategies(StrategyFamily),
}

impl fmt::Debug for AdversaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryFamily::Schedules(s) => write!(f, "Schedules({s:?})"),
            AdversaryFamily::Strategies(_) => write!(f, "Strategies(..)"),
        }
    }
}

#[derive(Clone)]
pub struct ProtocolBundle {
    pub name: String,
    pub params: BTreeMap<String, usize>,
    pub verifier: VerifierSpec,
    pub honest: Prover,
    pub adversaries: AdversaryFamily,
    pub claims: Claims,
    pub language: Option<Language>,
    /// Dimension of the final Fourier transform, if the protocol uses one.
    pub qft_dim: Option<usize>,
    /// Construction choices the protocol's definition leaves open.
    pub notes: Vec<String>,
}

impl fmt::Debug for ProtocolBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolBundle")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("honest", &self.honest.id())
            .field("adversaries", &self.adversaries)
            .field("claims", &self.claims)
            .field("notes", &self.notes)
            .finish()
    }
}

/// Worst case found over an adversary family for one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversaryOutcome {
    pub prover_id: String,
    pub p_acc_lower: f64,
    pub p_acc_upper: f64,
    pub p_rej_lower: f64,
    pub interactions: Option<usize>,
    pub steps: usize,
    pub candidates: usize,
}

/// How `TableBuilder::complete` fills the rows a table leaves unspecified.
pub const COMPLETION_NOTE: &str = "unlisted (state, symbol) rows of non-halting states go to fresh \
rejecting states q_rej,c<k>; halting columns are completed by Gram-Schmidt";

pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

impl ProtocolBundle {
    pub fn in_language(&self, x: &str) -> Option<bool> {
        self.language.as_ref().map(|l| l(x))
    }

    /// `10·(n+2)·N²` for protocols ending in an `N`-point Fourier transform,
    /// `4·(n+2)` otherwise.
    pub fn default_max_steps(&self, n: usize) -> usize {
        match self.qft_dim {
            Some(dim) => 10 * (n + 2) * dim * dim,
            None => 4 * (n + 2),
        }
    }

    pub fn engine_config(&self, x: &str) -> EngineConfig {
        EngineConfig::with_max_steps(self.default_max_steps(x.chars().count()))
    }

    pub fn run(&self, p: &dyn ProverStrategy, x: &str, cfg: &EngineConfig) -> Result<RunResult, EngineError> {
        run_protocol(&self.verifier, p, x, cfg)
    }

    pub fn run_honest(&self, x: &str) -> Result<RunResult, EngineError> {
        self.run(self.honest.as_ref(), x, &self.engine_config(x))
    }

    /// Number of prover rounds the schedule search covers for input `x`.
    pub fn schedule_rounds(&self, x: &str, cfg: &EngineConfig) -> usize {
        match self.verifier.kind {
            HeadKind::OneWay => x.chars().count() + 1,
            HeadKind::TwoWay => cfg.max_steps,
        }
    }

    /// Maximizes the acceptance upper bound over the adversary family.
    pub fn worst_case(
        &self,
        x: &str,
        cfg: &EngineConfig,
        budget: usize,
    ) -> Result<AdversaryOutcome, EngineError> {
        match &self.adversaries {
            AdversaryFamily::Schedules(family) => {
                let rounds = self.schedule_rounds(x, cfg);
                let opt = best_schedule_acceptance(&self.verifier, x, rounds, *family, cfg, budget)?;
                Ok(AdversaryOutcome {
                    prover_id: opt.schedule.describe(self.verifier.alphabets.comm()),
                    p_acc_lower: opt.run.p_acc,
                    p_acc_upper: opt.p_acc_upper,
                    p_rej_lower: opt.run.p_rej,
                    interactions: opt.run.interactions,
                    steps: opt.run.steps_taken,
                    candidates: opt.nodes,
                })
            }
            AdversaryFamily::Strategies(gen) => {
                let provers = gen(x);
                let mut best: Option<AdversaryOutcome> = None;
                for p in &provers {
                    let r = self.run(p.as_ref(), x, cfg)?;
                    let (lo, hi) = acceptance_bounds(&r);
                    if best.as_ref().map_or(true, |b| hi > b.p_acc_upper) {
                        best = Some(AdversaryOutcome {
                            prover_id: p.id(),
                            p_acc_lower: lo,
                            p_acc_upper: hi,
                            p_rej_lower: r.p_rej,
                            interactions: r.interactions,
                            steps: r.steps_taken,
                            candidates: provers.len(),
                        });
                    }
                }
                best.ok_or_else(|| EngineError::Config("empty adversary family".into()))
            }
        }
    }
}

/// Builds a bundle by name; `n_param` is the Fourier dimension for protocols
/// that take one.
pub fn builtin(name: &str, n_param: Option<usize>) -> Result<ProtocolBundle, ZooError> {
    match name {
        "center" => center_protocol(n_param.unwrap_or(3)),
        "zero" | "zero-public" => zero_public_protocol(),
        "odd" => odd_protocol(),
        "upal" => upal_protocol(n_param.unwrap_or(4)),
        "rfa-parity" => rfa_embed(&crate::automata::rfa::parity_rfa()),
        "rfa-mod3" => rfa_embed(&crate::automata::rfa::mod3_rfa()),
        "npfa-accept-all" | "npfa-coin" | "npfa-contains-11" | "npfa-coin-or-guess" => {
            npfa_embed::builtin(name)
        }
        other => Err(ZooError::Unknown(other.to_string())),
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "center",
    "zero",
    "odd",
    "upal",
    "rfa-parity",
    "rfa-mod3",
    "npfa-accept-all",
    "npfa-coin",
    "npfa-contains-11",
    "npfa-coin-or-guess",
];
