//! Prover strategies, classicality and committedness checks, and exhaustive
//! message-schedule adversaries.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::VerifierSpec;
use crate::engine::{EngineConfig, EngineError, Evolution, GlobalConfig, RunResult};
use crate::linalg::{Amplitude, DenseUnitary, ONE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProverError {
    #[error("prover round {round} is not unitary (defect {defect:.3e})")]
    NotUnitary { round: usize, defect: f64 },
    #[error("prover round {round} writes tape cell {cell} beyond truncation {limit}")]
    Truncation { round: usize, cell: usize, limit: usize },
    #[error("prover round {round} replied with unknown symbol index {symbol}")]
    InvalidSymbol { round: usize, symbol: usize },
    #[error("prover round {round} overwrote a recorded history cell")]
    HistoryCollision { round: usize },
    #[error("explicit prover unitary has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("reachable prover tapes exceed {limit} at round {round}")]
    ReachableOverflow { round: usize, limit: usize },
    #[error("prover has no reply: {0}")]
    Oracle(String),
}

/// Everything a prover may depend on in one round besides `|γ⟩|y⟩`.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a> {
    pub input: &'a str,
    pub round: usize,
    pub num_comm: usize,
    pub tape_limit: usize,
}

/// Image of a basis state `|γ⟩|y⟩` under one prover round.
pub type ProverImage = Vec<(usize, Vec<u16>, Amplitude)>;

/// A strategy `{U_{P,i}^x}` acting on the comm cell and the private tape.
pub trait ProverStrategy: Send + Sync {
    fn id(&self) -> String;

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError>;

    /// Unitarity defect of the round, if the strategy has an explicit matrix.
    fn round_defect(&self, _ctx: &RoundContext) -> Option<f64> {
        None
    }
}

pub type Prover = Arc<dyn ProverStrategy>;

/// `P_I`: the identity in every round.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityProver;

impl ProverStrategy for IdentityProver {
    fn id(&self) -> String {
        "identity".into()
    }

    fn apply(&self, _: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        Ok(vec![(gamma, tape.to_vec(), ONE)])
    }
}

pub fn identity_prover() -> Prover {
    Arc::new(IdentityProver)
}

/// Replies `reply` to `observed`. A change of symbol records `observed` in tape
/// cell `round`, which keeps the round injective on reachable tapes.
pub fn respond(
    ctx: &RoundContext,
    observed: usize,
    tape: &[u16],
    reply: usize,
) -> Result<ProverImage, ProverError> {
    if reply >= ctx.num_comm {
        return Err(ProverError::InvalidSymbol {
            round: ctx.round,
            symbol: reply,
        });
    }
    if reply == observed {
        return Ok(vec![(observed, tape.to_vec(), ONE)]);
    }
    let cell = ctx.round;
    if cell >= ctx.tape_limit {
        return Err(ProverError::Truncation {
            round: ctx.round,
            cell,
            limit: ctx.tape_limit,
        });
    }
    if tape.get(cell).is_some_and(|&s| s != 0) {
        return Err(ProverError::HistoryCollision { round: ctx.round });
    }
    let mut y = tape.to_vec();
    if y.len() <= cell {
        y.resize(cell + 1, 0);
    }
    y[cell] = observed as u16 + 1;
    Ok(vec![(reply, y, ONE)])
}

pub type ReplyFn = dyn Fn(&RoundContext, usize, &[u16]) -> Result<usize, ProverError> + Send + Sync;

/// A classical prover given by its reply function `f(x, i, σ, y)`.
#[derive(Clone)]
pub struct HistoryResponder {
    id: String,
    reply: Arc<ReplyFn>,
}

impl fmt::Debug for HistoryResponder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HistoryResponder").field("id", &self.id).finish()
    }
}

impl HistoryResponder {
    pub fn new<F>(id: impl Into<String>, reply: F) -> Self
    where
        F: Fn(&RoundContext, usize, &[u16]) -> Result<usize, ProverError> + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            reply: Arc::new(reply),
        }
    }

    pub fn never_edit() -> Self {
        Self::new("never-edit", |_, g, _| Ok(g))
    }

    /// Always returns the blank, recording whatever it erased.
    pub fn eraser() -> Self {
        Self::new("eraser", |_, _, _| Ok(0))
    }
}

impl ProverStrategy for HistoryResponder {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        let reply = (self.reply)(ctx, gamma, tape)?;
        respond(ctx, gamma, tape, reply)
    }
}

pub fn classical_from_responder(f: HistoryResponder) -> Prover {
    Arc::new(f)
}

/// A quantum prover acting as `S_i ⊗ I` with `S_i` a unitary on the comm cell.
/// Rounds without an entry act as the identity.
#[derive(Debug, Clone)]
pub struct ExplicitProver {
    pub id: String,
    pub rounds: std::collections::BTreeMap<usize, DenseUnitary>,
}

impl ProverStrategy for ExplicitProver {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        let Some(u) = self.rounds.get(&ctx.round) else {
            return Ok(vec![(gamma, tape.to_vec(), ONE)]);
        };
        if u.dim() != ctx.num_comm {
            return Err(ProverError::Dimension {
                expected: ctx.num_comm,
                found: u.dim(),
            });
        }
        Ok((0..u.dim())
            .map(|g| (g, tape.to_vec(), u.get(g, gamma)))
            .filter(|(_, _, a)| a.norm_sqr() > 0.0)
            .collect())
    }

    fn round_defect(&self, ctx: &RoundContext) -> Option<f64> {
        self.rounds.get(&ctx.round).map(DenseUnitary::unitarity_defect)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub round: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub rounds_checked: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const REACHABLE_LIMIT: usize = 1 << 16;

/// Walks rounds `1..=rounds`, calling `visit(round, γ, y, image)` for every
/// `γ` and every tape `y ∈ S_{round-1}`. Basis states on which the strategy
/// has no defined reply are skipped.
fn explore<F>(
    p: &dyn ProverStrategy,
    x: &str,
    rounds: usize,
    num_comm: usize,
    mut visit: F,
) -> Result<(), ProverError>
where
    F: FnMut(usize, usize, &[u16], &ProverImage),
{
    let mut reachable: BTreeSet<Vec<u16>> = BTreeSet::from([Vec::new()]);
    for round in 1..=rounds {
        let ctx = RoundContext {
            input: x,
            round,
            num_comm,
            tape_limit: rounds + 2,
        };
        let mut next = BTreeSet::new();
        for y in &reachable {
            for g in 0..num_comm {
                let image = match p.apply(&ctx, g, y) {
                    Ok(image) => image,
                    Err(ProverError::Oracle(_)) => continue,
                    Err(e) => return Err(e),
                };
                visit(round, g, y, &image);
                for (_, y2, a) in image {
                    if a.norm_sqr() > 0.0 {
                        next.insert(y2);
                    }
                }
            }
        }
        if next.len() > REACHABLE_LIMIT {
            return Err(ProverError::ReachableOverflow {
                round,
                limit: REACHABLE_LIMIT,
            });
        }
        reachable = next;
    }
    Ok(())
}

/// Passes iff every matrix entry met on reachable tapes is within `tau` of 0 or 1.
pub fn check_classical(
    p: &dyn ProverStrategy,
    x: &str,
    rounds: usize,
    num_comm: usize,
    tau: f64,
) -> Result<CheckReport, ProverError> {
    let mut report = CheckReport {
        rounds_checked: rounds,
        ..Default::default()
    };
    explore(p, x, rounds, num_comm, |round, g, _, image| {
        for (g2, _, a) in image {
            if a.norm() > tau && (a - ONE).norm() > tau {
                report.failures.push(CheckFailure {
                    round,
                    detail: format!("entry ({g2},{g}) = {a}"),
                });
            }
        }
    })?;
    Ok(report)
}

/// Condition (*): each round fixes `|#⟩|y⟩` for every reachable `y`.
pub fn check_committed(
    p: &dyn ProverStrategy,
    x: &str,
    rounds: usize,
    num_comm: usize,
    tau: f64,
) -> Result<CheckReport, ProverError> {
    let mut report = CheckReport {
        rounds_checked: rounds,
        ..Default::default()
    };
    explore(p, x, rounds, num_comm, |round, g, y, image| {
        if g != 0 {
            return;
        }
        let fixed = image.iter().all(|(g2, y2, a)| {
            if *g2 == 0 && y2.as_slice() == y {
                (a - ONE).norm() <= tau
            } else {
                a.norm() <= tau
            }
        });
        if !fixed {
            report.failures.push(CheckFailure {
                round,
                detail: format!("blank with tape {y:?} is not fixed"),
            });
        }
    })?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleStep {
    /// Leave the cell untouched.
    Keep,
    /// Make the cell hold this symbol.
    Write(usize),
}

/// A prover whose reply depends only on the round index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageSchedule {
    pub steps: Vec<ScheduleStep>,
}

impl MessageSchedule {
    pub fn describe(&self, comm: &[String]) -> String {
        self.steps
            .iter()
            .map(|s| match s {
                ScheduleStep::Keep => "-".to_string(),
                ScheduleStep::Write(g) => comm.get(*g).cloned().unwrap_or_else(|| g.to_string()),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn apply_step(
    step: ScheduleStep,
    ctx: &RoundContext,
    gamma: usize,
    tape: &[u16],
) -> Result<ProverImage, ProverError> {
    match step {
        ScheduleStep::Keep => Ok(vec![(gamma, tape.to_vec(), ONE)]),
        ScheduleStep::Write(g) => respond(ctx, gamma, tape, g),
    }
}

impl ProverStrategy for MessageSchedule {
    fn id(&self) -> String {
        let body: Vec<String> = self
            .steps
            .iter()
            .map(|s| match s {
                ScheduleStep::Keep => "-".into(),
                ScheduleStep::Write(g) => g.to_string(),
            })
            .collect();
        format!("schedule[{}]", body.join(","))
    }

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        let step = ctx
            .round
            .checked_sub(1)
            .and_then(|i| self.steps.get(i))
            .copied()
            .unwrap_or(ScheduleStep::Keep);
        apply_step(step, ctx, gamma, tape)
    }
}

struct SingleStep(ScheduleStep);

impl ProverStrategy for SingleStep {
    fn id(&self) -> String {
        format!("{:?}", self.0)
    }

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        apply_step(self.0, ctx, gamma, tape)
    }
}

/// Every schedule of literal writes over `symbols` with `rounds` entries.
pub fn enumerate_schedules(
    symbols: &[usize],
    rounds: usize,
    budget: usize,
) -> Result<impl Iterator<Item = MessageSchedule>, EngineError> {
    let choices: Vec<ScheduleStep> = symbols.iter().map(|&g| ScheduleStep::Write(g)).collect();
    enumerate_step_schedules(choices, rounds, budget)
}

/// Every sequence of `rounds` steps drawn from `choices`, in lexicographic
/// order of choice indices.
pub fn enumerate_step_schedules(
    choices: Vec<ScheduleStep>,
    rounds: usize,
    budget: usize,
) -> Result<impl Iterator<Item = MessageSchedule>, EngineError> {
    let total = u32::try_from(rounds)
        .ok()
        .and_then(|r| choices.len().checked_pow(r))
        .filter(|&t| t <= budget)
        .ok_or(EngineError::Budget { limit: budget })?;
    Ok((0..total).map(move |mut i| {
        let mut steps = vec![ScheduleStep::Keep; rounds];
        for s in steps.iter_mut().rev() {
            *s = choices[i % choices.len()];
            i /= choices.len();
        }
        MessageSchedule { steps }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFamily {
    /// A literal symbol every round; requires all live branches to share the
    /// cell content at each round.
    Literal,
    /// Either leave the cell alone or overwrite it with a symbol.
    KeepOrWrite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleOptimum {
    /// Largest `p_acc + residual + pruned` reachable within the family.
    pub p_acc_upper: f64,
    pub schedule: MessageSchedule,
    /// Replay of the maximizing schedule.
    pub run: RunResult,
    pub nodes: usize,
}

type NodeKey = (usize, Vec<(GlobalConfig, u64, u64)>);

fn node_key(e: &Evolution) -> NodeKey {
    (
        e.steps(),
        e.live()
            .iter()
            .map(|(c, a)| (c.clone(), a.re.to_bits(), a.im.to_bits()))
            .collect(),
    )
}

fn offset(e: &Evolution) -> f64 {
    e.p_acc() + e.pruned()
}

struct Search<'s> {
    family: ScheduleFamily,
    symbols: &'s [usize],
    rounds: usize,
    budget: usize,
    nodes: usize,
    memo: HashMap<NodeKey, (f64, Vec<ScheduleStep>)>,
}

impl Search<'_> {
    /// Largest further increase of `p_acc + pruned`, plus the final residual,
    /// obtainable from `e`, which has just measured.
    fn value(&mut self, e: &Evolution) -> Result<(f64, Vec<ScheduleStep>), EngineError> {
        if e.is_finished() || e.live().is_empty() {
            return Ok((e.live_mass(), Vec::new()));
        }
        if e.steps() > self.rounds {
            let mut rest = e.clone();
            let r = rest.finish(&IdentityProver)?;
            return Ok((r.p_acc + r.pruned + r.residual - offset(e), Vec::new()));
        }
        let key = node_key(e);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(EngineError::Budget { limit: self.budget });
        }
        let actions: Vec<ScheduleStep> = match self.family {
            ScheduleFamily::Literal => {
                let seen: BTreeSet<usize> = e.live().keys().map(|c| c.gamma).collect();
                if seen.len() > 1 {
                    let comm = e.verifier().alphabets.comm();
                    return Err(EngineError::FamilyInadequate {
                        round: e.steps(),
                        symbols: seen.iter().map(|&g| comm[g].clone()).collect(),
                    });
                }
                self.symbols.iter().map(|&g| ScheduleStep::Write(g)).collect()
            }
            ScheduleFamily::KeepOrWrite => std::iter::once(ScheduleStep::Keep)
                .chain(self.symbols.iter().map(|&g| ScheduleStep::Write(g)))
                .collect(),
        };
        let mut best: Option<(f64, Vec<ScheduleStep>)> = None;
        let mut siblings: BTreeSet<NodeKey> = BTreeSet::new();
        for action in actions {
            let mut child = e.clone();
            child.prover_round(&SingleStep(action))?;
            child.verifier_step();
            if !siblings.insert(node_key(&child)) {
                continue;
            }
            let (future, mut tail) = self.value(&child)?;
            let gain = offset(&child) - offset(e) + future;
            if best.as_ref().map_or(true, |(b, _)| gain > *b) {
                tail.insert(0, action);
                best = Some((gain, tail));
            }
        }
        let best = best.unwrap_or((0.0, Vec::new()));
        self.memo.insert(key, best.clone());
        Ok(best)
    }
}

/// Maximum acceptance over all schedules of `family` with `rounds` entries,
/// followed by the identity. Symbols range over the verifier's message
/// alphabet.
pub fn best_schedule_acceptance(
    v: &VerifierSpec,
    x: &str,
    rounds: usize,
    family: ScheduleFamily,
    cfg: &EngineConfig,
    budget: usize,
) -> Result<ScheduleOptimum, EngineError> {
    let cfg = EngineConfig {
        record_trace: false,
        count_interactions: false,
        ..cfg.clone()
    };
    let symbols = v.message_alphabet();
    let mut search = Search {
        family,
        symbols: &symbols,
        rounds,
        budget,
        nodes: 0,
        memo: HashMap::new(),
    };
    let mut root = Evolution::new(v, x, &cfg)?;
    root.verifier_step();
    let (future, steps) = search.value(&root)?;
    let schedule = MessageSchedule { steps };
    let run = crate::engine::run_protocol(v, &schedule, x, &cfg)?;
    Ok(ScheduleOptimum {
        p_acc_upper: (offset(&root) + future).min(1.0),
        schedule,
        run,
        nodes: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::make_qft;

    fn ctx(round: usize) -> RoundContext<'static> {
        RoundContext {
            input: "",
            round,
            num_comm: 2,
            tape_limit: 8,
        }
    }

    #[test]
    fn identity_is_trivially_committed_and_classical() {
        let p = IdentityProver;
        assert!(check_committed(&p, "01", 10, 3, 1e-9).unwrap().passed());
        assert!(check_classical(&p, "01", 10, 3, 1e-9).unwrap().passed());
        let img = p.apply(&ctx(5), 1, &[2, 0, 1]).unwrap();
        assert_eq!(img, vec![(1, vec![2, 0, 1], ONE)]);
    }

    #[test]
    fn eraser_is_committed_and_records() {
        let p = HistoryResponder::eraser();
        assert!(check_committed(&p, "10", 6, 2, 1e-9).unwrap().passed());
        assert!(check_classical(&p, "10", 6, 2, 1e-9).unwrap().passed());
        let img = p.apply(&ctx(3), 1, &[]).unwrap();
        assert_eq!(img, vec![(0, vec![0, 0, 0, 2], ONE)]);
    }

    #[test]
    fn early_writer_is_not_committed() {
        let p = HistoryResponder::new("writer", |c, g, _| Ok(if c.round == 1 { 1 } else { g }));
        let r = check_committed(&p, "", 4, 2, 1e-9).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures[0].round, 1);
    }

    #[test]
    fn qft_prover_is_not_classical() {
        let p = ExplicitProver {
            id: "qft".into(),
            rounds: [(1, make_qft(2).unwrap())].into(),
        };
        assert!(!check_classical(&p, "", 2, 2, 1e-9).unwrap().passed());
        assert!(p.round_defect(&ctx(1)).unwrap() < 1e-12);
    }

    #[test]
    fn truncation_is_reported() {
        let p = HistoryResponder::eraser();
        let c = RoundContext {
            tape_limit: 2,
            ..ctx(2)
        };
        assert!(matches!(p.apply(&c, 1, &[]), Err(ProverError::Truncation { .. })));
    }

    #[test]
    fn schedule_counts() {
        assert_eq!(enumerate_schedules(&[0, 1], 2, 100).unwrap().count(), 4);
        assert_eq!(enumerate_schedules(&[0, 1], 0, 100).unwrap().count(), 1);
        assert_eq!(enumerate_schedules(&[0, 1, 2], 3, 100).unwrap().count(), 27);
        assert!(matches!(
            enumerate_schedules(&[0, 1, 2], 5, 100).map(|_| ()),
            Err(EngineError::Budget { limit: 100 })
        ));
        let all: BTreeSet<Vec<ScheduleStep>> = enumerate_schedules(&[0, 1], 3, 100)
            .unwrap()
            .map(|s| s.steps)
            .collect();
        assert_eq!(all.len(), 8);
    }
}
