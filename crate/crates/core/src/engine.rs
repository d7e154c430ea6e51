//! Alternating verifier/measurement/prover evolution of a QIP system.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{HeadKind, SpecError, StateClass, TapeSymbol, VerifierSpec};
use crate::linalg::{Amplitude, DEFAULT_PRUNE, DEFAULT_TOLERANCE, ZERO};
use crate::provers::{IdentityProver, ProverError, ProverStrategy, RoundContext};

/// Basis configuration `|q,k⟩|γ⟩|y⟩`. Prover tape cells hold `0` for blank and
/// `γ+1` for a recorded comm symbol `γ`; trailing blanks are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GlobalConfig {
    pub q: usize,
    pub k: usize,
    pub gamma: usize,
    pub tape: Vec<u16>,
}

impl GlobalConfig {
    pub fn initial(q0: usize) -> Self {
        Self {
            q: q0,
            k: 0,
            gamma: 0,
            tape: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("search budget of {limit} exceeded")]
    Budget { limit: usize },
    #[error("schedule family is inadequate at round {round}: live branches carry symbols {symbols:?}")]
    FamilyInadequate { round: usize, symbols: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineConfig {
    pub max_steps: usize,
    pub tau: f64,
    /// Configurations with squared amplitude at or below this are dropped.
    pub prune_threshold: f64,
    pub tape_truncation: usize,
    pub halt_mass_target: f64,
    /// Project the comm cell onto `|#⟩` after every measurement (MComp).
    pub blank_projection: bool,
    pub check_prover_unitarity: bool,
    pub count_interactions: bool,
    pub record_trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self::with_max_steps(1000)
    }
}

impl EngineConfig {
    pub fn with_max_steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            tau: DEFAULT_TOLERANCE,
            prune_threshold: DEFAULT_PRUNE,
            tape_truncation: max_steps + 2,
            halt_mass_target: 1.0,
            blank_projection: false,
            check_prover_unitarity: true,
            count_interactions: false,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_steps == 0 {
            return Err(EngineError::Config("max_steps must be at least 1".into()));
        }
        if !(self.halt_mass_target > 0.0 && self.halt_mass_target <= 1.0) {
            return Err(EngineError::Config("halt_mass_target must lie in (0,1]".into()));
        }
        if !(self.tau >= 0.0 && self.prune_threshold >= 0.0) {
            return Err(EngineError::Config("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub p_acc: f64,
    pub p_rej: f64,
    /// Non-halting mass left when the run stopped.
    pub residual: f64,
    /// Mass discarded by pruning.
    pub pruned: f64,
    pub steps_taken: usize,
    pub interactions: Option<usize>,
    /// Largest deviation of `p_acc + p_rej + live + pruned` from 1 over the run.
    pub conservation_defect: f64,
}

/// `(p_acc, p_acc + residual + pruned)`, clamped to `[0,1]`.
pub fn acceptance_bounds(r: &RunResult) -> (f64, f64) {
    let lo = r.p_acc.clamp(0.0, 1.0);
    (lo, (r.p_acc + r.residual + r.pruned).clamp(lo, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Verifier,
    Prover,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub phase: Phase,
    pub configs: Vec<(GlobalConfig, Amplitude)>,
    pub p_acc: f64,
    pub p_rej: f64,
    pub live_mass: f64,
    pub pruned: f64,
    /// Non-blank live mass right after the measurement.
    pub query_mass: f64,
}

/// Evolving global state of one run. Cloning forks the run.
#[derive(Debug, Clone)]
pub struct Evolution<'a> {
    v: &'a VerifierSpec,
    input: String,
    tape: Vec<TapeSymbol>,
    cfg: EngineConfig,
    live: BTreeMap<GlobalConfig, Amplitude>,
    counts: BTreeMap<GlobalConfig, usize>,
    p_acc: f64,
    p_rej: f64,
    pruned: f64,
    steps: usize,
    max_count: usize,
    conservation_defect: f64,
    last_query_mass: f64,
    trace: Vec<TraceStep>,
}

fn norm_sq(m: &BTreeMap<GlobalConfig, Amplitude>) -> f64 {
    m.values().map(|a| a.norm_sqr()).sum()
}

impl<'a> Evolution<'a> {
    pub fn new(v: &'a VerifierSpec, x: &str, cfg: &EngineConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        let tape = v.tape(x)?;
        let start = GlobalConfig::initial(v.states.initial());
        let mut counts = BTreeMap::new();
        if cfg.count_interactions {
            counts.insert(start.clone(), 0);
        }
        let mut e = Self {
            v,
            input: x.to_string(),
            tape,
            cfg: cfg.clone(),
            live: BTreeMap::from([(start, Amplitude::new(1.0, 0.0))]),
            counts,
            p_acc: 0.0,
            p_rej: 0.0,
            pruned: 0.0,
            steps: 0,
            max_count: 0,
            conservation_defect: 0.0,
            last_query_mass: 0.0,
            trace: Vec::new(),
        };
        e.record(Phase::Verifier);
        Ok(e)
    }

    pub fn verifier(&self) -> &VerifierSpec {
        self.v
    }

    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn p_acc(&self) -> f64 {
        self.p_acc
    }

    pub fn p_rej(&self) -> f64 {
        self.p_rej
    }

    pub fn pruned(&self) -> f64 {
        self.pruned
    }

    pub fn live(&self) -> &BTreeMap<GlobalConfig, Amplitude> {
        &self.live
    }

    pub fn live_mass(&self) -> f64 {
        norm_sq(&self.live)
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn last_query_mass(&self) -> f64 {
        self.last_query_mass
    }

    /// Whether no further verifier step will be taken.
    pub fn is_finished(&self) -> bool {
        if self.steps >= self.cfg.max_steps {
            return true;
        }
        match self.v.kind {
            HeadKind::OneWay => self.steps >= self.tape.len(),
            HeadKind::TwoWay => {
                self.live.is_empty() || self.live_mass() <= 1.0 - self.cfg.halt_mass_target
            }
        }
    }

    fn record(&mut self, phase: Phase) {
        let live = self.live_mass();
        let total = self.p_acc + self.p_rej + live + self.pruned;
        self.conservation_defect = self.conservation_defect.max((total - 1.0).abs());
        if self.cfg.record_trace {
            self.trace.push(TraceStep {
                step: self.steps,
                phase,
                configs: self.live.iter().map(|(c, a)| (c.clone(), *a)).collect(),
                p_acc: self.p_acc,
                p_rej: self.p_rej,
                live_mass: live,
                pruned: self.pruned,
                query_mass: self.last_query_mass,
            });
        }
    }

    fn prune(&mut self, next: &mut BTreeMap<GlobalConfig, Amplitude>) {
        let threshold = self.cfg.prune_threshold;
        let mut lost = 0.0;
        next.retain(|_, a| {
            let m = a.norm_sqr();
            if m <= threshold {
                lost += m;
                false
            } else {
                true
            }
        });
        self.pruned += lost;
    }

    /// Applies `U_x^δ`, then the accept/reject/non-halting measurement, then
    /// (if configured) the blank projection of MComp.
    pub fn verifier_step(&mut self) {
        let len = self.tape.len() as i64;
        let mut next: BTreeMap<GlobalConfig, Amplitude> = BTreeMap::new();
        let mut best: BTreeMap<GlobalConfig, usize> = BTreeMap::new();
        let counting = self.cfg.count_interactions;
        for (c, &a) in &self.live {
            let src_count = if counting { self.counts.get(c).copied() } else { None };
            for (q2, g2, d, t) in self.v.delta(c.q, self.tape[c.k], c.gamma) {
                if t == ZERO {
                    continue;
                }
                let target = GlobalConfig {
                    q: q2,
                    k: (c.k as i64 + d as i64).rem_euclid(len) as usize,
                    gamma: g2,
                    tape: c.tape.clone(),
                };
                if let Some(n) = src_count {
                    let e = best.entry(target.clone()).or_insert(0);
                    *e = (*e).max(n);
                }
                *next.entry(target).or_insert(ZERO) += a * t;
            }
        }
        self.steps += 1;
        self.prune(&mut next);
        let mut live = BTreeMap::new();
        for (c, a) in next {
            match self.v.states.class(c.q) {
                StateClass::Accepting => self.p_acc += a.norm_sqr(),
                StateClass::Rejecting => self.p_rej += a.norm_sqr(),
                StateClass::NonHalting => {
                    live.insert(c, a);
                }
            }
        }
        if counting {
            self.counts.clear();
            for (c, a) in &live {
                if a.norm_sqr() > self.cfg.tau {
                    let n = best.get(c).copied().unwrap_or(0) + usize::from(c.gamma != 0);
                    self.max_count = self.max_count.max(n);
                    self.counts.insert(c.clone(), n);
                }
            }
        }
        self.last_query_mass = live
            .iter()
            .filter(|(c, _)| c.gamma != 0)
            .fold(0.0, |s, (_, a)| s + a.norm_sqr());
        if self.cfg.blank_projection {
            let before = norm_sq(&live);
            live.retain(|c, _| c.gamma == 0);
            self.pruned += before - norm_sq(&live);
        }
        self.live = live;
        self.record(Phase::Verifier);
    }

    /// Applies round `steps()` of `p` to the surviving component.
    pub fn prover_round(&mut self, p: &dyn ProverStrategy) -> Result<(), EngineError> {
        let ctx = RoundContext {
            input: &self.input,
            round: self.steps,
            num_comm: self.v.num_comm(),
            tape_limit: self.cfg.tape_truncation,
        };
        if self.cfg.check_prover_unitarity {
            if let Some(defect) = p.round_defect(&ctx) {
                if defect > self.cfg.tau {
                    return Err(ProverError::NotUnitary {
                        round: ctx.round,
                        defect,
                    }
                    .into());
                }
            }
        }
        let counting = self.cfg.count_interactions;
        let mut next: BTreeMap<GlobalConfig, Amplitude> = BTreeMap::new();
        let mut best: BTreeMap<GlobalConfig, usize> = BTreeMap::new();
        for (c, &a) in &self.live {
            let src_count = if counting { self.counts.get(c).copied() } else { None };
            for (g2, tape, t) in p.apply(&ctx, c.gamma, &c.tape)? {
                if t == ZERO {
                    continue;
                }
                let target = GlobalConfig {
                    q: c.q,
                    k: c.k,
                    gamma: g2,
                    tape,
                };
                if let Some(n) = src_count {
                    let e = best.entry(target.clone()).or_insert(0);
                    *e = (*e).max(n);
                }
                *next.entry(target).or_insert(ZERO) += a * t;
            }
        }
        self.prune(&mut next);
        if counting {
            self.counts.clear();
            for (c, a) in &next {
                if a.norm_sqr() > self.cfg.tau {
                    if let Some(&n) = best.get(c) {
                        self.counts.insert(c.clone(), n);
                    }
                }
            }
        }
        self.live = next;
        self.record(Phase::Prover);
        Ok(())
    }

    pub fn result(&self) -> RunResult {
        RunResult {
            p_acc: self.p_acc,
            p_rej: self.p_rej,
            residual: self.live_mass(),
            pruned: self.pruned,
            steps_taken: self.steps,
            interactions: self.cfg.count_interactions.then_some(self.max_count),
            conservation_defect: self.conservation_defect,
        }
    }

    /// Runs to completion with `p` answering every remaining round.
    pub fn finish(&mut self, p: &dyn ProverStrategy) -> Result<RunResult, EngineError> {
        while !self.is_finished() {
            if self.steps > 0 {
                self.prover_round(p)?;
            }
            self.verifier_step();
        }
        Ok(self.result())
    }
}

/// Starts from `|q₀,0⟩|#⟩|#^∞⟩` and alternates verifier steps (with
/// measurement) and prover rounds until the run halts or `max_steps` is hit.
pub fn run_protocol(
    v: &VerifierSpec,
    p: &dyn ProverStrategy,
    x: &str,
    cfg: &EngineConfig,
) -> Result<RunResult, EngineError> {
    Evolution::new(v, x, cfg)?.finish(p)
}

/// Like [`run_protocol`] but also returns the per-phase trace.
pub fn trace_protocol(
    v: &VerifierSpec,
    p: &dyn ProverStrategy,
    x: &str,
    cfg: &EngineConfig,
) -> Result<(RunResult, Vec<TraceStep>), EngineError> {
    let cfg = EngineConfig {
        record_trace: true,
        ..cfg.clone()
    };
    let mut e = Evolution::new(v, x, &cfg)?;
    let r = e.finish(p)?;
    Ok((r, e.trace))
}

/// Maximum number of query configurations along any path of configurations
/// whose squared amplitude exceeds `cfg.tau`.
pub fn interaction_count(
    v: &VerifierSpec,
    p: &dyn ProverStrategy,
    x: &str,
    cfg: &EngineConfig,
) -> Result<usize, EngineError> {
    let cfg = EngineConfig {
        count_interactions: true,
        ..cfg.clone()
    };
    Ok(run_protocol(v, p, x, &cfg)?.interactions.unwrap_or(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCompStep {
    pub step: usize,
    /// Tape cell read during this step.
    pub head: usize,
    pub query_mass: f64,
    pub snapshot: Vec<(GlobalConfig, Amplitude)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCompTrace {
    pub steps: Vec<MCompStep>,
}

impl MCompTrace {
    pub fn query_masses(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.query_mass).collect()
    }
}

/// Modified computation: identity prover plus a projection of the comm cell
/// onto `|#⟩` after every measurement. One row per verifier step.
pub fn run_mcomp(v: &VerifierSpec, x: &str, cfg: &EngineConfig) -> Result<MCompTrace, EngineError> {
    if v.kind != HeadKind::OneWay {
        return Err(EngineError::Unsupported(
            "modified computations are defined for one-way verifiers only".into(),
        ));
    }
    let cfg = EngineConfig {
        blank_projection: true,
        record_trace: false,
        ..cfg.clone()
    };
    let mut e = Evolution::new(v, x, &cfg)?;
    let mut steps = Vec::new();
    while !e.is_finished() {
        if e.steps > 0 {
            e.prover_round(&IdentityProver)?;
        }
        let head = e.steps;
        e.verifier_step();
        steps.push(MCompStep {
            step: e.steps,
            head,
            query_mass: e.last_query_mass,
            snapshot: e.live.iter().map(|(c, a)| (c.clone(), *a)).collect(),
        });
    }
    Ok(MCompTrace { steps })
}

/// `wt^{(prefix)}(suffix)`: query mass accumulated in the modified computation
/// on `prefix·suffix` while the head reads the cells of `suffix`.
pub fn query_weight(
    v: &VerifierSpec,
    prefix: &str,
    suffix: &str,
    cfg: &EngineConfig,
) -> Result<f64, EngineError> {
    let start = prefix.chars().count() + 1;
    let end = start + suffix.chars().count();
    let trace = run_mcomp(v, &format!("{prefix}{suffix}"), cfg)?;
    Ok(trace
        .steps
        .iter()
        .filter(|s| (start..end).contains(&s.head))
        .map(|s| s.query_mass)
        .sum())
}

pub fn format_config(v: &VerifierSpec, c: &GlobalConfig) -> String {
    let comm = v.alphabets.comm();
    let tape: Vec<&str> = c
        .tape
        .iter()
        .map(|&s| if s == 0 { "_" } else { comm[s as usize - 1].as_str() })
        .collect();
    format!(
        "{} {} {} [{}]",
        v.states.name(c.q),
        c.k,
        comm[c.gamma],
        tape.join(" ")
    )
}

/// Line-oriented dump: a header per phase, then one line per configuration.
pub fn format_trace(v: &VerifierSpec, trace: &[TraceStep]) -> String {
    let mut out = String::new();
    for s in trace {
        let phase = match s.phase {
            Phase::Verifier => "verifier",
            Phase::Prover => "prover",
        };
        let _ = writeln!(
            out,
            "step {} {phase} p_acc={:.12} p_rej={:.12} live={:.12} pruned={:.3e} total={:.12} query={:.12}",
            s.step,
            s.p_acc,
            s.p_rej,
            s.live_mass,
            s.pruned,
            s.p_acc + s.p_rej + s.live_mass + s.pruned,
            s.query_mass
        );
        for (c, a) in &s.configs {
            let _ = writeln!(out, "  {} {:+.12} {:+.12}", format_config(v, c), a.re, a.im);
        }
    }
    out
}

pub fn format_mcomp(v: &VerifierSpec, trace: &MCompTrace) -> String {
    let mut out = String::new();
    for s in &trace.steps {
        let _ = writeln!(out, "step {} head {} query_mass={:.12}", s.step, s.head, s.query_mass);
        for (c, a) in &s.snapshot {
            let _ = writeln!(out, "  {} {:+.12} {:+.12}", format_config(v, c), a.re, a.im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{rfa::parity_rfa, TableBuilder};
    use crate::linalg::inv_sqrt;

    fn coin() -> VerifierSpec {
        let mut b = TableBuilder::new("coin", HeadKind::OneWay, &['0']);
        let q0 = b.state("q0", StateClass::NonHalting, 1);
        let acc = b.state("acc", StateClass::Accepting, 1);
        let rej = b.state("rej", StateClass::Rejecting, 1);
        b.set_initial(q0);
        let h = inv_sqrt(2);
        b.set(TapeSymbol::LeftEnd, (q0, 0), &[((acc, 0), h), ((rej, 0), h)]);
        b.complete().unwrap()
    }

    #[test]
    fn coin_verifier_still_reads_whole_tape() {
        let r = run_protocol(&coin(), &IdentityProver, "00", &EngineConfig::default()).unwrap();
        assert!((r.p_acc - 0.5).abs() < 1e-12);
        assert!((r.p_rej - 0.5).abs() < 1e-12);
        assert_eq!(r.steps_taken, 4);
        assert_eq!(acceptance_bounds(&r), (r.p_acc, r.p_acc));
    }

    #[test]
    fn one_way_runs_take_n_plus_two_steps() {
        let v = parity_rfa().to_plain_verifier().unwrap();
        for x in ["", "1", "0110"] {
            let r = run_protocol(&v, &IdentityProver, x, &EngineConfig::default()).unwrap();
            assert_eq!(r.steps_taken, x.len() + 2);
        }
    }

    #[test]
    fn bounds_include_residual() {
        let r = RunResult {
            p_acc: 0.3,
            p_rej: 0.69,
            residual: 0.01,
            pruned: 0.0,
            steps_taken: 5,
            interactions: None,
            conservation_defect: 0.0,
        };
        let (lo, hi) = acceptance_bounds(&r);
        assert!((hi - lo - 0.01).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EngineConfig::default();
        cfg.max_steps = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = EngineConfig::default();
        cfg.halt_mass_target = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mcomp_rejects_two_way() {
        let mut b = TableBuilder::new("w", HeadKind::TwoWay, &['0']);
        let q0 = b.state("q0", StateClass::NonHalting, 1);
        b.state("rej", StateClass::Rejecting, 1);
        b.set_initial(q0);
        let v = b.complete().unwrap();
        assert!(matches!(
            run_mcomp(&v, "0", &EngineConfig::default()),
            Err(EngineError::Unsupported(_))
        ));
    }
}
