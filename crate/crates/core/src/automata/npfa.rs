//! Two-way automata alternating fair coin tosses and nondeterministic moves.

use std::collections::BTreeMap;

use thiserror::Error;

use super::verifier::TapeSymbol;
use super::SpecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NpfaStateKind {
    Probabilistic,
    Nondeterministic,
    Accepting,
    Rejecting,
}

impl NpfaStateKind {
    pub fn is_halting(self) -> bool {
        matches!(self, NpfaStateKind::Accepting | NpfaStateKind::Rejecting)
    }
}

/// Transition value `δ_M(p,σ,q,d)`; only `1/2` and `1` are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Half,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NpfaTransition {
    pub from: usize,
    pub symbol: TapeSymbol,
    pub to: usize,
    pub dir: i8,
    pub weight: Weight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoNpfaSpec {
    pub name: String,
    pub input: Vec<char>,
    pub states: Vec<(String, NpfaStateKind)>,
    pub initial: usize,
    pub transitions: Vec<NpfaTransition>,
}

/// What a prover can observe of one simulated move: the state in which a
/// coin was tossed (never its outcome), or the nondeterministic choice taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PublicEvent {
    Coin { from: usize },
    Choice { to: usize, dir: i8 },
}

/// Resolves nondeterministic moves from the public history of the run.
pub trait ChoiceOracle: Send + Sync {
    fn choose(&self, history: &[PublicEvent]) -> Option<(usize, i8)>;
}

/// The `k`-th nondeterministic move of every path takes `choices[k]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChoiceSequence(pub Vec<(usize, i8)>);

impl ChoiceOracle for ChoiceSequence {
    fn choose(&self, history: &[PublicEvent]) -> Option<(usize, i8)> {
        let k = history
            .iter()
            .filter(|e| matches!(e, PublicEvent::Choice { .. }))
            .count();
        self.0.get(k).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NpfaError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("choice oracle has no answer after {choices_made} choices")]
    Unresolved { choices_made: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormalizationReport {
    /// Transitions that keep the head still, violating condition (i).
    pub stay_moves: Vec<String>,
    /// Coin tosses that do not move the head right, violating condition (ii).
    pub leftward_coins: Vec<String>,
    /// Other shape problems (wrong weights for the state kind, bad coin arity).
    pub malformed: Vec<String>,
}

impl NormalizationReport {
    pub fn is_normalized(&self) -> bool {
        self.stay_moves.is_empty() && self.leftward_coins.is_empty() && self.malformed.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpfaRun {
    pub p_acc: f64,
    pub p_rej: f64,
    pub residual: f64,
    pub steps: usize,
}

impl TwoNpfaSpec {
    pub fn kind(&self, q: usize) -> NpfaStateKind {
        self.states[q].1
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q].0
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|(n, _)| n == name)
    }

    pub fn tape_symbols(&self) -> Vec<TapeSymbol> {
        std::iter::once(TapeSymbol::LeftEnd)
            .chain(self.input.iter().map(|&c| TapeSymbol::Letter(c)))
            .chain(std::iter::once(TapeSymbol::RightEnd))
            .collect()
    }

    pub fn moves(&self, p: usize, sym: TapeSymbol) -> impl Iterator<Item = &NpfaTransition> {
        self.transitions
            .iter()
            .filter(move |t| t.from == p && t.symbol == sym)
    }

    /// All `(q,d)` pairs that occur as nondeterministic choices.
    pub fn choice_alphabet(&self) -> Vec<(usize, i8)> {
        let mut out: Vec<(usize, i8)> = self
            .transitions
            .iter()
            .filter(|t| t.weight == Weight::One)
            .map(|t| (t.to, t.dir))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn describe(&self, t: &NpfaTransition) -> String {
        format!(
            "δ({}, {}, {}, {:+})",
            self.state_name(t.from),
            t.symbol,
            self.state_name(t.to),
            t.dir
        )
    }

    pub fn tape(&self, x: &str) -> Result<Vec<TapeSymbol>, SpecError> {
        let mut tape = vec![TapeSymbol::LeftEnd];
        for c in x.chars() {
            if !self.input.contains(&c) {
                return Err(SpecError::Alphabet(c));
            }
            tape.push(TapeSymbol::Letter(c));
        }
        tape.push(TapeSymbol::RightEnd);
        Ok(tape)
    }
}

/// Checks that the head never stays still and that every coin toss moves the
/// head right, plus the basic shape of the transition table.
pub fn validate_2npfa_normalized(m: &TwoNpfaSpec) -> NormalizationReport {
    let mut report = NormalizationReport::default();
    for t in &m.transitions {
        if t.dir == 0 {
            report.stay_moves.push(m.describe(t));
        }
        if t.weight == Weight::Half && t.dir != 1 {
            report.leftward_coins.push(m.describe(t));
        }
        if !(-1..=1).contains(&t.dir) {
            report.malformed.push(format!("{} has an invalid direction", m.describe(t)));
        }
    }
    for p in 0..m.states.len() {
        for sym in m.tape_symbols() {
            let moves: Vec<&NpfaTransition> = m.moves(p, sym).collect();
            match m.kind(p) {
                NpfaStateKind::Probabilistic => {
                    let ok = moves.len() == 2
                        && moves.iter().all(|t| t.weight == Weight::Half)
                        && moves[0].to != moves[1].to;
                    if !ok {
                        report.malformed.push(format!(
                            "probabilistic state {} on {sym} needs two distinct 1/2 moves",
                            m.state_name(p)
                        ));
                    }
                }
                NpfaStateKind::Nondeterministic => {
                    if moves.is_empty() || moves.iter().any(|t| t.weight != Weight::One) {
                        report.malformed.push(format!(
                            "nondeterministic state {} on {sym} needs at least one move of value 1",
                            m.state_name(p)
                        ));
                    }
                }
                _ => {
                    if !moves.is_empty() {
                        report.malformed.push(format!(
                            "halting state {} has outgoing moves",
                            m.state_name(p)
                        ));
                    }
                }
            }
        }
    }
    report
}

type Branch = (usize, usize, Vec<PublicEvent>);

/// Evolves the distribution over `(state, head, public history)` for at most
/// `max_steps` moves. A choice that is not a legal move of the current state
/// is treated as rejection.
pub fn run_2npfa(
    m: &TwoNpfaSpec,
    x: &str,
    oracle: &dyn ChoiceOracle,
    max_steps: usize,
) -> Result<NpfaRun, NpfaError> {
    let tape = m.tape(x)?;
    let len = tape.len() as i64;
    let mut dist: BTreeMap<Branch, f64> = BTreeMap::new();
    dist.insert((m.initial, 0, Vec::new()), 1.0);
    let mut run = NpfaRun {
        p_acc: 0.0,
        p_rej: 0.0,
        residual: 1.0,
        steps: 0,
    };
    while !dist.is_empty() && run.steps < max_steps {
        let mut next: BTreeMap<Branch, f64> = BTreeMap::new();
        let mut dropped = 0.0;
        let mut land = |state: usize, head: usize, dir: i8, history: Vec<PublicEvent>, w: f64| {
            match m.kind(state) {
                NpfaStateKind::Accepting => run.p_acc += w,
                NpfaStateKind::Rejecting => run.p_rej += w,
                _ => {
                    let k = (head as i64 + dir as i64).rem_euclid(len) as usize;
                    *next.entry((state, k, history)).or_insert(0.0) += w;
                }
            }
        };
        for ((p, head, history), w) in dist {
            let sym = tape[head];
            match m.kind(p) {
                NpfaStateKind::Probabilistic => {
                    let moves: Vec<&NpfaTransition> = m.moves(p, sym).collect();
                    if moves.is_empty() {
                        dropped += w;
                    }
                    let mut h = history.clone();
                    h.push(PublicEvent::Coin { from: p });
                    for t in moves {
                        land(t.to, head, t.dir, h.clone(), w * 0.5);
                    }
                }
                NpfaStateKind::Nondeterministic => {
                    let (to, dir) = oracle.choose(&history).ok_or(NpfaError::Unresolved {
                        choices_made: history
                            .iter()
                            .filter(|e| matches!(e, PublicEvent::Choice { .. }))
                            .count(),
                    })?;
                    let legal = m.moves(p, sym).any(|t| t.to == to && t.dir == dir);
                    if legal {
                        let mut h = history;
                        h.push(PublicEvent::Choice { to, dir });
                        land(to, head, dir, h, w);
                    } else {
                        dropped += w;
                    }
                }
                _ => unreachable!("halting branches are absorbed"),
            }
        }
        run.p_rej += dropped;
        dist = next;
        run.steps += 1;
    }
    run.residual = dist.values().sum();
    Ok(run)
}

/// Exhaustive search over choice sequences of length at most `max_len`,
/// returning one that maximizes the acceptance probability.
pub fn search_witness(
    m: &TwoNpfaSpec,
    x: &str,
    max_len: usize,
    max_steps: usize,
) -> Result<(ChoiceSequence, f64), NpfaError> {
    let alphabet = m.choice_alphabet();
    let mut best: Option<(ChoiceSequence, f64)> = None;
    let mut stack = vec![ChoiceSequence::default()];
    while let Some(seq) = stack.pop() {
        match run_2npfa(m, x, &seq, max_steps) {
            Ok(r) => {
                if best.as_ref().map_or(true, |(_, b)| r.p_acc > *b + 1e-12) {
                    best = Some((seq, r.p_acc));
                }
            }
            Err(NpfaError::Unresolved { .. }) if seq.0.len() < max_len => {
                for &c in alphabet.iter().rev() {
                    let mut s = seq.0.clone();
                    s.push(c);
                    stack.push(ChoiceSequence(s));
                }
            }
            Err(NpfaError::Unresolved { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    best.ok_or(NpfaError::Unresolved { choices_made: max_len })
}

struct Builder {
    m: TwoNpfaSpec,
}

impl Builder {
    fn new(name: &str, states: &[(&str, NpfaStateKind)]) -> Self {
        Self {
            m: TwoNpfaSpec {
                name: name.into(),
                input: vec!['0', '1'],
                states: states.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
                initial: 0,
                transitions: Vec::new(),
            },
        }
    }

    fn add(&mut self, from: &str, syms: &[TapeSymbol], to: &str, dir: i8, weight: Weight) {
        let (from, to) = (self.m.index(from).unwrap(), self.m.index(to).unwrap());
        for &symbol in syms {
            self.m.transitions.push(NpfaTransition { from, symbol, to, dir, weight });
        }
    }
}

const ALL: [TapeSymbol; 4] = [
    TapeSymbol::LeftEnd,
    TapeSymbol::Letter('0'),
    TapeSymbol::Letter('1'),
    TapeSymbol::RightEnd,
];

/// Accepts every input with a single deterministic move.
pub fn accept_all_npfa() -> TwoNpfaSpec {
    use NpfaStateKind::*;
    let mut b = Builder::new("accept-all", &[("q0", Nondeterministic), ("acc", Accepting)]);
    b.add("q0", &ALL, "acc", 1, Weight::One);
    b.m
}

/// Tosses one fair coin and accepts on heads.
pub fn coin_then_accept_npfa() -> TwoNpfaSpec {
    use NpfaStateKind::*;
    let mut b = Builder::new(
        "coin-then-accept",
        &[("q0", Probabilistic), ("acc", Accepting), ("rej", Rejecting)],
    );
    b.add("q0", &ALL, "acc", 1, Weight::Half);
    b.add("q0", &ALL, "rej", 1, Weight::Half);
    b.m
}

fn add_contains_11(b: &mut Builder) {
    use TapeSymbol::*;
    b.add("s", &[LeftEnd, Letter('0'), Letter('1')], "s", 1, Weight::One);
    b.add("s", &[Letter('1')], "t", 1, Weight::One);
    b.add("s", &[RightEnd], "rej", 1, Weight::One);
    b.add("t", &[Letter('1')], "acc", 1, Weight::One);
    b.add("t", &[LeftEnd, Letter('0'), RightEnd], "rej", 1, Weight::One);
}

/// Two nondeterministic states guessing the position of a `11` factor.
pub fn contains_11_npfa() -> TwoNpfaSpec {
    use NpfaStateKind::*;
    let mut b = Builder::new(
        "contains-11",
        &[
            ("s", Nondeterministic),
            ("t", Nondeterministic),
            ("acc", Accepting),
            ("rej", Rejecting),
        ],
    );
    add_contains_11(&mut b);
    b.m
}

/// A coin toss at `¢` that either accepts outright or hands over to the
/// `11`-guessing machine.
pub fn coin_or_guess_npfa() -> TwoNpfaSpec {
    use NpfaStateKind::*;
    let mut b = Builder::new(
        "coin-or-guess",
        &[
            ("q0", Probabilistic),
            ("s", Nondeterministic),
            ("t", Nondeterministic),
            ("acc", Accepting),
            ("rej", Rejecting),
        ],
    );
    b.add("q0", &ALL, "s", 1, Weight::Half);
    b.add("q0", &ALL, "acc", 1, Weight::Half);
    add_contains_11(&mut b);
    b.m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_machines_are_normalized() {
        for m in [
            accept_all_npfa(),
            coin_then_accept_npfa(),
            contains_11_npfa(),
            coin_or_guess_npfa(),
        ] {
            let r = validate_2npfa_normalized(&m);
            assert!(r.is_normalized(), "{}: {r:?}", m.name);
        }
    }

    #[test]
    fn normalization_failures() {
        let mut m = contains_11_npfa();
        m.transitions[0].dir = 0;
        let r = validate_2npfa_normalized(&m);
        assert_eq!(r.stay_moves.len(), 1);

        let mut m = coin_then_accept_npfa();
        m.transitions[0].dir = -1;
        let r = validate_2npfa_normalized(&m);
        assert_eq!(r.leftward_coins.len(), 1);
        assert!(r.stay_moves.is_empty());
    }

    #[test]
    fn simple_probabilities() {
        let r = run_2npfa(&coin_then_accept_npfa(), "0110", &ChoiceSequence::default(), 50).unwrap();
        assert!((r.p_acc - 0.5).abs() < 1e-15);
        let w = ChoiceSequence(vec![(1, 1)]);
        let r = run_2npfa(&accept_all_npfa(), "01", &w, 50).unwrap();
        assert_eq!(r.p_acc, 1.0);
    }

    #[test]
    fn unresolved_choice_is_an_error() {
        let r = run_2npfa(&accept_all_npfa(), "", &ChoiceSequence::default(), 50);
        assert_eq!(r, Err(NpfaError::Unresolved { choices_made: 0 }));
    }

    /// Brute-force oracle: the machine accepts under some choices iff `11` occurs.
    #[test]
    fn witness_search_matches_language() {
        let m = contains_11_npfa();
        for x in ["", "0", "1", "01", "11", "0110", "1010", "10011"] {
            let (_, p) = search_witness(&m, x, x.len() + 2, 50).unwrap();
            let expected = if x.contains("11") { 1.0 } else { 0.0 };
            assert_eq!(p, expected, "{x}");
        }
        let m = coin_or_guess_npfa();
        let (_, p) = search_witness(&m, "0110", 8, 50).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = search_witness(&m, "010", 8, 50).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }
}
