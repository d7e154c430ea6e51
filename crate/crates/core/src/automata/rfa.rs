//! One-way deterministic reversible finite automata.

use std::collections::{BTreeMap, BTreeSet};

use super::verifier::{HeadKind, StateClass, TableBuilder, TapeSymbol, VerifierSpec};
use super::SpecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    Reject,
}

/// A 1rfa: total, per-symbol injective transition function over `¢ Σ $`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRfaSpec {
    pub name: String,
    pub input: Vec<char>,
    pub states: Vec<(String, StateClass)>,
    pub initial: usize,
    pub delta: BTreeMap<(usize, TapeSymbol), usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReversibilityReport {
    /// `(state, symbol)` pairs with no successor.
    pub undefined: Vec<(String, String)>,
    /// `(symbol, target, sources)` where several states share a successor.
    pub collisions: Vec<(String, String, Vec<String>)>,
}

impl ReversibilityReport {
    pub fn is_reversible(&self) -> bool {
        self.undefined.is_empty() && self.collisions.is_empty()
    }
}

impl OneRfaSpec {
    pub fn tape_symbols(&self) -> Vec<TapeSymbol> {
        std::iter::once(TapeSymbol::LeftEnd)
            .chain(self.input.iter().map(|&c| TapeSymbol::Letter(c)))
            .chain(std::iter::once(TapeSymbol::RightEnd))
            .collect()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q].0
    }

    pub fn class(&self, q: usize) -> StateClass {
        self.states[q].1
    }

    pub fn validate(&self) -> ReversibilityReport {
        let mut report = ReversibilityReport::default();
        for sym in self.tape_symbols() {
            let mut preimages: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for p in 0..self.states.len() {
                match self.delta.get(&(p, sym)) {
                    Some(&q) => preimages.entry(q).or_default().push(p),
                    None => report
                        .undefined
                        .push((self.state_name(p).to_string(), sym.to_string())),
                }
            }
            for (q, ps) in preimages {
                if ps.len() > 1 {
                    report.collisions.push((
                        sym.to_string(),
                        self.state_name(q).to_string(),
                        ps.iter().map(|&p| self.state_name(p).to_string()).collect(),
                    ));
                }
            }
        }
        report
    }

    fn ensure_valid(&self) -> Result<(), SpecError> {
        if self.class(self.initial).is_halting() {
            return Err(SpecError::Structure("initial state must be non-halting".into()));
        }
        let report = self.validate();
        if let Some((q, s)) = report.undefined.first() {
            return Err(SpecError::Structure(format!("no transition for ({q}, {s})")));
        }
        if let Some((s, q, ps)) = report.collisions.first() {
            return Err(SpecError::Structure(format!(
                "states {ps:?} all move to {q} on {s}"
            )));
        }
        Ok(())
    }

    /// The same machine as a measure-many 1qfa with 0/1 amplitudes and a
    /// communication alphabet consisting of the blank only.
    pub fn to_plain_verifier(&self) -> Result<VerifierSpec, SpecError> {
        self.ensure_valid()?;
        let mut b = TableBuilder::new(format!("{}-1qfa", self.name), HeadKind::OneWay, &self.input);
        for (name, class) in &self.states {
            b.state(name.clone(), *class, 1);
        }
        b.set_initial(self.initial);
        for (&(p, sym), &q) in &self.delta {
            b.map(sym, (p, 0), (q, 0));
        }
        b.complete()
    }
}

/// Runs `m` on `¢x$`, halting as soon as a halting state is entered. A run
/// that is still non-halting after `$` rejects.
pub fn run_1rfa(m: &OneRfaSpec, x: &str) -> Result<Outcome, SpecError> {
    let mut q = m.initial;
    let tape = std::iter::once(Ok(TapeSymbol::LeftEnd))
        .chain(x.chars().map(|c| {
            if m.input.contains(&c) {
                Ok(TapeSymbol::Letter(c))
            } else {
                Err(SpecError::Alphabet(c))
            }
        }))
        .chain(std::iter::once(Ok(TapeSymbol::RightEnd)));
    for sym in tape {
        let sym = sym?;
        q = *m.delta.get(&(q, sym)).ok_or_else(|| {
            SpecError::Structure(format!("no transition for ({}, {sym})", m.state_name(q)))
        })?;
        match m.class(q) {
            StateClass::Accepting => return Ok(Outcome::Accept),
            StateClass::Rejecting => return Ok(Outcome::Reject),
            StateClass::NonHalting => {}
        }
    }
    Ok(Outcome::Reject)
}

fn machine(
    name: &str,
    states: &[(&str, StateClass)],
    letters: &[(char, &[(&str, &str)])],
    right_end: &[(&str, &str)],
) -> OneRfaSpec {
    let index: BTreeMap<&str, usize> = states.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
    let mut delta = BTreeMap::new();
    for q in 0..states.len() {
        delta.insert((q, TapeSymbol::LeftEnd), q);
    }
    let mut fill = |sym: TapeSymbol, pairs: &[(&str, &str)]| {
        let moved: BTreeSet<usize> = pairs.iter().map(|(p, _)| index[p]).collect();
        for (p, q) in pairs {
            delta.insert((index[p], sym), index[q]);
        }
        for q in 0..states.len() {
            if !moved.contains(&q) {
                delta.insert((q, sym), q);
            }
        }
    };
    for (c, pairs) in letters {
        fill(TapeSymbol::Letter(*c), pairs);
    }
    fill(TapeSymbol::RightEnd, right_end);
    OneRfaSpec {
        name: name.to_string(),
        input: letters.iter().map(|(c, _)| *c).collect(),
        states: states.iter().map(|(n, c)| (n.to_string(), *c)).collect(),
        initial: 0,
        delta,
    }
}

/// Accepts binary strings with an even number of `1`s.
pub fn parity_rfa() -> OneRfaSpec {
    use StateClass::*;
    machine(
        "parity",
        &[("e", NonHalting), ("o", NonHalting), ("acc", Accepting), ("rej", Rejecting)],
        &[('0', &[]), ('1', &[("e", "o"), ("o", "e")])],
        &[("e", "acc"), ("acc", "e"), ("o", "rej"), ("rej", "o")],
    )
}

/// Accepts binary strings whose number of `1`s is divisible by three.
pub fn mod3_rfa() -> OneRfaSpec {
    use StateClass::*;
    machine(
        "mod3",
        &[
            ("c0", NonHalting),
            ("c1", NonHalting),
            ("c2", NonHalting),
            ("acc", Accepting),
            ("rej1", Rejecting),
            ("rej2", Rejecting),
        ],
        &[('0', &[]), ('1', &[("c0", "c1"), ("c1", "c2"), ("c2", "c0")])],
        &[
            ("c0", "acc"),
            ("acc", "c0"),
            ("c1", "rej1"),
            ("rej1", "c1"),
            ("c2", "rej2"),
            ("rej2", "c2"),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_examples() {
        let m = parity_rfa();
        assert!(m.validate().is_reversible());
        assert_eq!(run_1rfa(&m, "11").unwrap(), Outcome::Accept);
        assert_eq!(run_1rfa(&m, "1").unwrap(), Outcome::Reject);
        assert_eq!(run_1rfa(&m, "").unwrap(), Outcome::Accept);
        assert_eq!(run_1rfa(&m, "2"), Err(SpecError::Alphabet('2')));
    }

    #[test]
    fn mod3_examples() {
        let m = mod3_rfa();
        assert!(m.validate().is_reversible());
        assert_eq!(run_1rfa(&m, "0110101").unwrap(), Outcome::Reject);
        assert_eq!(run_1rfa(&m, "010101").unwrap(), Outcome::Accept);
    }

    #[test]
    fn collisions_are_reported() {
        let mut m = parity_rfa();
        m.delta.insert((1, TapeSymbol::Letter('1')), 1);
        let report = m.validate();
        assert!(!report.is_reversible());
        assert!(m.to_plain_verifier().is_err());
    }

    #[test]
    fn missing_transition_is_an_error() {
        let mut m = parity_rfa();
        m.delta.remove(&(0, TapeSymbol::Letter('1')));
        assert!(matches!(run_1rfa(&m, "1"), Err(SpecError::Structure(_))));
    }
}
