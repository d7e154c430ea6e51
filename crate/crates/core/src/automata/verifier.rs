//! Verifier automata in unidirectional `(Q×Γ)`-transition form.
//!
//! A verifier is stored as one sparse unitary `V_σ` per tape symbol acting on
//! `span{|q,γ⟩}`, plus a total head-direction map `D(q',γ')`. The induced
//! step operator on `Q × Z_{n+2} × Γ` is a block-diagonal application of the
//! `V_σ` followed by a permutation of head positions, so per-symbol unitarity
//! is sufficient for well-formedness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{Amplitude, SparseMatrix, ZERO};

use super::SpecError;

/// Name of the blank communication / prover-tape symbol.
pub const BLANK: &str = "#";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TapeSymbol {
    LeftEnd,
    Letter(char),
    RightEnd,
}

impl TapeSymbol {
    pub fn parse(s: &str) -> Option<Self> {
        let mut chars = s.chars();
        let c = chars.next()?;
        if chars.next().is_some() {
            return None;
        }
        Some(match c {
            '¢' => TapeSymbol::LeftEnd,
            '$' => TapeSymbol::RightEnd,
            c => TapeSymbol::Letter(c),
        })
    }
}

impl fmt::Display for TapeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TapeSymbol::LeftEnd => write!(f, "¢"),
            TapeSymbol::RightEnd => write!(f, "$"),
            TapeSymbol::Letter(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateClass {
    NonHalting,
    Accepting,
    Rejecting,
}

impl StateClass {
    pub fn is_halting(self) -> bool {
        self != StateClass::NonHalting
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadKind {
    OneWay,
    TwoWay,
}

/// Inner states partitioned into non-halting, accepting and rejecting sets.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    names: Vec<String>,
    classes: Vec<StateClass>,
    initial: usize,
}

impl StateSet {
    pub fn new(
        names: Vec<String>,
        classes: Vec<StateClass>,
        initial: usize,
    ) -> Result<Self, SpecError> {
        if names.len() != classes.len() {
            return Err(SpecError::Structure("state names and classes differ in length".into()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(SpecError::Structure("duplicate state name".into()));
        }
        match classes.get(initial) {
            Some(StateClass::NonHalting) => {}
            Some(_) => return Err(SpecError::Structure("initial state must be non-halting".into())),
            None => return Err(SpecError::Structure("initial state out of range".into())),
        }
        Ok(Self { names, classes, initial })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn class(&self, q: usize) -> StateClass {
        self.classes[q]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn with_class(&self, class: StateClass) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.classes[q] == class).collect()
    }

    pub fn non_halting(&self) -> Vec<usize> {
        self.with_class(StateClass::NonHalting)
    }

    pub fn accepting(&self) -> Vec<usize> {
        self.with_class(StateClass::Accepting)
    }

    pub fn rejecting(&self) -> Vec<usize> {
        self.with_class(StateClass::Rejecting)
    }
}

/// Input alphabet Σ and communication alphabet Γ (with `#` at index 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabets {
    input: Vec<char>,
    comm: Vec<String>,
}

impl Alphabets {
    pub fn new(input: Vec<char>, comm: Vec<String>) -> Result<Self, SpecError> {
        if input.iter().any(|&c| c == '¢' || c == '$') {
            return Err(SpecError::Structure("endmarkers may not be input symbols".into()));
        }
        if comm.first().map(String::as_str) != Some(BLANK) {
            return Err(SpecError::Structure(
                "communication alphabet must start with the blank '#'".into(),
            ));
        }
        let unique: BTreeSet<&String> = comm.iter().collect();
        if unique.len() != comm.len() {
            return Err(SpecError::Structure("duplicate communication symbol".into()));
        }
        Ok(Self { input, comm })
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn comm(&self) -> &[String] {
        &self.comm
    }

    pub fn comm_index(&self, name: &str) -> Option<usize> {
        self.comm.iter().position(|c| c == name)
    }

    /// `Σ̌ = {¢} ∪ Σ ∪ {$}` in canonical order.
    pub fn tape_symbols(&self) -> Vec<TapeSymbol> {
        std::iter::once(TapeSymbol::LeftEnd)
            .chain(self.input.iter().map(|&c| TapeSymbol::Letter(c)))
            .chain(std::iter::once(TapeSymbol::RightEnd))
            .collect()
    }

    /// `¢ x $` as tape symbols.
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

/// A verifier automaton with a communication cell.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifierSpec {
    pub name: String,
    pub kind: HeadKind,
    pub states: StateSet,
    pub alphabets: Alphabets,
    transitions: BTreeMap<TapeSymbol, SparseMatrix>,
    directions: Vec<i8>,
}

impl VerifierSpec {
    pub fn new(
        name: impl Into<String>,
        kind: HeadKind,
        states: StateSet,
        alphabets: Alphabets,
        transitions: BTreeMap<TapeSymbol, SparseMatrix>,
        directions: Vec<i8>,
    ) -> Result<Self, SpecError> {
        let dim = states.len() * alphabets.comm().len();
        if directions.len() != dim {
            return Err(SpecError::Structure(format!(
                "direction map has {} entries, expected {dim}",
                directions.len()
            )));
        }
        if let Some(d) = directions.iter().find(|d| !(-1..=1).contains(*d)) {
            return Err(SpecError::Structure(format!("head direction {d} not in {{-1,0,+1}}")));
        }
        if kind == HeadKind::OneWay && directions.iter().any(|&d| d != 1) {
            return Err(SpecError::Structure(
                "one-way verifiers must move the head right on every transition".into(),
            ));
        }
        for sym in alphabets.tape_symbols() {
            match transitions.get(&sym) {
                Some(m) if m.dim() == dim => {}
                Some(m) => {
                    return Err(SpecError::Structure(format!(
                        "V_{sym} has dimension {}, expected {dim}",
                        m.dim()
                    )))
                }
                None => return Err(SpecError::Structure(format!("missing V_{sym}"))),
            }
        }
        if transitions.len() != alphabets.tape_symbols().len() {
            return Err(SpecError::Structure("transition for a symbol outside Σ̌".into()));
        }
        Ok(Self {
            name: name.into(),
            kind,
            states,
            alphabets,
            transitions,
            directions,
        })
    }

    pub fn num_comm(&self) -> usize {
        self.alphabets.comm().len()
    }

    /// Dimension of `span{|q,γ⟩}`.
    pub fn local_dim(&self) -> usize {
        self.states.len() * self.num_comm()
    }

    pub fn local_index(&self, q: usize, gamma: usize) -> usize {
        q * self.num_comm() + gamma
    }

    pub fn split_local(&self, idx: usize) -> (usize, usize) {
        (idx / self.num_comm(), idx % self.num_comm())
    }

    pub fn transition(&self, sym: TapeSymbol) -> &SparseMatrix {
        &self.transitions[&sym]
    }

    pub fn transitions(&self) -> &BTreeMap<TapeSymbol, SparseMatrix> {
        &self.transitions
    }

    pub(crate) fn transition_mut(&mut self, sym: TapeSymbol) -> Option<&mut SparseMatrix> {
        self.transitions.get_mut(&sym)
    }

    pub fn direction(&self, q: usize, gamma: usize) -> i8 {
        self.directions[self.local_index(q, gamma)]
    }

    pub fn directions(&self) -> &[i8] {
        &self.directions
    }

    pub fn is_halting(&self, q: usize) -> bool {
        self.states.class(q).is_halting()
    }

    pub fn tape(&self, x: &str) -> Result<Vec<TapeSymbol>, SpecError> {
        self.alphabets.tape(x)
    }

    /// `δ(q,σ,γ,·,·,·)` as `(q', γ', d, amplitude)` tuples.
    pub fn delta(
        &self,
        q: usize,
        sym: TapeSymbol,
        gamma: usize,
    ) -> impl Iterator<Item = (usize, usize, i8, Amplitude)> + '_ {
        self.transitions[&sym]
            .column(self.local_index(q, gamma))
            .iter()
            .map(move |&(row, a)| {
                let (q2, g2) = self.split_local(row);
                (q2, g2, self.directions[row], a)
            })
    }

    /// The public announcement symbol for "next state `q`, head direction `d`":
    /// `q` itself for one-way verifiers, `(q,d)` for two-way ones.
    pub fn announcement(&self, q: usize, d: i8) -> Option<usize> {
        let name = match self.kind {
            HeadKind::OneWay => self.states.name(q).to_string(),
            HeadKind::TwoWay => announcement_name(self.states.name(q), d),
        };
        self.alphabets.comm_index(&name)
    }

    /// Symbols a non-halting configuration can carry in the cell right after a
    /// verifier move, together with the blank.
    pub fn message_alphabet(&self) -> Vec<usize> {
        let mut out = BTreeSet::from([0usize]);
        for m in self.transitions.values() {
            for (row, col, a) in m.entries() {
                let (q, _) = self.split_local(col);
                let (q2, g2) = self.split_local(row);
                if a != ZERO && !self.is_halting(q) && !self.is_halting(q2) {
                    out.insert(g2);
                }
            }
        }
        out.into_iter().collect()
    }

    /// True iff every non-halting state reading a symbol outside
    /// [`message_alphabet`](Self::message_alphabet) moves entirely into
    /// rejecting states.
    pub fn non_message_symbols_reject(&self) -> bool {
        let msg: BTreeSet<usize> = self.message_alphabet().into_iter().collect();
        self.transitions.keys().all(|&sym| {
            self.states.non_halting().into_iter().all(|q| {
                (0..self.num_comm()).filter(|g| !msg.contains(g)).all(|g| {
                    self.delta(q, sym, g)
                        .all(|(q2, _, _, _)| self.states.class(q2) == StateClass::Rejecting)
                })
            })
        })
    }

    /// Same verifier with a different name; used when rebuilding exported files.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub fn announcement_name(state: &str, d: i8) -> String {
    format!("({state},{d:+})")
}

/// Incremental construction of a partially specified verifier table, plus
/// completion to a full unitary.
#[derive(Debug, Clone)]
pub struct TableBuilder {
    name: String,
    kind: HeadKind,
    input: Vec<char>,
    comm: Vec<String>,
    states: Vec<(String, StateClass, i8)>,
    initial: Option<usize>,
    entries: BTreeMap<TapeSymbol, BTreeMap<(usize, usize), Vec<((usize, usize), Amplitude)>>>,
    direction_overrides: BTreeMap<(usize, usize), i8>,
    reject_pool_prefix: String,
}

impl TableBuilder {
    pub fn new(name: impl Into<String>, kind: HeadKind, input: &[char]) -> Self {
        Self {
            name: name.into(),
            kind,
            input: input.to_vec(),
            comm: vec![BLANK.to_string()],
            states: Vec::new(),
            initial: None,
            entries: BTreeMap::new(),
            direction_overrides: BTreeMap::new(),
            reject_pool_prefix: "q_rej,c".into(),
        }
    }

    /// Adds (or looks up) a state. `dir` is its default head direction `D(q)`.
    pub fn state(&mut self, name: impl Into<String>, class: StateClass, dir: i8) -> usize {
        let name = name.into();
        if let Some(i) = self.states.iter().position(|(n, _, _)| *n == name) {
            return i;
        }
        let dir = if self.kind == HeadKind::OneWay { 1 } else { dir };
        self.states.push((name, class, dir));
        self.states.len() - 1
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|(n, _, _)| n == name)
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initial = Some(q);
    }

    /// Adds (or looks up) a communication symbol.
    pub fn comm(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(i) = self.comm.iter().position(|n| *n == name) {
            return i;
        }
        self.comm.push(name);
        self.comm.len() - 1
    }

    pub fn blank(&self) -> usize {
        0
    }

    /// The public announcement symbol of `q` under its default direction.
    pub fn announce(&mut self, q: usize) -> usize {
        let (name, _, d) = &self.states[q];
        let sym = match self.kind {
            HeadKind::OneWay => name.clone(),
            HeadKind::TwoWay => announcement_name(name, *d),
        };
        self.comm(sym)
    }

    /// Overrides `D(q', γ')` for a specific pair.
    pub fn direction_at(&mut self, q: usize, gamma: usize, d: i8) {
        self.direction_overrides.insert((q, gamma), d);
    }

    pub fn set_reject_pool_prefix(&mut self, prefix: impl Into<String>) {
        self.reject_pool_prefix = prefix.into();
    }

    /// Declares `V_σ|q,γ⟩ = Σ amp |q',γ'⟩`, replacing any earlier declaration.
    pub fn set(
        &mut self,
        sym: TapeSymbol,
        from: (usize, usize),
        to: &[((usize, usize), Amplitude)],
    ) {
        self.entries
            .entry(sym)
            .or_default()
            .insert(from, to.to_vec());
    }

    /// Shorthand for a single basis-state image with amplitude 1.
    pub fn map(&mut self, sym: TapeSymbol, from: (usize, usize), to: (usize, usize)) {
        self.set(sym, from, &[(to, crate::linalg::ONE)]);
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    fn tape_symbols(&self) -> Vec<TapeSymbol> {
        std::iter::once(TapeSymbol::LeftEnd)
            .chain(self.input.iter().map(|&c| TapeSymbol::Letter(c)))
            .chain(std::iter::once(TapeSymbol::RightEnd))
            .collect()
    }

    /// Builds the verifier exactly as declared, without completion. Missing
    /// columns stay zero, so the result is generally not well-formed.
    pub fn build_partial(&self) -> Result<VerifierSpec, SpecError> {
        let ng = self.comm.len();
        let dim = self.states.len() * ng;
        let mut transitions = BTreeMap::new();
        for sym in self.tape_symbols() {
            let mut m = SparseMatrix::zeros(dim);
            if let Some(cols) = self.entries.get(&sym) {
                for (&(q, g), images) in cols {
                    for &((q2, g2), a) in images {
                        m.push(q * ng + g, q2 * ng + g2, a);
                    }
                }
            }
            transitions.insert(sym, m);
        }
        let mut directions = Vec::with_capacity(dim);
        for (q, (_, _, d)) in self.states.iter().enumerate() {
            for g in 0..ng {
                directions.push(*self.direction_overrides.get(&(q, g)).unwrap_or(d));
            }
        }
        let states = StateSet::new(
            self.states.iter().map(|(n, _, _)| n.clone()).collect(),
            self.states.iter().map(|(_, c, _)| *c).collect(),
            self.initial
                .ok_or_else(|| SpecError::Structure("no initial state".into()))?,
        )?;
        let alphabets = Alphabets::new(self.input.clone(), self.comm.clone())?;
        VerifierSpec::new(
            self.name.clone(),
            self.kind,
            states,
            alphabets,
            transitions,
            directions,
        )
    }

    /// Completes every `V_σ` to a unitary. Undeclared columns of non-halting
    /// states are sent to unused rows of rejecting states; a pool of fresh
    /// rejecting states is added when the existing ones do not offer enough
    /// rows. Remaining columns (halting states) absorb the leftover rows and
    /// the orthogonal complement of the declared images.
    pub fn complete(mut self) -> Result<VerifierSpec, SpecError> {
        let partial = self.build_partial()?;
        let ng = self.comm.len();
        let mut deficit = 0usize;
        for (sym, m) in partial.transitions() {
            check_declared_orthonormal(&partial, *sym, m)?;
            let used = used_rows(m);
            let free_reject_rows = (0..m.dim())
                .filter(|r| !used.contains(r))
                .filter(|r| partial.states.class(r / ng) == StateClass::Rejecting)
                .count();
            let open_non_halting = (0..m.dim())
                .filter(|&c| m.column(c).is_empty() && !partial.is_halting(c / ng))
                .count();
            deficit = deficit.max(open_non_halting.saturating_sub(free_reject_rows));
        }
        let extra = deficit.div_ceil(ng);
        for k in 0..extra {
            let name = format!("{}{}", self.reject_pool_prefix, k);
            self.state(name, StateClass::Rejecting, 0);
        }
        let mut spec = self.build_partial()?;
        let syms: Vec<TapeSymbol> = spec.transitions().keys().copied().collect();
        for sym in syms {
            let completed = complete_matrix(&spec, spec.transition(sym))?;
            *spec.transition_mut(sym).expect("symbol present") = completed;
        }
        Ok(spec)
    }
}

fn used_rows(m: &SparseMatrix) -> BTreeSet<usize> {
    m.entries()
        .filter(|&(_, _, a)| a != ZERO)
        .map(|(r, _, _)| r)
        .collect()
}

fn check_declared_orthonormal(
    spec: &VerifierSpec,
    sym: TapeSymbol,
    m: &SparseMatrix,
) -> Result<(), SpecError> {
    let declared: BTreeSet<usize> = (0..m.dim()).filter(|&c| !m.column(c).is_empty()).collect();
    for (a, b, v) in m.gram_defects(1e-9) {
        if a == b && !declared.contains(&a) {
            continue;
        }
        let (qa, ga) = spec.split_local(a);
        let (qb, gb) = spec.split_local(b);
        return Err(SpecError::NotUnitary(format!(
            "declared images of V_{sym} on |{},{}⟩ and |{},{}⟩ overlap by {:.3e}",
            spec.states.name(qa),
            spec.alphabets.comm()[ga],
            spec.states.name(qb),
            spec.alphabets.comm()[gb],
            v.norm()
        )));
    }
    Ok(())
}

fn complete_matrix(spec: &VerifierSpec, m: &SparseMatrix) -> Result<SparseMatrix, SpecError> {
    let ng = spec.num_comm();
    let dim = m.dim();
    let used = used_rows(m);
    let mut out = m.clone();

    let open: Vec<usize> = (0..dim).filter(|&c| m.column(c).is_empty()).collect();
    let (open_live, open_halting): (Vec<usize>, Vec<usize>) =
        open.into_iter().partition(|&c| !spec.is_halting(c / ng));

    let free: Vec<usize> = (0..dim).filter(|r| !used.contains(r)).collect();
    let (mut reject_rows, other_rows): (Vec<usize>, Vec<usize>) = free
        .into_iter()
        .partition(|&r| spec.states.class(r / ng) == StateClass::Rejecting);
    reject_rows.reverse();

    for &c in &open_live {
        let r = reject_rows.pop().ok_or_else(|| {
            SpecError::Structure("not enough rejecting rows to complete the table".into())
        })?;
        out.set_column(c, vec![(r, crate::linalg::ONE)]);
    }
    reject_rows.reverse();

    let mut vectors: Vec<Vec<(usize, Amplitude)>> = reject_rows
        .into_iter()
        .chain(other_rows)
        .map(|r| vec![(r, crate::linalg::ONE)])
        .collect();
    vectors.extend(complement_within(m, &used));

    if vectors.len() != open_halting.len() {
        return Err(SpecError::NotUnitary(format!(
            "declared images span {} rows but only {} columns are declared",
            used.len(),
            (0..dim).filter(|&c| !m.column(c).is_empty()).count()
        )));
    }
    for (c, v) in open_halting.into_iter().zip(vectors) {
        out.set_column(c, v);
    }
    Ok(out)
}

/// Orthonormal basis of `span{e_r : r ∈ used}` minus the span of the declared
/// columns, by Gram–Schmidt over the used rows.
fn complement_within(m: &SparseMatrix, used: &BTreeSet<usize>) -> Vec<Vec<(usize, Amplitude)>> {
    let rows: Vec<usize> = used.iter().copied().collect();
    let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let declared = (0..m.dim()).filter(|&c| !m.column(c).is_empty()).count();
    if rows.len() <= declared {
        return Vec::new();
    }
    let mut basis: Vec<Vec<Amplitude>> = Vec::new();
    for c in 0..m.dim() {
        if m.column(c).is_empty() {
            continue;
        }
        let mut v = vec![ZERO; rows.len()];
        for &(r, a) in m.column(c) {
            v[pos[&r]] += a;
        }
        basis.push(v);
    }
    let mut found = Vec::new();
    for i in 0..rows.len() {
        let mut v = vec![ZERO; rows.len()];
        v[i] = crate::linalg::ONE;
        for b in &basis {
            let overlap: Amplitude = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for a in v.iter_mut() {
                *a /= norm;
            }
            found.push(
                v.iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > 1e-24)
                    .map(|(k, &a)| (rows[k], a))
                    .collect(),
            );
            basis.push(v);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{amp, inv_sqrt};

    fn coin_builder() -> TableBuilder {
        let mut b = TableBuilder::new("coin", HeadKind::TwoWay, &['0']);
        let p = b.state("p", StateClass::NonHalting, 1);
        let a = b.state("a", StateClass::Accepting, 0);
        let r = b.state("r", StateClass::Rejecting, 0);
        b.set_initial(p);
        let mark = b.comm("m");
        let h = inv_sqrt(2);
        for sym in [TapeSymbol::LeftEnd, TapeSymbol::Letter('0'), TapeSymbol::RightEnd] {
            b.set(sym, (p, 0), &[((a, mark), h), ((r, mark), h)]);
        }
        b
    }

    #[test]
    fn completion_yields_unitaries() {
        let spec = coin_builder().complete().unwrap();
        for m in spec.transitions().values() {
            assert!(m.unitarity_defect() < 1e-9);
        }
        // |p,m⟩ is undeclared and non-halting: it must land in a rejecting state.
        let m_idx = spec.alphabets.comm_index("m").unwrap();
        for sym in spec.alphabets.tape_symbols() {
            for (q2, _, _, _) in spec.delta(0, sym, m_idx) {
                assert_eq!(spec.states.class(q2), StateClass::Rejecting);
            }
        }
    }

    #[test]
    fn overlapping_declarations_are_rejected() {
        let mut b = TableBuilder::new("bad", HeadKind::OneWay, &['0']);
        let p = b.state("p", StateClass::NonHalting, 1);
        let r = b.state("r", StateClass::Rejecting, 1);
        b.set_initial(p);
        let a = b.comm("a");
        b.map(TapeSymbol::Letter('0'), (p, 0), (r, 0));
        b.map(TapeSymbol::Letter('0'), (p, a), (r, 0));
        assert!(matches!(b.complete(), Err(SpecError::NotUnitary(_))));
    }

    #[test]
    fn one_way_directions_are_forced() {
        let mut b = TableBuilder::new("ow", HeadKind::OneWay, &['0']);
        let p = b.state("p", StateClass::NonHalting, -1);
        b.set_initial(p);
        let spec = b.complete().unwrap();
        assert!(spec.directions().iter().all(|&d| d == 1));
    }

    #[test]
    fn alphabet_rules() {
        assert!(Alphabets::new(vec!['$'], vec!["#".into()]).is_err());
        assert!(Alphabets::new(vec!['0'], vec!["a".into()]).is_err());
        let a = Alphabets::new(vec!['0', '1'], vec!["#".into()]).unwrap();
        assert_eq!(a.tape("2"), Err(SpecError::Alphabet('2')));
        assert_eq!(a.tape("").unwrap(), vec![TapeSymbol::LeftEnd, TapeSymbol::RightEnd]);
    }

    #[test]
    fn state_set_rules() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(StateSet::new(
            names.clone(),
            vec![StateClass::Accepting, StateClass::NonHalting],
            0
        )
        .is_err());
        let s = StateSet::new(names, vec![StateClass::NonHalting, StateClass::Rejecting], 0).unwrap();
        assert_eq!(s.rejecting(), vec![1]);
        assert_eq!(s.non_halting(), vec![0]);
        assert!(s.accepting().is_empty());
    }

    #[test]
    fn complex_amplitudes_survive_completion() {
        let mut b = TableBuilder::new("phase", HeadKind::OneWay, &['0']);
        let p = b.state("p", StateClass::NonHalting, 1);
        b.set_initial(p);
        b.set(TapeSymbol::Letter('0'), (p, 0), &[((p, 0), amp(0.0, 1.0))]);
        let spec = b.complete().unwrap();
        let (_, _, _, a) = spec.delta(p, TapeSymbol::Letter('0'), 0).next().unwrap();
        assert_eq!(a, amp(0.0, 1.0));
    }
}
