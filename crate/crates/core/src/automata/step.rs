use std::collections::BTreeMap;

use serde::Serialize;

use crate::linalg::{Amplitude, SparseMatrix, ZERO};

use super::verifier::{HeadKind, TapeSymbol, VerifierSpec};
use super::SpecError;

/// Step operator `U_x^δ` on `Q × Z_{n+2} × Γ` for a fixed tape `¢x$`.
#[derive(Debug, Clone)]
pub struct StepOperator {
    pub matrix: SparseMatrix,
    pub num_states: usize,
    pub tape_len: usize,
    pub num_comm: usize,
}

impl StepOperator {
    pub fn index(&self, q: usize, k: usize, gamma: usize) -> usize {
        (q * self.tape_len + k) * self.num_comm + gamma
    }

    pub fn split(&self, idx: usize) -> (usize, usize, usize) {
        let gamma = idx % self.num_comm;
        let rest = idx / self.num_comm;
        (rest / self.tape_len, rest % self.tape_len, gamma)
    }
}

fn assemble<F>(num_states: usize, num_comm: usize, tape: &[TapeSymbol], images: F) -> StepOperator
where
    F: Fn(usize, TapeSymbol, usize) -> Vec<(usize, usize, i8, Amplitude)>,
{
    let len = tape.len();
    let mut op = StepOperator {
        matrix: SparseMatrix::zeros(num_states * len * num_comm),
        num_states,
        tape_len: len,
        num_comm,
    };
    for q in 0..num_states {
        for (k, &sym) in tape.iter().enumerate() {
            for g in 0..num_comm {
                let col = op.index(q, k, g);
                for (q2, g2, d, a) in images(q, sym, g) {
                    let k2 = (k as i64 + d as i64).rem_euclid(len as i64) as usize;
                    let row = op.index(q2, k2, g2);
                    op.matrix.push(col, row, a);
                }
            }
        }
    }
    op
}

/// Builds `U_x^δ` for input `x`.
pub fn build_step_operator(v: &VerifierSpec, x: &str) -> Result<StepOperator, SpecError> {
    let tape = v.tape(x)?;
    Ok(assemble(v.states.len(), v.num_comm(), &tape, |q, sym, g| {
        v.delta(q, sym, g).collect()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WellformednessFailure {
    /// `V_σ|q,γ⟩` has no image.
    MissingImage { symbol: String, state: String, comm: String },
    /// Inner product of two columns of `V_σ` deviates from δ_ab.
    ColumnOverlap {
        symbol: String,
        a: (String, String),
        b: (String, String),
        defect: f64,
    },
    /// The assembled step operator for `input` is not unitary.
    StepOperator { input: String, defect: f64 },
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct WellformednessReport {
    pub failures: Vec<WellformednessFailure>,
    pub inputs_checked: usize,
    pub max_defect: f64,
}

impl WellformednessReport {
    pub fn is_wellformed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks each `V_σ` for unitarity, then checks the assembled step operator of
/// every input of length at most `n_max`.
pub fn validate_wellformed(v: &VerifierSpec, n_max: usize, tau: f64) -> WellformednessReport {
    let mut report = WellformednessReport::default();
    let label = |idx: usize| {
        let (q, g) = v.split_local(idx);
        (v.states.name(q).to_string(), v.alphabets.comm()[g].clone())
    };
    for (sym, m) in v.transitions() {
        for c in 0..m.dim() {
            if m.column(c).iter().all(|&(_, a)| a == ZERO) {
                let (state, comm) = label(c);
                report.failures.push(WellformednessFailure::MissingImage {
                    symbol: sym.to_string(),
                    state,
                    comm,
                });
            }
        }
        for (a, b, value) in m.gram_defects(tau) {
            let defect = value.norm();
            report.max_defect = report.max_defect.max(defect);
            if a == b && m.column(a).is_empty() {
                continue;
            }
            report.failures.push(WellformednessFailure::ColumnOverlap {
                symbol: sym.to_string(),
                a: label(a),
                b: label(b),
                defect,
            });
        }
    }
    for x in inputs_up_to(v.alphabets.input(), n_max) {
        let op = build_step_operator(v, &x).expect("generated inputs use Σ");
        let defect = op.matrix.unitarity_defect();
        report.inputs_checked += 1;
        report.max_defect = report.max_defect.max(defect);
        if defect > tau {
            report.failures.push(WellformednessFailure::StepOperator { input: x, defect });
        }
    }
    report
}

/// All strings over `sigma` of length `0..=n_max`, shortest first.
pub fn inputs_up_to(sigma: &[char], n_max: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..n_max {
        layer = layer
            .iter()
            .flat_map(|w| sigma.iter().map(move |&c| format!("{w}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublicViolation {
    pub symbol: String,
    pub state: String,
    pub read: String,
    pub target: String,
    pub written: String,
    pub expected: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PublicReport {
    pub violations: Vec<PublicViolation>,
}

impl PublicReport {
    pub fn is_public(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every transition from a non-halting state into a non-halting
/// state `q'` writes the announcement of `(q', D(q',γ'))`. Transitions into
/// halting states are unconstrained.
pub fn validate_public(v: &VerifierSpec) -> Result<PublicReport, SpecError> {
    if v.kind == HeadKind::TwoWay {
        for sym in v.alphabets.comm() {
            if let Some(inner) = sym.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
                let (state, dir) = inner.rsplit_once(',').ok_or_else(|| {
                    SpecError::Structure(format!("malformed announcement symbol {sym}"))
                })?;
                if v.states.index(state).is_none() || !matches!(dir, "-1" | "+0" | "+1") {
                    return Err(SpecError::Structure(format!(
                        "announcement symbol {sym} does not name a state and direction"
                    )));
                }
            }
        }
    }
    let mut report = PublicReport::default();
    for (&sym, _) in v.transitions() {
        for q in v.states.non_halting() {
            for g in 0..v.num_comm() {
                for (q2, g2, d, a) in v.delta(q, sym, g) {
                    if a == ZERO || v.is_halting(q2) {
                        continue;
                    }
                    let expected = v.announcement(q2, d);
                    if expected != Some(g2) {
                        report.violations.push(PublicViolation {
                            symbol: sym.to_string(),
                            state: v.states.name(q).to_string(),
                            read: v.alphabets.comm()[g].clone(),
                            target: v.states.name(q2).to_string(),
                            written: v.alphabets.comm()[g2].clone(),
                            expected: expected.map(|e| v.alphabets.comm()[e].clone()),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawTransition {
    pub from: usize,
    pub symbol: TapeSymbol,
    pub read: usize,
    pub to: usize,
    pub write: usize,
    pub dir: i8,
    pub amplitude: Amplitude,
}

/// The general form `δ(q,σ,γ,q',γ',d)` with no unidirectionality assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDelta {
    pub num_states: usize,
    pub num_comm: usize,
    pub entries: Vec<RawTransition>,
}

impl RawDelta {
    pub fn from_verifier(v: &VerifierSpec) -> Self {
        let mut entries = Vec::new();
        for &sym in v.transitions().keys() {
            for q in 0..v.states.len() {
                for g in 0..v.num_comm() {
                    for (q2, g2, d, a) in v.delta(q, sym, g) {
                        entries.push(RawTransition {
                            from: q,
                            symbol: sym,
                            read: g,
                            to: q2,
                            write: g2,
                            dir: d,
                            amplitude: a,
                        });
                    }
                }
            }
        }
        Self {
            num_states: v.states.len(),
            num_comm: v.num_comm(),
            entries,
        }
    }

    pub fn build_step_operator(&self, tape: &[TapeSymbol]) -> StepOperator {
        let mut by_source: BTreeMap<(usize, TapeSymbol, usize), Vec<(usize, usize, i8, Amplitude)>> =
            BTreeMap::new();
        for t in &self.entries {
            by_source
                .entry((t.from, t.symbol, t.read))
                .or_default()
                .push((t.to, t.write, t.dir, t.amplitude));
        }
        assemble(self.num_states, self.num_comm, tape, |q, sym, g| {
            by_source.get(&(q, sym, g)).cloned().unwrap_or_default()
        })
    }

    /// Recovers the unidirectional form, using `template` for states, alphabets
    /// and directions of targets that never occur. Fails if one target pair
    /// `(q',γ')` is reached with two different head directions.
    pub fn to_verifier(&self, template: &VerifierSpec) -> Result<VerifierSpec, SpecError> {
        if self.num_states != template.states.len() || self.num_comm != template.num_comm() {
            return Err(SpecError::Structure("raw table does not match the template".into()));
        }
        let mut directions = template.directions().to_vec();
        let mut seen: BTreeMap<usize, i8> = BTreeMap::new();
        let mut transitions: BTreeMap<TapeSymbol, SparseMatrix> = template
            .transitions()
            .keys()
            .map(|&s| (s, SparseMatrix::zeros(template.local_dim())))
            .collect();
        for t in &self.entries {
            if t.amplitude == ZERO {
                continue;
            }
            let row = template.local_index(t.to, t.write);
            if let Some(&d) = seen.get(&row) {
                if d != t.dir {
                    return Err(SpecError::DirectionConflict {
                        state: template.states.name(t.to).to_string(),
                        comm: template.alphabets.comm()[t.write].clone(),
                    });
                }
            }
            seen.insert(row, t.dir);
            directions[row] = t.dir;
            let m = transitions
                .get_mut(&t.symbol)
                .ok_or_else(|| SpecError::Structure(format!("unknown symbol {}", t.symbol)))?;
            m.push(template.local_index(t.from, t.read), row, t.amplitude);
        }
        VerifierSpec::new(
            template.name.clone(),
            template.kind,
            template.states.clone(),
            template.alphabets.clone(),
            transitions,
            directions,
        )
    }
}
