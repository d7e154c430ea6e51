//! TOML protocol files: a verifier table plus the prover, adversary family
//! and claims it is checked against.
//!
//! ```toml
//! name = "zero"
//! builtin = "zero"
//!
//! [claims]
//! completeness = 1.0
//! soundness = 1.0
//! public = true
//!
//! [verifier]
//! kind = "one-way"
//! input = ["0", "1"]
//! comm = ["#", "q0", "q1"]
//! initial = "q0"
//! states = [{ name = "q0", class = "non-halting" }, { name = "q_acc", class = "accepting" }]
//!
//! [[verifier.transitions]]
//! symbol = "¢"
//! state = "q0"
//! read = "#"
//! images = [{ state = "q0", write = "q0", dir = 1, amp = { re = 1.0, im = 0.0 } }]
//! ```
//!
//! Amplitudes may also be written as `{ fourier = { N = 3, j = 1, l = 2 } }` or
//! `{ invsqrt = 2 }`; both are evaluated on load and written back as pairs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Alphabets, HeadKind, StateClass, StateSet, TapeSymbol, VerifierSpec};
use crate::linalg::{amp, fourier_entry, inv_sqrt, Amplitude, SparseMatrix, ZERO};
use crate::provers::{identity_prover, HistoryResponder, Prover, ScheduleFamily};
use crate::zoo::{builtin, AdversaryFamily, Claims, ProtocolBundle, ZooError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFileError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid protocol file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Zoo(#[from] ZooError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierForm {
    #[serde(rename = "N")]
    pub n: usize,
    pub j: usize,
    pub l: usize,
}

/// Amplitude as written in a file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AmpForm {
    Pair { re: f64, im: f64 },
    Fourier { fourier: FourierForm },
    InvSqrt { invsqrt: usize },
}

impl AmpForm {
    pub fn value(&self) -> Result<Amplitude, String> {
        match *self {
            AmpForm::Pair { re, im } => Ok(amp(re, im)),
            AmpForm::Fourier { fourier: f } => {
                if f.n == 0 {
                    return Err("fourier amplitude with N = 0".into());
                }
                Ok(fourier_entry(f.n, f.j, f.l))
            }
            AmpForm::InvSqrt { invsqrt } => {
                if invsqrt == 0 {
                    return Err("invsqrt of 0".into());
                }
                Ok(inv_sqrt(invsqrt))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub name: String,
    pub class: StateClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageEntry {
    pub state: String,
    pub write: String,
    pub dir: i8,
    pub amp: AmpForm,
}

/// `V_symbol|state,read⟩ = Σ amp |image.state, image.write⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub symbol: String,
    pub state: String,
    pub read: String,
    pub images: Vec<ImageEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifierSection {
    pub kind: HeadKind,
    pub input: Vec<char>,
    pub comm: Vec<String>,
    pub initial: String,
    pub states: Vec<StateEntry>,
    pub transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub name: String,
    /// Built-in protocol supplying the honest prover, adversaries and language.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, usize>,
    /// `identity`, `eraser` or `never-edit`; ignored when `builtin` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prover: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversaries: Option<ScheduleFamily>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default)]
    pub claims: Claims,
    pub verifier: VerifierSection,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, column)
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecFileError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            SpecFileError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    /// Serializes with one line per state and per transition.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            name: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            builtin: &'a Option<String>,
            #[serde(skip_serializing_if = "BTreeMap::is_empty")]
            params: &'a BTreeMap<String, usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            prover: &'a Option<String>,
            #[serde(skip_serializing_if = "Option::is_none")]
            adversaries: &'a Option<ScheduleFamily>,
            #[serde(skip_serializing_if = "Vec::is_empty")]
            notes: &'a Vec<String>,
            claims: &'a Claims,
        }
        let header = Header {
            name: &self.name,
            builtin: &self.builtin,
            params: &self.params,
            prover: &self.prover,
            adversaries: &self.adversaries,
            notes: &self.notes,
            claims: &self.claims,
        };
        let mut out = toml::to_string(&header).expect("headers always serialize");
        let sec = &self.verifier;
        let q = |s: &str| toml::Value::String(s.to_string()).to_string();
        let f = |x: f64| toml::Value::Float(x).to_string();
        let list = |items: Vec<String>| format!("[{}]", items.join(", "));
        let kind = match sec.kind {
            HeadKind::OneWay => "one-way",
            HeadKind::TwoWay => "two-way",
        };
        let _ = writeln!(out, "\n[verifier]");
        let _ = writeln!(out, "kind = {}", q(kind));
        let _ = writeln!(out, "input = {}", list(sec.input.iter().map(|c| q(&c.to_string())).collect()));
        let _ = writeln!(out, "comm = {}", list(sec.comm.iter().map(|c| q(c)).collect()));
        let _ = writeln!(out, "initial = {}", q(&sec.initial));
        let _ = writeln!(out, "states = [");
        for s in &sec.states {
            let class = match s.class {
                StateClass::NonHalting => "non-halting",
                StateClass::Accepting => "accepting",
                StateClass::Rejecting => "rejecting",
            };
            let _ = writeln!(out, "  {{ name = {}, class = {} }},", q(&s.name), q(class));
        }
        let _ = writeln!(out, "]");
        for t in &sec.transitions {
            let images: Vec<String> = t
                .images
                .iter()
                .map(|i| {
                    let a = i.amp.value().unwrap_or(ZERO);
                    format!(
                        "{{ state = {}, write = {}, dir = {}, amp = {{ re = {}, im = {} }} }}",
                        q(&i.state),
                        q(&i.write),
                        i.dir,
                        f(a.re),
                        f(a.im)
                    )
                })
                .collect();
            let _ = writeln!(out, "\n[[verifier.transitions]]");
            let _ = writeln!(out, "symbol = {}", q(&t.symbol));
            let _ = writeln!(out, "state = {}", q(&t.state));
            let _ = writeln!(out, "read = {}", q(&t.read));
            let _ = writeln!(out, "images = {}", list(images));
        }
        out
    }

    /// Writes out every non-zero entry of the verifier's transition table.
    pub fn from_bundle(p: &ProtocolBundle) -> Self {
        let v = &p.verifier;
        let comm = v.alphabets.comm();
        let mut transitions = Vec::new();
        for (sym, m) in v.transitions() {
            for col in 0..m.dim() {
                let images: Vec<ImageEntry> = m
                    .column(col)
                    .iter()
                    .filter(|&&(_, a)| a != ZERO)
                    .map(|&(row, a)| {
                        let (q2, g2) = v.split_local(row);
                        ImageEntry {
                            state: v.states.name(q2).to_string(),
                            write: comm[g2].clone(),
                            dir: v.direction(q2, g2),
                            amp: AmpForm::Pair { re: a.re, im: a.im },
                        }
                    })
                    .collect();
                if images.is_empty() {
                    continue;
                }
                let (q, g) = v.split_local(col);
                transitions.push(TransitionEntry {
                    symbol: sym.to_string(),
                    state: v.states.name(q).to_string(),
                    read: comm[g].clone(),
                    images,
                });
            }
        }
        let is_builtin = crate::zoo::BUILTIN_NAMES.contains(&p.name.as_str());
        SpecFile {
            name: v.name.clone(),
            builtin: is_builtin.then(|| p.name.clone()),
            params: p.params.clone(),
            prover: (!is_builtin).then(|| p.honest.id()),
            adversaries: match &p.adversaries {
                AdversaryFamily::Schedules(f) if !is_builtin => Some(*f),
                _ => None,
            },
            notes: p.notes.clone(),
            claims: p.claims.clone(),
            verifier: VerifierSection {
                kind: v.kind,
                input: v.alphabets.input().to_vec(),
                comm: comm.to_vec(),
                initial: v.states.name(v.states.initial()).to_string(),
                states: v
                    .states
                    .names()
                    .iter()
                    .enumerate()
                    .map(|(q, n)| StateEntry {
                        name: n.clone(),
                        class: v.states.class(q),
                    })
                    .collect(),
                transitions,
            },
        }
    }

    /// Builds the verifier exactly as written. Missing entries stay zero, so
    /// the result may fail the well-formedness check.
    pub fn verifier(&self) -> Result<VerifierSpec, SpecFileError> {
        let sec = &self.verifier;
        let invalid = SpecFileError::Invalid;
        let states = StateSet::new(
            sec.states.iter().map(|s| s.name.clone()).collect(),
            sec.states.iter().map(|s| s.class).collect(),
            sec.states
                .iter()
                .position(|s| s.name == sec.initial)
                .ok_or_else(|| invalid(format!("initial state {:?} is not declared", sec.initial)))?,
        )
        .map_err(|e| invalid(e.to_string()))?;
        let alphabets = Alphabets::new(sec.input.clone(), sec.comm.clone()).map_err(|e| invalid(e.to_string()))?;
        let ng = sec.comm.len();
        let dim = states.len() * ng;
        let state = |name: &str, at: usize| {
            states
                .index(name)
                .ok_or_else(|| invalid(format!("transition {at}: unknown state {name:?}")))
        };
        let symbol = |name: &str, at: usize| {
            alphabets
                .comm_index(name)
                .ok_or_else(|| invalid(format!("transition {at}: unknown communication symbol {name:?}")))
        };
        let default_dir = if sec.kind == HeadKind::OneWay { 1 } else { 0 };
        let mut directions: Vec<Option<i8>> = vec![None; dim];
        let mut transitions: BTreeMap<TapeSymbol, SparseMatrix> = alphabets
            .tape_symbols()
            .into_iter()
            .map(|s| (s, SparseMatrix::zeros(dim)))
            .collect();
        for (at, t) in sec.transitions.iter().enumerate() {
            let sym = TapeSymbol::parse(&t.symbol)
                .filter(|s| transitions.contains_key(s))
                .ok_or_else(|| invalid(format!("transition {at}: unknown tape symbol {:?}", t.symbol)))?;
            let col = state(&t.state, at)? * ng + symbol(&t.read, at)?;
            let m = transitions.get_mut(&sym).expect("symbol present");
            if !m.column(col).is_empty() {
                return Err(invalid(format!(
                    "transition {at}: V_{sym}|{},{}⟩ is declared twice",
                    t.state, t.read
                )));
            }
            for img in &t.images {
                let row = state(&img.state, at)? * ng + symbol(&img.write, at)?;
                match directions[row] {
                    Some(d) if d != img.dir => {
                        return Err(invalid(format!(
                            "transition {at}: direction {} for {},{} conflicts with {d}",
                            img.dir, img.state, img.write
                        )))
                    }
                    _ => directions[row] = Some(img.dir),
                }
                let a = img.amp.value().map_err(|e| invalid(format!("transition {at}: {e}")))?;
                m.push(col, row, a);
            }
        }
        let directions = directions.into_iter().map(|d| d.unwrap_or(default_dir)).collect();
        VerifierSpec::new(self.name.clone(), sec.kind, states, alphabets, transitions, directions)
            .map_err(|e| invalid(e.to_string()))
    }

    /// Combines the file's verifier and claims with the provers it names.
    pub fn to_bundle(&self) -> Result<ProtocolBundle, SpecFileError> {
        let verifier = self.verifier()?;
        let mut bundle = match &self.builtin {
            Some(name) => builtin(name, self.params.get("N").copied())?,
            None => {
                let honest: Prover = match self.prover.as_deref().unwrap_or("identity") {
                    "identity" => identity_prover(),
                    "eraser" => Arc::new(HistoryResponder::eraser()),
                    "never-edit" => Arc::new(HistoryResponder::never_edit()),
                    other => return Err(SpecFileError::Invalid(format!("unknown prover {other:?}"))),
                };
                ProtocolBundle {
                    name: self.name.clone(),
                    params: self.params.clone(),
                    verifier: verifier.clone(),
                    honest,
                    adversaries: AdversaryFamily::Schedules(ScheduleFamily::KeepOrWrite),
                    claims: Claims::default(),
                    language: None,
                    qft_dim: self.params.get("N").copied(),
                    notes: Vec::new(),
                }
            }
        };
        if let Some(f) = self.adversaries {
            bundle.adversaries = AdversaryFamily::Schedules(f);
        }
        bundle.verifier = verifier;
        bundle.claims = self.claims.clone();
        if !self.notes.is_empty() {
            bundle.notes = self.notes.clone();
        }
        Ok(bundle)
    }
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml())
    }
}

pub fn load_bundle(text: &str) -> Result<ProtocolBundle, SpecFileError> {
    SpecFile::parse(text)?.to_bundle()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{odd_protocol, zero_public_protocol};

    #[test]
    fn round_trip_preserves_verifier() {
        let p = zero_public_protocol().unwrap();
        let file = SpecFile::from_bundle(&p);
        let text = file.to_toml();
        let again = SpecFile::parse(&text).unwrap();
        assert_eq!(again, file);
        assert_eq!(again.verifier().unwrap(), p.verifier);
    }

    #[test]
    fn constructor_forms() {
        let f: AmpForm = toml::from_str::<BTreeMap<String, AmpForm>>("a = { invsqrt = 4 }").unwrap()["a"];
        assert!((f.value().unwrap() - amp(0.5, 0.0)).norm() < 1e-15);
        let f: AmpForm =
            toml::from_str::<BTreeMap<String, AmpForm>>("a = { fourier = { N = 4, j = 1, l = 1 } }").unwrap()["a"];
        assert!((f.value().unwrap() - amp(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = SpecFile::parse("name = \"x\"\n[verifier]\nkind = \"sideways\"\n").unwrap_err();
        match err {
            SpecFileError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        let p = odd_protocol().unwrap();
        let mut file = SpecFile::from_bundle(&p);
        file.verifier.transitions[0].images[0].state = "nowhere".into();
        let err = file.verifier().unwrap_err();
        assert!(err.to_string().contains("nowhere"), "{err}");
    }
}
