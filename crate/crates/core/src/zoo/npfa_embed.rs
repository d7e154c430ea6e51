//! Verifier simulating a normalized 2npfa `M` with the help of a classical
//! prover that resolves its nondeterminism.
//!
//! A coin toss in state `p` moves into both outcomes with amplitude `1/√2` and
//! writes the mark `(p,+1)`, which reveals that a toss happened but not its
//! result. A nondeterministic state `p` first writes `κ` and waits in `p^`;
//! the prover answers with a move `(q,d)`, which the verifier executes if it
//! is legal and confirms by writing `(p^,d)`. The prover must erase every mark
//! before the next step.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::automata::npfa::{
    accept_all_npfa, coin_or_guess_npfa, coin_then_accept_npfa, contains_11_npfa, search_witness,
    validate_2npfa_normalized, ChoiceOracle, ChoiceSequence, NpfaStateKind, PublicEvent,
    TwoNpfaSpec,
};
use crate::automata::{announcement_name, validate_public, HeadKind, StateClass, TableBuilder};
use crate::linalg::inv_sqrt;
use crate::provers::{
    identity_prover, respond, HistoryResponder, Prover, ProverError, ProverImage, ProverStrategy,
    RoundContext,
};

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};

pub const KAPPA: &str = "κ";

fn hat(name: &str) -> String {
    format!("{name}^")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Kappa,
    Coin(usize),
    Other,
}

/// Comm-symbol bookkeeping shared by the verifier and its provers.
#[derive(Debug, Clone)]
struct Symbols {
    kappa: usize,
    marks: Vec<Mark>,
    choices: BTreeMap<(usize, i8), usize>,
}

impl Symbols {
    fn new(m: &TwoNpfaSpec, comm: &[String]) -> Self {
        let index: HashMap<&str, usize> = comm.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut marks = vec![Mark::Other; comm.len()];
        let kappa = index[KAPPA];
        marks[kappa] = Mark::Kappa;
        let mut choices = BTreeMap::new();
        for (p, (name, kind)) in m.states.iter().enumerate() {
            for d in [-1, 1] {
                let g = index[announcement_name(name, d).as_str()];
                choices.insert((p, d), g);
                if *kind == NpfaStateKind::Probabilistic && d == 1 {
                    marks[g] = Mark::Coin(p);
                }
            }
        }
        Self { kappa, marks, choices }
    }
}

#[derive(Clone)]
enum OracleSource {
    Fixed(Arc<dyn ChoiceOracle>),
    /// Best choice sequence per input, found by exhaustive search.
    Witness {
        machine: TwoNpfaSpec,
        cache: Arc<Mutex<HashMap<String, Option<ChoiceSequence>>>>,
    },
}

/// The honest prover: erases every mark and answers `κ` with the move chosen
/// by an oracle on the public history, which it rebuilds from its own tape.
#[derive(Clone)]
pub struct NpfaResponder {
    id: String,
    symbols: Symbols,
    oracle: OracleSource,
    /// Reply `#` instead of failing when the oracle has no answer.
    give_up: bool,
}

impl NpfaResponder {
    pub fn new(id: impl Into<String>, bundle: &ProtocolBundle, m: &TwoNpfaSpec, oracle: Arc<dyn ChoiceOracle>) -> Self {
        Self {
            id: id.into(),
            symbols: Symbols::new(m, bundle.verifier.alphabets.comm()),
            oracle: OracleSource::Fixed(oracle),
            give_up: false,
        }
    }

    /// Answers with a choice sequence maximizing the acceptance of `M` on the
    /// current input.
    pub fn witness(bundle: &ProtocolBundle, m: &TwoNpfaSpec) -> Self {
        Self::witness_for(m, bundle.verifier.alphabets.comm())
    }

    fn witness_for(m: &TwoNpfaSpec, comm: &[String]) -> Self {
        Self {
            id: "witness".into(),
            symbols: Symbols::new(m, comm),
            oracle: OracleSource::Witness {
                machine: m.clone(),
                cache: Arc::default(),
            },
            give_up: false,
        }
    }

    fn history(&self, oracle: &dyn ChoiceOracle, tape: &[u16]) -> Result<Vec<PublicEvent>, String> {
        let mut history = Vec::new();
        for &cell in tape.iter().filter(|&&c| c != 0) {
            match self.symbols.marks[cell as usize - 1] {
                Mark::Kappa => {
                    let (to, dir) = oracle
                        .choose(&history)
                        .ok_or_else(|| format!("no choice after {history:?}"))?;
                    history.push(PublicEvent::Choice { to, dir });
                }
                Mark::Coin(from) => history.push(PublicEvent::Coin { from }),
                Mark::Other => {}
            }
        }
        Ok(history)
    }

    fn choose(&self, x: &str, tape: &[u16]) -> Result<(usize, i8), String> {
        let pick = |oracle: &dyn ChoiceOracle| {
            let history = self.history(oracle, tape)?;
            oracle
                .choose(&history)
                .ok_or_else(|| format!("no choice after {history:?}"))
        };
        match &self.oracle {
            OracleSource::Fixed(o) => pick(o.as_ref()),
            OracleSource::Witness { machine, cache } => {
                let mut cache = cache.lock().map_err(|e| e.to_string())?;
                let seq = cache.entry(x.to_string()).or_insert_with(|| {
                    let n = x.chars().count();
                    search_witness(machine, x, n + 2, 4 * (n + 2)).ok().map(|(s, _)| s)
                });
                match seq {
                    Some(seq) => pick(seq),
                    None => Err(format!("no witness for {x:?}")),
                }
            }
        }
    }
}

impl ProverStrategy for NpfaResponder {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn apply(&self, ctx: &RoundContext, gamma: usize, tape: &[u16]) -> Result<ProverImage, ProverError> {
        let reply = if gamma == 0 {
            0
        } else if gamma == self.symbols.kappa {
            match self.choose(ctx.input, tape) {
                Ok(choice) => *self
                    .symbols
                    .choices
                    .get(&choice)
                    .ok_or_else(|| ProverError::Oracle(format!("choice {choice:?} has no symbol")))?,
                Err(_) if self.give_up => 0,
                Err(e) => return Err(ProverError::Oracle(e)),
            }
        } else {
            0
        };
        respond(ctx, gamma, tape, reply)
    }
}

pub fn npfa_embed(m: &TwoNpfaSpec) -> Result<ProtocolBundle, ZooError> {
    let report = validate_2npfa_normalized(m);
    if !report.is_normalized() {
        return Err(ZooError::Parameter(format!("{} is not normalized: {report:?}", m.name)));
    }
    let mut b = TableBuilder::new(format!("npfa-{}", m.name), HeadKind::TwoWay, &m.input);
    let blank = b.blank();
    let kappa = b.comm(KAPPA);
    let q: Vec<usize> = m
        .states
        .iter()
        .map(|(name, kind)| {
            let class = match kind {
                NpfaStateKind::Accepting => StateClass::Accepting,
                NpfaStateKind::Rejecting => StateClass::Rejecting,
                _ => StateClass::NonHalting,
            };
            b.state(name.clone(), class, 0)
        })
        .collect();
    b.set_initial(q[m.initial]);
    let hats: BTreeMap<usize, usize> = (0..m.states.len())
        .filter(|&p| m.kind(p) == NpfaStateKind::Nondeterministic)
        .map(|p| (p, b.state(hat(m.state_name(p)), StateClass::NonHalting, 0)))
        .collect();
    let mut names: Vec<String> = m.states.iter().map(|(n, _)| n.clone()).collect();
    names.extend(hats.keys().map(|&p| hat(m.state_name(p))));
    let mut marked = Vec::new();
    for name in &names {
        for d in [-1i8, 1] {
            marked.push((b.comm(announcement_name(name, d)), d));
        }
    }
    for s in 0..b.num_states() {
        b.direction_at(s, kappa, 0);
        for &(g, d) in &marked {
            b.direction_at(s, g, d);
        }
    }
    let sym_of = |b: &mut TableBuilder, name: &str, d: i8| b.comm(announcement_name(name, d));

    for sym in m.tape_symbols() {
        for p in 0..m.states.len() {
            let moves: Vec<_> = m.moves(p, sym).copied().collect();
            match m.kind(p) {
                NpfaStateKind::Probabilistic if !moves.is_empty() => {
                    if moves[0].to == moves[1].to {
                        return Err(ZooError::Parameter(format!(
                            "coin of {} on {sym} has a single outcome",
                            m.state_name(p)
                        )));
                    }
                    let mark = sym_of(&mut b, m.state_name(p), 1);
                    let images: Vec<_> = moves.iter().map(|t| ((q[t.to], mark), inv_sqrt(2))).collect();
                    b.set(sym, (q[p], blank), &images);
                }
                NpfaStateKind::Nondeterministic => {
                    let h = hats[&p];
                    b.map(sym, (q[p], blank), (h, kappa));
                    for t in moves {
                        let choice = sym_of(&mut b, m.state_name(t.to), t.dir);
                        let confirm = sym_of(&mut b, &hat(m.state_name(p)), t.dir);
                        b.map(sym, (h, choice), (q[t.to], confirm));
                    }
                }
                _ => {}
            }
        }
    }
    let verifier = b.complete()?;
    let public = validate_public(&verifier)?.is_public();
    let honest = NpfaResponder::witness_for(m, verifier.alphabets.comm());

    let adversaries = {
        let machine = m.clone();
        let comm = verifier.alphabets.comm().to_vec();
        move |x: &str| adversaries(&machine, &comm, x)
    };
    Ok(ProtocolBundle {
        name: format!("npfa-{}", m.name),
        params: BTreeMap::new(),
        verifier,
        honest: Arc::new(honest),
        adversaries: AdversaryFamily::Strategies(Arc::new(adversaries)),
        claims: Claims {
            completeness: None,
            soundness: None,
            public,
            classical_prover: true,
            committed_prover: true,
            interaction_bound: None,
            poly_time: false,
        },
        language: None,
        qft_dim: None,
        notes: vec![
            COMPLETION_NOTE.to_string(),
            "every nondeterministic move is requested with kappa; an invalid choice rejects".to_string(),
        ],
    })
}

/// Every choice sequence up to length 3, a prover answering `κ` with the
/// blank, and one that never erases anything.
fn adversaries(m: &TwoNpfaSpec, comm: &[String], _x: &str) -> Vec<Prover> {
    let symbols = Symbols::new(m, comm);
    let alphabet = m.choice_alphabet();
    let mut seqs = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in &alphabet {
                let mut t: Vec<(usize, i8)> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    let mut out: Vec<Prover> = seqs
        .into_iter()
        .map(|s| {
            let id = format!("choices-{s:?}");
            Arc::new(NpfaResponder {
                id,
                symbols: symbols.clone(),
                oracle: OracleSource::Fixed(Arc::new(ChoiceSequence(s))),
                give_up: true,
            }) as Prover
        })
        .collect();
    out.push(Arc::new(HistoryResponder::new("blank-choice", |_, _, _| Ok(0))));
    out.push(identity_prover());
    out
}

pub(super) fn builtin(name: &str) -> Result<ProtocolBundle, ZooError> {
    let m = match name {
        "npfa-accept-all" => accept_all_npfa(),
        "npfa-coin" => coin_then_accept_npfa(),
        "npfa-contains-11" => contains_11_npfa(),
        "npfa-coin-or-guess" => coin_or_guess_npfa(),
        other => return Err(ZooError::Unknown(other.to_string())),
    };
    let mut bundle = npfa_embed(&m)?;
    bundle.name = name.to_string();
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::npfa::run_2npfa;
    use crate::automata::{inputs_up_to, validate_wellformed};
    use crate::provers::{check_classical, check_committed};

    fn machines() -> Vec<TwoNpfaSpec> {
        vec![accept_all_npfa(), coin_then_accept_npfa(), contains_11_npfa(), coin_or_guess_npfa()]
    }

    #[test]
    fn embeddings_are_wellformed() {
        for m in machines() {
            let p = npfa_embed(&m).unwrap();
            let report = validate_wellformed(&p.verifier, 4, 1e-9);
            assert!(report.is_wellformed(), "{}: {:?}", m.name, report.failures.first());
            let nondet = m.states.iter().any(|(_, k)| *k == NpfaStateKind::Nondeterministic);
            assert_eq!(validate_public(&p.verifier).unwrap().is_public(), !nondet, "{}", m.name);
            assert_eq!(p.claims.public, !nondet);
        }
    }

    #[test]
    fn honest_matches_direct_run() {
        for m in machines() {
            let p = npfa_embed(&m).unwrap();
            for x in inputs_up_to(&['0', '1'], 4) {
                let n = x.len();
                let (seq, _) = search_witness(&m, &x, n + 2, 4 * (n + 2)).unwrap();
                let direct = run_2npfa(&m, &x, &seq, 4 * (n + 2)).unwrap();
                let r = p.run_honest(&x).unwrap();
                assert!((r.p_acc - direct.p_acc).abs() < 1e-9, "{} on {x}: {} vs {}", m.name, r.p_acc, direct.p_acc);
            }
        }
    }

    #[test]
    fn fixed_oracle_matches_direct_run() {
        let m = coin_or_guess_npfa();
        let p = npfa_embed(&m).unwrap();
        let s = m.index("s").unwrap();
        let t = m.index("t").unwrap();
        let seq = ChoiceSequence(vec![(s, 1), (t, 1), (s, 1)]);
        let prover = NpfaResponder::new("fixed", &p, &m, Arc::new(seq.clone()));
        for x in ["0", "11", "011", "110"] {
            let direct = run_2npfa(&m, x, &seq, 40).unwrap();
            let r = p.run(&prover, x, &p.engine_config(x)).unwrap();
            assert!((r.p_acc - direct.p_acc).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn cheaters_are_rejected() {
        let p = npfa_embed(&contains_11_npfa()).unwrap();
        let out = p.worst_case("010", &p.engine_config("010"), 0).unwrap();
        assert!(out.p_acc_upper < 1e-9, "{out:?}");
        let lazy = p.run(identity_prover().as_ref(), "11", &p.engine_config("11")).unwrap();
        assert!(lazy.p_acc < 1e-12);
    }

    #[test]
    fn honest_is_classical_and_committed() {
        let p = npfa_embed(&coin_or_guess_npfa()).unwrap();
        let k = p.verifier.num_comm();
        assert!(check_classical(p.honest.as_ref(), "11", 3, k, 1e-9).unwrap().passed());
        assert!(check_committed(p.honest.as_ref(), "11", 3, k, 1e-9).unwrap().passed());
    }
}
