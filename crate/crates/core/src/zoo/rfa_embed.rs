//! Public one-way verifier simulating a 1rfa `M`.
//!
//! The verifier announces its current state of `M` on every step and reads it
//! back on the next one. If the cell no longer holds its own state `p` but
//! some other state `q`, it halts in `q_rej,p,q`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::rfa::{run_1rfa, OneRfaSpec, Outcome};
use crate::automata::{HeadKind, StateClass, TableBuilder, TapeSymbol};
use crate::provers::{identity_prover, ScheduleFamily};

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};

pub fn rfa_embed(m: &OneRfaSpec) -> Result<ProtocolBundle, ZooError> {
    let report = m.validate();
    if !report.is_reversible() {
        return Err(ZooError::Parameter(format!(
            "{} is not a total reversible automaton: {report:?}",
            m.name
        )));
    }
    let mut b = TableBuilder::new(format!("rfa-{}", m.name), HeadKind::OneWay, &m.input);
    let blank = b.blank();
    let q: Vec<usize> = (0..m.states.len())
        .map(|i| b.state(m.state_name(i), m.class(i), 1))
        .collect();
    b.set_initial(q[m.initial]);
    let ann: Vec<usize> = q.iter().map(|&s| b.announce(s)).collect();

    let target = |p: usize, sym: TapeSymbol| {
        let r = m.delta[&(p, sym)];
        (q[r], ann[r])
    };
    let to = target(m.initial, TapeSymbol::LeftEnd);
    b.map(TapeSymbol::LeftEnd, (q[m.initial], blank), to);

    let live: Vec<usize> = (0..m.states.len()).filter(|&p| !m.class(p).is_halting()).collect();
    for &p in &live {
        for other in (0..m.states.len()).filter(|&o| o != p) {
            let name = format!("q_rej,{},{}", m.state_name(p), m.state_name(other));
            let s = b.state(name, StateClass::Rejecting, 1);
            let g = b.announce(s);
            for sym in m.tape_symbols().into_iter().skip(1) {
                b.map(sym, (q[p], ann[other]), (s, g));
            }
        }
        for sym in m.tape_symbols().into_iter().skip(1) {
            let to = target(p, sym);
            b.map(sym, (q[p], ann[p]), to);
        }
    }
    let verifier = b.complete()?;

    let machine = m.clone();
    Ok(ProtocolBundle {
        name: format!("rfa-{}", m.name),
        params: BTreeMap::new(),
        verifier,
        honest: identity_prover(),
        adversaries: AdversaryFamily::Schedules(ScheduleFamily::Literal),
        claims: Claims {
            completeness: Some(1.0),
            soundness: Some(1.0),
            public: true,
            classical_prover: true,
            committed_prover: true,
            interaction_bound: None,
            poly_time: true,
        },
        language: Some(Arc::new(move |x: &str| {
            matches!(run_1rfa(&machine, x), Ok(Outcome::Accept))
        })),
        qft_dim: None,
        notes: vec![
            COMPLETION_NOTE.to_string(),
            "a machine still non-halting after $ leaves residual mass".to_string(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::rfa::{mod3_rfa, parity_rfa};
    use crate::automata::{inputs_up_to, validate_public, validate_wellformed};

    #[test]
    fn embeddings_are_wellformed_and_public() {
        for m in [parity_rfa(), mod3_rfa()] {
            let p = rfa_embed(&m).unwrap();
            assert!(validate_wellformed(&p.verifier, 5, 1e-9).is_wellformed(), "{}", m.name);
            assert!(validate_public(&p.verifier).unwrap().is_public(), "{}", m.name);
        }
    }

    #[test]
    fn honest_run_matches_machine() {
        for m in [parity_rfa(), mod3_rfa()] {
            let p = rfa_embed(&m).unwrap();
            for x in inputs_up_to(&['0', '1'], 5) {
                let r = p.run_honest(&x).unwrap();
                let want = if p.in_language(&x).unwrap() { 1.0 } else { 0.0 };
                assert!((r.p_acc - want).abs() < 1e-12, "{} on {x}", m.name);
            }
        }
    }

    #[test]
    fn rejects_irreversible_machine() {
        let mut m = parity_rfa();
        let e = m.states.iter().position(|(n, _)| n == "e").unwrap();
        m.delta.insert((e, TapeSymbol::Letter('1')), e);
        assert!(matches!(rfa_embed(&m), Err(ZooError::Parameter(_))));
    }
}
