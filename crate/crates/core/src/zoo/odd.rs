//! One-way verifier with a single query, for `0^m 1 z` where `z` holds an odd
//! number of `0`s.
//!
//! On the first `1` the verifier writes `a` and moves to `q1`. A committed
//! prover must erase it before the next step; if `a` is still there the
//! verifier rejects. `q1`/`q2` then track the parity of the `0`s that follow.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{HeadKind, StateClass, TableBuilder, TapeSymbol};
use crate::provers::{HistoryResponder, ScheduleFamily};

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};

pub fn odd_protocol() -> Result<ProtocolBundle, ZooError> {
    use StateClass::*;
    use TapeSymbol::*;
    let mut b = TableBuilder::new("odd", HeadKind::OneWay, &['0', '1']);
    let blank = b.blank();
    let a = b.comm("a");
    let q0 = b.state("q0", NonHalting, 1);
    let q1 = b.state("q1", NonHalting, 1);
    let q2 = b.state("q2", NonHalting, 1);
    let acc = b.state("q_acc", Accepting, 0);
    let rej0 = b.state("q_rej,0", Rejecting, 0);
    let rej1 = b.state("q_rej,1", Rejecting, 0);
    b.set_initial(q0);

    b.map(LeftEnd, (q0, blank), (q0, blank));
    b.map(Letter('0'), (q0, blank), (q0, blank));
    b.map(Letter('0'), (q1, blank), (q2, blank));
    b.map(Letter('0'), (q2, blank), (q1, blank));
    b.map(Letter('1'), (q0, blank), (q1, a));
    b.map(Letter('1'), (q1, blank), (q1, blank));
    b.map(Letter('1'), (q2, blank), (q2, blank));
    for sym in [Letter('0'), Letter('1')] {
        b.map(sym, (q1, a), (rej0, blank));
    }
    b.map(RightEnd, (q0, blank), (rej0, blank));
    b.map(RightEnd, (q1, blank), (rej1, blank));
    b.map(RightEnd, (q2, blank), (acc, blank));
    let verifier = b.complete()?;

    Ok(ProtocolBundle {
        name: "odd".into(),
        params: BTreeMap::new(),
        verifier,
        honest: Arc::new(HistoryResponder::eraser()),
        adversaries: AdversaryFamily::Schedules(ScheduleFamily::KeepOrWrite),
        claims: Claims {
            completeness: Some(1.0),
            soundness: Some(1.0),
            public: false,
            classical_prover: true,
            committed_prover: true,
            interaction_bound: Some(1),
            poly_time: true,
        },
        language: Some(Arc::new(in_odd)),
        qft_dim: None,
        notes: vec![COMPLETION_NOTE.to_string()],
    })
}

fn in_odd(x: &str) -> bool {
    match x.find('1') {
        Some(i) => x[i + 1..].chars().filter(|&c| c == '0').count() % 2 == 1,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{inputs_up_to, validate_public, validate_wellformed};

    #[test]
    fn wellformed_but_not_public() {
        let p = odd_protocol().unwrap();
        assert!(validate_wellformed(&p.verifier, 6, 1e-9).is_wellformed());
        assert!(!validate_public(&p.verifier).unwrap().is_public());
    }

    #[test]
    fn honest_matches_language() {
        let p = odd_protocol().unwrap();
        for x in inputs_up_to(&['0', '1'], 6) {
            let r = p.run_honest(&x).unwrap();
            let want = if in_odd(&x) { 1.0 } else { 0.0 };
            assert!((r.p_acc - want).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn language_examples() {
        assert!(in_odd("10"));
        assert!(in_odd("0011000"));
        assert!(!in_odd("100"));
        assert!(!in_odd("000"));
        assert!(!in_odd(""));
    }
}
