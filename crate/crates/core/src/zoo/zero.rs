//! One-way public verifier for strings ending in `0`.
//!
//! The verifier announces `q0` on every step. A prover that believes the next
//! symbol is the last one erases the announcement; the verifier then moves to
//! `q1` if that symbol is `0` and rejects otherwise, and `q1` accepts only on
//! reading `$`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{HeadKind, StateClass, TableBuilder, TapeSymbol};
use crate::provers::HistoryResponder;

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};
use crate::provers::ScheduleFamily;

/// Erases the announcement in round `|x|` and echoes it otherwise.
fn honest() -> HistoryResponder {
    HistoryResponder::new("honest", |ctx, observed, _| {
        if ctx.round == ctx.input.chars().count() {
            Ok(0)
        } else {
            Ok(observed)
        }
    })
}

pub fn zero_public_protocol() -> Result<ProtocolBundle, ZooError> {
    use StateClass::*;
    use TapeSymbol::*;
    let mut b = TableBuilder::new("zero", HeadKind::OneWay, &['0', '1']);
    let blank = b.blank();
    let q0 = b.state("q0", NonHalting, 1);
    let q1 = b.state("q1", NonHalting, 1);
    b.set_initial(q0);
    let a0 = b.announce(q0);
    let a1 = b.announce(q1);
    // Comm symbols indexed by i = -1, 0, 1.
    let gammas = [(-1, blank), (0, a0), (1, a1)];
    let mut acc = BTreeMap::new();
    let mut rej = BTreeMap::new();
    let mut rej2 = BTreeMap::new();
    for (i, _) in gammas {
        acc.insert(i, b.state(format!("q_acc,{i}"), Accepting, 0));
        rej.insert(i, b.state(format!("q_rej,{i}"), Rejecting, 0));
        rej2.insert(i, b.state(format!("q'_rej,{i}"), Rejecting, 0));
    }

    b.map(LeftEnd, (q0, blank), (q0, a0));
    for j in [0, 1] {
        b.map(LeftEnd, (q0, gammas[(j + 1) as usize].1), (rej[&j], blank));
    }
    for sym in [Letter('0'), Letter('1')] {
        b.map(sym, (q0, a0), (q0, a0));
        b.map(sym, (q0, a1), (rej[&1], blank));
    }
    b.map(Letter('0'), (q0, blank), (q1, a1));
    b.map(Letter('1'), (q0, blank), (rej[&-1], blank));
    for sym in [LeftEnd, Letter('0'), Letter('1')] {
        for (i, g) in gammas {
            b.map(sym, (q1, g), (rej2[&i], blank));
        }
    }
    for (i, g) in gammas {
        b.map(RightEnd, (q0, g), (rej[&i], blank));
        b.map(RightEnd, (q1, g), (acc[&i], blank));
    }
    let verifier = b.complete()?;

    Ok(ProtocolBundle {
        name: "zero".into(),
        params: BTreeMap::new(),
        verifier,
        honest: Arc::new(honest()),
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
        language: Some(Arc::new(|x: &str| x.ends_with('0'))),
        qft_dim: None,
        notes: vec![COMPLETION_NOTE.to_string(), "transitions into halting states write #".to_string()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{validate_public, validate_wellformed};

    #[test]
    fn wellformed_and_public() {
        let p = zero_public_protocol().unwrap();
        assert!(validate_wellformed(&p.verifier, 6, 1e-9).is_wellformed());
        assert!(validate_public(&p.verifier).unwrap().is_public());
    }

    #[test]
    fn honest_decides_exactly() {
        let p = zero_public_protocol().unwrap();
        for x in ["", "0", "1", "10", "01", "110", "0001"] {
            let r = p.run_honest(x).unwrap();
            let want = if x.ends_with('0') { 1.0 } else { 0.0 };
            assert!((r.p_acc - want).abs() < 1e-12, "{x}: {}", r.p_acc);
            assert!((r.p_acc + r.p_rej - 1.0).abs() < 1e-12);
        }
    }
}
