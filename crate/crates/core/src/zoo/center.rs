//! Two-way verifier with a classical prover for `{x1y : |x| = |y|}`.
//!
//! Phase 1 checks that `|x|` is odd and returns to `¢`. Phase 2 walks right
//! until the prover writes `1`, which must arrive over an input `1`. There the
//! run splits into `N` branches `r_j`. Branch `j` crosses each remaining cell
//! in `2(N−j)+1` steps, turns around at `$` in `N−j+2` steps, and crosses every
//! cell leftwards in `j+1` steps, so the arrival time at `¢` is independent of
//! `j` exactly when the split happened at the center. A Fourier transform at
//! `¢` then sends simultaneous arrivals to the single accepting state `t_N`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{HeadKind, StateClass, TableBuilder, TapeSymbol};
use crate::linalg::{fourier_entry, inv_sqrt};
use crate::provers::{HistoryResponder, Prover};

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};

const SIGNAL: &str = "1";

/// Verifier step after which the prover signals, for a split at position `e`
/// (1-based) of an input of length `n`.
fn signal_round(n: usize, e: usize) -> usize {
    2 * n + 2 + e
}

/// Writes `1` just before the head reaches position `e`, restores `1` right
/// after the split, and is the identity otherwise. `e = None` never signals.
pub fn center_timing_prover(e: Option<usize>) -> HistoryResponder {
    let id = match e {
        Some(e) => format!("timing-{e}"),
        None => "never-signal".to_string(),
    };
    HistoryResponder::new(id, move |ctx, observed, _| {
        let Some(e) = e else { return Ok(observed) };
        let t = signal_round(ctx.input.chars().count(), e);
        if observed == 0 && (ctx.round == t || ctx.round == t + 1) {
            Ok(1)
        } else {
            Ok(observed)
        }
    })
}

fn honest() -> HistoryResponder {
    HistoryResponder::new("honest", |ctx, observed, _| {
        let n = ctx.input.chars().count();
        if n % 2 == 0 {
            return Ok(observed);
        }
        let t = signal_round(n, n.div_ceil(2));
        if observed == 0 && (ctx.round == t || ctx.round == t + 1) {
            Ok(1)
        } else {
            Ok(observed)
        }
    })
}

/// One timing adversary per `1` of `x`, plus the prover that never signals.
pub fn center_adversary_family(x: &str) -> Vec<Prover> {
    let mut out: Vec<Prover> = x
        .chars()
        .enumerate()
        .filter(|&(_, c)| c == '1')
        .map(|(i, _)| Arc::new(center_timing_prover(Some(i + 1))) as Prover)
        .collect();
    out.push(Arc::new(center_timing_prover(None)));
    out
}

pub fn center_protocol(n: usize) -> Result<ProtocolBundle, ZooError> {
    use StateClass::*;
    use TapeSymbol::*;
    if n < 2 {
        return Err(ZooError::Parameter(format!("N must be at least 2, got {n}")));
    }
    let mut b = TableBuilder::new(format!("center-N{n}"), HeadKind::TwoWay, &['0', '1']);
    let one = b.comm(SIGNAL);
    let blank = b.blank();
    let q0 = b.state("q0", NonHalting, 1);
    let q1 = b.state("q1", NonHalting, 1);
    let q2 = b.state("q2", NonHalting, -1);
    let q3 = b.state("q3", NonHalting, 1);
    b.set_initial(q0);

    let r0: Vec<usize> = (1..=n).map(|j| b.state(format!("r{j},0"), NonHalting, 1)).collect();
    let mut r = BTreeMap::new();
    let mut rp = BTreeMap::new();
    for j in 1..n {
        for k in 1..=n - j {
            r.insert((j, k), b.state(format!("r{j},{k}"), NonHalting, 0));
            rp.insert((j, k), b.state(format!("r'{j},{k}"), NonHalting, 0));
        }
    }
    let s0: Vec<usize> = (1..=n).map(|j| b.state(format!("s{j},0"), NonHalting, -1)).collect();
    let mut s = BTreeMap::new();
    let mut sp = BTreeMap::new();
    for j in 1..=n {
        for k in 1..=j {
            s.insert((j, k), b.state(format!("s{j},{k}"), NonHalting, 0));
        }
        for k in 0..=n - j {
            sp.insert((j, k), b.state(format!("s'{j},{k}"), NonHalting, 0));
        }
    }
    let t: Vec<usize> = (1..=n)
        .map(|l| b.state(format!("t{l}"), if l == n { Accepting } else { Rejecting }, 0))
        .collect();

    // Phase 1: parity of |x|, then back to ¢.
    b.map(LeftEnd, (q0, blank), (q0, blank));
    b.map(RightEnd, (q1, blank), (q2, blank));
    b.map(LeftEnd, (q2, blank), (q3, blank));
    for c in ['0', '1'] {
        let sym = Letter(c);
        b.map(sym, (q0, blank), (q1, blank));
        b.map(sym, (q1, blank), (q0, blank));
        b.map(sym, (q2, blank), (q2, blank));
        b.map(sym, (q3, blank), (q3, blank));
    }
    // Phase 2 ends with the first split.
    let amp = inv_sqrt(n);
    let split: Vec<((usize, usize), _)> = r0.iter().map(|&rj| ((rj, blank), amp)).collect();
    b.set(Letter('1'), (q3, one), &split);

    for c in ['0', '1'] {
        let sym = Letter(c);
        // Phase 3: 2(N−j)+1 steps per cell.
        for j in 1..=n {
            if j == n {
                b.map(sym, (r0[j - 1], one), (r0[j - 1], one));
                continue;
            }
            b.map(sym, (r0[j - 1], one), (r[&(j, n - j)], one));
            for k in 1..=n - j {
                b.map(sym, (r[&(j, k)], one), (rp[&(j, k)], one));
                let next = if k == 1 { r0[j - 1] } else { r[&(j, k - 1)] };
                b.map(sym, (rp[&(j, k)], one), (next, one));
            }
        }
        // Phase 4: j+1 steps per cell.
        for j in 1..=n {
            b.map(sym, (s0[j - 1], one), (s[&(j, j)], one));
            for k in 1..=j {
                let next = if k == 1 { s0[j - 1] } else { s[&(j, k - 1)] };
                b.map(sym, (s[&(j, k)], one), (next, one));
            }
        }
    }
    // Turnaround at $: N−j+2 steps.
    for j in 1..=n {
        b.map(RightEnd, (r0[j - 1], one), (sp[&(j, n - j)], one));
        for k in 1..=n - j {
            b.map(RightEnd, (sp[&(j, k)], one), (sp[&(j, k - 1)], one));
        }
        b.map(RightEnd, (sp[&(j, 0)], one), (s0[j - 1], one));
    }
    // Second split.
    for j in 1..=n {
        let qft: Vec<((usize, usize), _)> = (1..=n)
            .map(|l| ((t[l - 1], blank), fourier_entry(n, j, l)))
            .collect();
        b.set(LeftEnd, (s0[j - 1], one), &qft);
    }
    let verifier = b.complete()?;

    Ok(ProtocolBundle {
        name: "center".into(),
        params: BTreeMap::from([("N".to_string(), n)]),
        verifier,
        honest: Arc::new(honest()),
        adversaries: AdversaryFamily::Strategies(Arc::new(center_adversary_family)),
        claims: Claims {
            completeness: Some(1.0),
            soundness: Some(1.0 - 1.0 / n as f64),
            public: false,
            classical_prover: true,
            committed_prover: false,
            interaction_bound: None,
            poly_time: true,
        },
        language: Some(Arc::new(|x: &str| {
            let n = x.len();
            n % 2 == 1 && x.as_bytes()[n / 2] == b'1'
        })),
        qft_dim: Some(n),
        notes: vec![
            COMPLETION_NOTE.to_string(),
            "the r-chain visits r_{j,N-j} before r'_{j,N-j}, giving 2(N-j)+1 steps per cell".to_string(),
            "the turnaround at $ runs r_{j,0} -> s'_{j,N-j} -> ... -> s'_{j,0} -> s_{j,0}".to_string(),
            "a prover replacing 1 by # in phases 3 and 4 leads to a completion reject".to_string(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::validate_wellformed;

    #[test]
    fn wellformed_for_small_n() {
        for n in 2..=4 {
            let p = center_protocol(n).unwrap();
            let report = validate_wellformed(&p.verifier, 4, 1e-9);
            assert!(report.is_wellformed(), "N={n}: {:?}", report.failures.first());
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(matches!(center_protocol(1), Err(ZooError::Parameter(_))));
    }

    #[test]
    fn family_sizes() {
        assert_eq!(center_adversary_family("101").len(), 3);
        assert_eq!(center_adversary_family("000").len(), 1);
    }
}
