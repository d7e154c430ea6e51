//! Public two-way verifier for `{0^m 1^m : m ≥ 0}`.
//!
//! A first sweep checks the format `0*1*`: every `0` is followed by a step
//! back onto its left neighbour, so a `1` directly left of a `0` is caught
//! without leaving the reversible regime. The head then returns to `¢` and
//! splits into `N` branches. Branch `j` spends `N−j+1` steps on every `0` and
//! `j+1` steps on every `1`, so it reaches `$` after `m(N+1) + n + j(n−m)`
//! steps. A Fourier transform at `$` accepts with certainty when all branches
//! arrive together and with probability `1/N` otherwise.
//!
//! Every non-halting state reads back its own announcement; any other cell
//! content leads to rejection.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::automata::{HeadKind, StateClass, TableBuilder, TapeSymbol};
use crate::linalg::{fourier_entry, inv_sqrt, Amplitude};
use crate::provers::{identity_prover, ScheduleFamily};

use super::{AdversaryFamily, Claims, ProtocolBundle, ZooError, COMPLETION_NOTE};

struct Table {
    b: TableBuilder,
}

impl Table {
    fn state(&mut self, name: String, dir: i8) -> usize {
        let q = self.b.state(name, StateClass::NonHalting, dir);
        self.b.announce(q);
        q
    }

    fn cell(&mut self, q: usize) -> (usize, usize) {
        let g = self.b.announce(q);
        (q, g)
    }

    fn map(&mut self, sym: TapeSymbol, from: usize, to: usize) {
        let from = self.cell(from);
        let to = self.cell(to);
        self.b.map(sym, from, to);
    }

    fn split(&mut self, sym: TapeSymbol, from: usize, to: &[(usize, Amplitude)]) {
        let from = self.cell(from);
        let images: Vec<_> = to.iter().map(|&(q, a)| (self.cell(q), a)).collect();
        self.b.set(sym, from, &images);
    }
}

pub fn upal_protocol(n: usize) -> Result<ProtocolBundle, ZooError> {
    use TapeSymbol::*;
    if n < 2 {
        return Err(ZooError::Parameter(format!("N must be at least 2, got {n}")));
    }
    let mut t = Table {
        b: TableBuilder::new(format!("upal-N{n}"), HeadKind::TwoWay, &['0', '1']),
    };
    let blank = t.b.blank();
    let q0 = t.b.state("q0", StateClass::NonHalting, 1);
    t.b.set_initial(q0);
    let scan = t.state("scan".into(), 1);
    let peek = t.state("peek".into(), -1);
    let back = t.state("back".into(), 1);
    let ret = t.state("ret".into(), -1);
    let r: Vec<usize> = (1..=n).map(|j| t.state(format!("r{j}"), 1)).collect();
    let mut u = BTreeMap::new();
    let mut v = BTreeMap::new();
    for j in 1..=n {
        for k in 1..=n - j {
            u.insert((j, k), t.state(format!("u{j},{k}"), 0));
        }
        for k in 1..=j {
            v.insert((j, k), t.state(format!("v{j},{k}"), 0));
        }
    }
    let fin: Vec<usize> = (1..=n)
        .map(|l| {
            let class = if l == n { StateClass::Accepting } else { StateClass::Rejecting };
            t.b.state(format!("t{l}"), class, 0)
        })
        .collect();

    // Format sweep.
    let to = t.cell(scan);
    t.b.map(LeftEnd, (q0, blank), to);
    t.map(LeftEnd, peek, back);
    t.map(Letter('0'), scan, peek);
    t.map(Letter('0'), peek, back);
    t.map(Letter('0'), back, scan);
    t.map(Letter('1'), scan, scan);
    t.map(RightEnd, scan, ret);
    // Return and split.
    t.map(Letter('0'), ret, ret);
    t.map(Letter('1'), ret, ret);
    let amp = inv_sqrt(n);
    let branches: Vec<_> = r.iter().map(|&rj| (rj, amp)).collect();
    t.split(LeftEnd, ret, &branches);
    // Timing walk.
    for j in 1..=n {
        let rj = r[j - 1];
        if j == n {
            t.map(Letter('0'), rj, rj);
        } else {
            t.map(Letter('0'), rj, u[&(j, n - j)]);
            for k in 2..=n - j {
                t.map(Letter('0'), u[&(j, k)], u[&(j, k - 1)]);
            }
            t.map(Letter('0'), u[&(j, 1)], rj);
        }
        t.map(Letter('1'), rj, v[&(j, j)]);
        for k in 2..=j {
            t.map(Letter('1'), v[&(j, k)], v[&(j, k - 1)]);
        }
        t.map(Letter('1'), v[&(j, 1)], rj);
    }
    // Interference at $.
    for j in 1..=n {
        let from = t.cell(r[j - 1]);
        let images: Vec<_> = (1..=n)
            .map(|l| ((fin[l - 1], blank), fourier_entry(n, j, l)))
            .collect();
        t.b.set(RightEnd, from, &images);
    }
    let verifier = t.b.complete()?;

    Ok(ProtocolBundle {
        name: "upal".into(),
        params: BTreeMap::from([("N".to_string(), n)]),
        verifier,
        honest: identity_prover(),
        adversaries: AdversaryFamily::Schedules(ScheduleFamily::KeepOrWrite),
        claims: Claims {
            completeness: Some(1.0),
            soundness: Some(1.0 - 1.0 / n as f64),
            public: true,
            classical_prover: true,
            committed_prover: true,
            interaction_bound: None,
            poly_time: true,
        },
        language: Some(Arc::new(in_upal)),
        qft_dim: Some(n),
        notes: vec![
            COMPLETION_NOTE.to_string(),
            "transition table derived from the prose description".to_string(),
        ],
    })
}

fn in_upal(x: &str) -> bool {
    let m = x.chars().take_while(|&c| c == '0').count();
    let rest = &x[m..];
    rest.chars().all(|c| c == '1') && rest.len() == m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{validate_public, validate_wellformed};

    #[test]
    fn wellformed_and_public() {
        for n in [2, 4] {
            let p = upal_protocol(n).unwrap();
            let report = validate_wellformed(&p.verifier, 5, 1e-9);
            assert!(report.is_wellformed(), "N={n}: {:?}", report.failures.first());
            let public = validate_public(&p.verifier).unwrap();
            assert!(public.is_public(), "{:?}", public.violations.first());
        }
    }

    #[test]
    fn honest_values() {
        let p = upal_protocol(4).unwrap();
        for (x, want) in [("", 1.0), ("01", 1.0), ("0011", 1.0), ("0", 0.25), ("011", 0.25), ("10", 0.0)] {
            let r = p.run_honest(x).unwrap();
            assert!((r.p_acc - want).abs() < 1e-9, "{x}: {}", r.p_acc);
        }
    }

    #[test]
    fn language() {
        assert!(in_upal(""));
        assert!(in_upal("000111"));
        assert!(!in_upal("0101"));
        assert!(!in_upal("001"));
    }
}
