use qip_core::automata::rfa::parity_rfa;
use qip_core::engine::{run_mcomp, run_protocol, trace_protocol, EngineConfig, Phase};
use qip_core::provers::{identity_prover, HistoryResponder, ProverStrategy};
use qip_core::zoo::{
    builtin, center_adversary_family, center_protocol, center_timing_prover, odd_protocol, rfa_embed,
    upal_protocol, zero_public_protocol, ProtocolBundle,
};

const TOL: f64 = 1e-9;

fn p_acc(b: &ProtocolBundle, p: &dyn ProverStrategy, x: &str) -> f64 {
    b.run(p, x, &b.engine_config(x)).unwrap().p_acc
}

#[test]
fn center_accepts_centered_ones_at_every_length() {
    let b = center_protocol(3).unwrap();
    for k in 0..5 {
        let x = format!("{}1{}", "0".repeat(k), "0".repeat(k));
        assert!((b.run_honest(&x).unwrap().p_acc - 1.0).abs() < TOL, "{x}");
    }
}

#[test]
fn center_off_center_signal_is_caught() {
    let n = 4;
    let b = center_protocol(n).unwrap();
    let x = "11000";
    for e in [0usize, 1] {
        let p = center_timing_prover(Some(e));
        let acc = p_acc(&b, &p, x);
        assert!(acc <= 1.0 / n as f64 + TOL, "signal at {e}: {acc}");
    }
    assert!(p_acc(&b, &center_timing_prover(None), x) < TOL);
    assert_eq!(center_adversary_family(x).len(), 3);
}

#[test]
fn center_trace_conserves_mass() {
    let b = center_protocol(2).unwrap();
    let x = "010";
    let (r, steps) = trace_protocol(&b.verifier, b.honest.as_ref(), x, &b.engine_config(x)).unwrap();
    assert!(!steps.is_empty());
    for s in &steps {
        let total = s.p_acc + s.p_rej + s.live_mass + s.pruned;
        assert!((total - 1.0).abs() < 1e-9, "step {}: {total}", s.step);
    }
    assert!((r.p_acc - 1.0).abs() < TOL);
}

#[test]
fn zero_table() {
    let b = zero_public_protocol().unwrap();
    for (x, acc) in [("", 0.0), ("0", 1.0), ("1", 0.0), ("10", 1.0), ("0101", 0.0)] {
        assert!((b.run_honest(x).unwrap().p_acc - acc).abs() < TOL, "{x}");
    }
}

#[test]
fn rfa_editing_prover_is_rejected() {
    let b = rfa_embed(&parity_rfa()).unwrap();
    let r = b.run(&HistoryResponder::eraser(), "1", &b.engine_config("1")).unwrap();
    assert!((r.p_rej - 1.0).abs() < TOL, "p_rej = {}", r.p_rej);
}

#[test]
fn odd_needs_one_answer() {
    let b = odd_protocol().unwrap();
    let cfg = EngineConfig {
        count_interactions: true,
        ..b.engine_config("10")
    };
    let r = run_protocol(&b.verifier, b.honest.as_ref(), "10", &cfg).unwrap();
    assert!((r.p_acc - 1.0).abs() < TOL);
    assert_eq!(r.interactions, Some(1));
}

#[test]
fn upal_gap() {
    let b = upal_protocol(4).unwrap();
    assert!((b.run_honest("0011").unwrap().p_acc - 1.0).abs() < TOL);
    let worst = b.worst_case("011", &b.engine_config("011"), 100_000).unwrap();
    assert!(worst.p_acc_upper <= 0.25 + TOL);
}

#[test]
fn builtins_agree_with_constructors() {
    let a = builtin("center", Some(3)).unwrap();
    let b = center_protocol(3).unwrap();
    assert_eq!(a.verifier.states.len(), b.verifier.states.len());
    assert!(builtin("center", Some(1)).is_err());
    assert!(builtin("nope", None).is_err());
}

#[test]
fn mcomp_matches_projected_identity_run() {
    let b = odd_protocol().unwrap();
    for x in ["", "01", "0110", "10101"] {
        let cfg = EngineConfig {
            blank_projection: true,
            ..b.engine_config(x)
        };
        let m = run_mcomp(&b.verifier, x, &cfg).unwrap();
        let (_, steps) = trace_protocol(&b.verifier, identity_prover().as_ref(), x, &cfg).unwrap();
        let traced: Vec<f64> = steps
            .iter()
            .filter(|s| s.step > 0 && s.phase == Phase::Verifier)
            .map(|s| s.query_mass)
            .collect();
        let masses = m.query_masses();
        assert_eq!(masses.len(), traced.len(), "{x}");
        for (a, c) in masses.iter().zip(&traced) {
            assert!((a - c).abs() < 1e-12, "{x}: {masses:?} vs {traced:?}");
        }
    }
}
