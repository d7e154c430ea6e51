use proptest::prelude::*;

use qip_core::linalg::{amp, check_unitary, make_qft, vec_apply, SparseVector};
use qip_core::report::{clean_probability, sig12};
use qip_core::specfile::SpecFile;
use qip_core::zoo::{odd_protocol, zero_public_protocol};

fn binary() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop_oneof![Just('0'), Just('1')], 0..9).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #[test]
    fn qft_is_unitary(n in 1usize..16) {
        prop_assert!(check_unitary(&make_qft(n).unwrap(), 1e-12));
    }

    #[test]
    fn qft_preserves_norm(
        n in 2usize..8,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        offset in 0usize..4,
    ) {
        let u = make_qft(n).unwrap();
        let mut v = SparseVector::zeros(16, 0.0);
        for (i, &(re, im)) in coeffs.iter().enumerate() {
            v.set(i + offset, amp(re, im)).unwrap();
        }
        let labels: Vec<usize> = (0..n).map(|j| 2 * j + offset % 2).collect();
        let w = vec_apply(&u, &labels, &v).unwrap();
        prop_assert!((w.norm_sq() - v.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn probabilities_are_clamped(p in -0.5f64..1.5, tau in 0.0f64..1e-6) {
        let c = clean_probability(p, tau);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(sig12(sig12(c)), sig12(c));
    }

    #[test]
    fn zero_decides_last_symbol(x in binary()) {
        let b = zero_public_protocol().unwrap();
        let r = b.run_honest(&x).unwrap();
        let want = if x.ends_with('0') { 1.0 } else { 0.0 };
        prop_assert!((r.p_acc - want).abs() < 1e-9);
        prop_assert!((r.p_acc + r.p_rej - 1.0).abs() < 1e-9);
        prop_assert_eq!(r.steps_taken, x.len() + 2);
    }

    #[test]
    fn odd_conserves_mass(x in binary()) {
        let b = odd_protocol().unwrap();
        let r = b.run_honest(&x).unwrap();
        prop_assert!(r.conservation_defect < 1e-9);
        prop_assert!(r.p_acc <= 1.0 + 1e-12);
    }
}

#[test]
fn spec_file_round_trip() {
    for b in [zero_public_protocol().unwrap(), odd_protocol().unwrap()] {
        let f = SpecFile::from_bundle(&b);
        let back = SpecFile::parse(&f.to_toml()).unwrap();
        assert_eq!(back, f);
        let rebuilt = back.to_bundle().unwrap();
        for x in ["", "0", "01", "110"] {
            let a = b.run_honest(x).unwrap().p_acc;
            let c = rebuilt.run_honest(x).unwrap().p_acc;
            assert!((a - c).abs() < 1e-12, "{} on {x}", b.name);
        }
    }
}
