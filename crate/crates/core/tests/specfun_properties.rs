use fracgelfand::specfun::{self, critical_dimension, critical_s, gamma, lemma_po_check, semistable_singular};
use fracgelfand::Nonlinearity;
use proptest::prelude::*;

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

#[test]
fn integer_and_half_integer_values() {
    for k in 1..=20u32 {
        let exact = factorial(k - 1);
        assert!((gamma(k as f64).unwrap() / exact - 1.0).abs() < 1e-13, "Gamma({k})");
        // Γ(k + ½) = (2k)! √π / (4^k k!)
        let half = factorial(2 * k) * std::f64::consts::PI.sqrt() / (4f64.powi(k as i32) * factorial(k));
        assert!(
            (gamma(k as f64 + 0.5).unwrap() / half - 1.0).abs() < 1e-13,
            "Gamma({k}.5)"
        );
    }
}

#[test]
fn thresholds_invert_each_other() {
    for n in [8, 9] {
        let s = critical_s(n).unwrap();
        assert!((critical_dimension(s).unwrap() - n as f64).abs() <= 1e-2, "n = {n}");
    }
}

#[test]
fn margin_vanishes_at_thresholds() {
    for n in [8, 9] {
        let s = critical_s(n).unwrap();
        let below = specfun::margin_real(n as f64, s - 1e-3).unwrap();
        let above = specfun::margin_real(n as f64, s + 1e-3).unwrap();
        assert!(below > 0.0 && above < 0.0, "n = {n}: {below} {above}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn gamma_recursion(t in 0.0f64..=1.0) {
        let x = 1e-2 * 8000f64.powf(t);
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-12, "x = {x}: {lhs} vs {rhs}");
    }

    #[test]
    fn verdict_is_monotone_in_dimension(s in 0.01f64..0.99) {
        let first = (2.0 * s).ceil() as u32 + 1;
        let mut seen_stable = false;
        for n in first..=20 {
            let stable = semistable_singular(n, s).unwrap().semistable;
            prop_assert!(stable || !seen_stable, "s = {s}: stable below n = {n} but not at it");
            seen_stable |= stable;
        }
        prop_assert!(seen_stable);
    }

    #[test]
    fn lemma_holds_for_powers(a in 0.0f64..5.0, b in 0.0f64..5.0, p in 1.5f64..4.0, g in 1.0f64..3.0) {
        let f = Nonlinearity::power(p).unwrap();
        let check = lemma_po_check(&f, g, a, b, 64).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }

    #[test]
    fn lemma_holds_for_exponential(a in 0.0f64..6.0, b in 0.0f64..6.0, g in 1.0f64..2.5) {
        let check = lemma_po_check(&Nonlinearity::exponential(), g, a, b, 64).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }
}
