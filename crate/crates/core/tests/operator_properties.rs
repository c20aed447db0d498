use fracgelfand::operator1d::{radial_evaluate, torsion_constant};
use fracgelfand::stability::smallest_eigenpair;
use fracgelfand::{FracOperator, GridFunction, RadialFunction};
use proptest::collection::vec;
use proptest::prelude::*;

fn grid(values: Vec<f64>) -> GridFunction {
    GridFunction::new(values).unwrap()
}

/// An operator together with two random grid functions on its grid.
fn operator_and_pair() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>)> {
    (0.05f64..0.95, 8usize..80).prop_flat_map(|(s, n)| (Just(s), vec(-1.0f64..1.0, n), vec(-1.0f64..1.0, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn form_is_symmetric((s, u, v) in operator_and_pair()) {
        let op = FracOperator::assemble(s, u.len()).unwrap();
        let (u, v) = (grid(u), grid(v));
        let uv = op.hs_form(&u, &v).unwrap();
        let vu = op.hs_form(&v, &u).unwrap();
        let scale = op.hs_form(&u, &u).unwrap().max(op.hs_form(&v, &v).unwrap());
        prop_assert!((uv - vu).abs() <= 1e-10 * scale);
        prop_assert!(op.hs_form(&u, &u).unwrap() > 0.0);
    }

    #[test]
    fn solve_inverts_apply((s, g, _v) in operator_and_pair()) {
        let op = FracOperator::assemble(s, g.len()).unwrap();
        let g = grid(g);
        let u = op.solve_linear(&g).unwrap();
        let back = op.apply(&u).unwrap();
        let err = back.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * g.sup_abs());
        // Weak form: ‖u‖² equals the pairing with the data.
        let hs = op.hs_form(&u, &u).unwrap();
        prop_assert!((hs - u.inner(&g).unwrap()).abs() <= 1e-10 * hs.abs().max(1e-300));
    }

    #[test]
    fn maximum_principle((s, g, _v) in operator_and_pair()) {
        let op = FracOperator::assemble(s, g.len()).unwrap();
        let g = grid(g.iter().map(|x| x.abs()).collect());
        let u = op.solve_linear(&g).unwrap();
        prop_assert!(u.values().iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn even_data_gives_even_solution(s in 0.05f64..0.95, n in 8usize..200, c in vec(-1.0f64..1.0, 4)) {
        let op = FracOperator::assemble(s, n).unwrap();
        let g = GridFunction::from_fn(n, |x| c[0] + c[1] * x * x + c[2] * (3.0 * x).cos() + c[3] * x.abs()).unwrap();
        let u = op.solve_linear(&g).unwrap();
        let v = u.values();
        for i in 0..n {
            prop_assert!((v[i] - v[n - 1 - i]).abs() <= 1e-10);
        }
    }
}

#[test]
fn zero_data_gives_zero() {
    let op = FracOperator::assemble(0.4, 33).unwrap();
    let z = GridFunction::zeros(33).unwrap();
    assert!(op.solve_linear(&z).unwrap().values().iter().all(|&x| x == 0.0));
    assert!(op.apply(&z).unwrap().values().iter().all(|&x| x == 0.0));
}

#[test]
fn positive_definite() {
    for s in [0.05, 0.25, 0.5, 0.75, 0.95] {
        for n in [8, 64, 256] {
            let eig = smallest_eigenpair(&FracOperator::assemble(s, n).unwrap(), None).unwrap();
            assert!(eig.mu1 > 0.0, "s={s} N={n}");
            assert!(
                eig.phi1.values().iter().all(|&x| x > 0.0),
                "ground state sign s={s} N={n}"
            );
            assert!(eig.residual <= 1e-8);
        }
    }
}

#[test]
fn torsion_solve_converges_under_refinement() {
    for s in [0.25, 0.5, 0.75] {
        let kappa = torsion_constant(1, s).unwrap();
        let errors: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| {
                let op = FracOperator::assemble(s, n).unwrap();
                let u = op.solve_linear(&GridFunction::from_fn(n, |_| kappa).unwrap()).unwrap();
                u.values()
                    .iter()
                    .zip(u.nodes())
                    .map(|(v, x)| (v - (1.0 - x * x).powf(s)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "s={s}: {errors:?}");
        }
        if s >= 0.5 {
            assert!(errors[3] <= 0.02, "s={s}: {errors:?}");
        } else {
            // The boundary cusp limits the sup-norm error to O(h^s); check the rate.
            let rate = (errors[0] / errors[3]).log2() / 3.0;
            assert!((rate - s).abs() <= 0.05, "s={s}: rate {rate}, {errors:?}");
        }
    }
}

#[test]
fn torsion_oracle_is_constant_inside_the_ball() {
    for (n, s) in [(1, 0.25), (1, 0.5), (1, 0.75), (2, 0.5), (3, 0.3)] {
        let u = RadialFunction::bump(s);
        let values: Vec<f64> = [0.0, 0.3, 0.6]
            .iter()
            .map(|&r| radial_evaluate(n, s, &u, r, 1e-8).unwrap().value)
            .collect();
        for v in &values {
            assert!((v - values[0]).abs() <= 1e-6, "n={n} s={s}: {values:?}");
        }
        let kappa = torsion_constant(n, s).unwrap();
        assert!(
            (values[0] / kappa - 1.0).abs() <= 1e-6,
            "n={n} s={s}: {} vs {kappa}",
            values[0]
        );
    }
}

#[test]
fn radial_tolerances_agree() {
    let cases = [
        (1, 0.5, RadialFunction::bump(0.5), 0.2),
        (9, 0.3, RadialFunction::log_singular(0.3), 1.0),
        (10, 0.5, RadialFunction::log_singular(0.5), 0.7),
    ];
    for (n, s, u, r) in cases {
        let coarse = radial_evaluate(n, s, &u, r, 1e-6).unwrap();
        let fine = radial_evaluate(n, s, &u, r, 1e-8).unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= 1e-6,
            "{}: {} vs {}",
            u.label(),
            coarse.value,
            fine.value
        );
    }
}

#[test]
fn constant_is_annihilated() {
    for (n, s) in [(1, 0.3), (4, 0.7), (9, 0.5)] {
        let v = radial_evaluate(n, s, &RadialFunction::constant(2.5), 0.4, 1e-10).unwrap();
        assert_eq!(v.value, 0.0);
    }
}
