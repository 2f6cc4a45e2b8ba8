use pss_core::catalog::{entry, Overrides};
use pss_core::config::Tolerances;
use pss_core::expr::{parse, zero_test, Expr, FnTable, Point, SampleBox, Sym, ZeroConfig};
use pss_core::frames::{verify, Delta, SystemSpec};
use pss_core::goursat::{solve, GoursatData};
use proptest::prelude::*;
use rand::SeedableRng;

const VARS: [Sym; 4] = [Sym::U, Sym::Ux, Sym::V, Sym::Vx];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0usize..4).prop_map(|k| Expr::sym(VARS[k].clone())),
        (-3i32..=3).prop_map(|c| Expr::constant(c as f64 * 0.5)),
    ]
}

/// Smooth expressions over the jet variables; exp and division are avoided
/// so values stay moderate on the sampling box.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            (inner.clone(), 2i64..=3).prop_map(|(a, n)| a.powi(n)),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    [-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5].prop_map(|[a, b, c, d]| Point::new(a, b, c, d))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn identically_zero(e: &Expr) -> bool {
    zero_test(&e.simplify(), &SampleBox::default(), &ZeroConfig::default(), &FnTable::new())
        .unwrap()
        .zero
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_then_parsing_preserves_values(e in expr(), p in point()) {
        let back = parse(&e.to_string()).unwrap();
        let fns = FnTable::new();
        prop_assert!(close(e.eval(&p, &fns).unwrap(), back.eval(&p, &fns).unwrap(), 1e-12));
    }

    #[test]
    fn simplification_preserves_values(e in expr(), p in point()) {
        let fns = FnTable::new();
        prop_assert!(close(e.eval(&p, &fns).unwrap(), e.simplify().eval(&p, &fns).unwrap(), 1e-10));
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), p in point(), k in 0usize..4) {
        let fns = FnTable::new();
        let d = e.diff(&VARS[k]).unwrap().eval(&p, &fns).unwrap();
        let h = 1e-5;
        let shifted = |s: f64| {
            let mut q = p.clone();
            q.vars[k] += s;
            e.eval(&q, &fns).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let scale = 1.0 + e.eval(&p, &fns).unwrap().abs();
        prop_assert!((d - fd).abs() <= 1e-5 * scale.max(d.abs()), "{} vs {}", d, fd);
    }

    #[test]
    fn derivative_is_linear(a in expr(), b in expr(), c in -2.0f64..2.0, k in 0usize..4) {
        let s = &VARS[k];
        let lhs = (c * a.clone() + b.clone()).diff(s).unwrap();
        let rhs = c * a.diff(s).unwrap() + b.diff(s).unwrap();
        prop_assert!(identically_zero(&(lhs - rhs)));
    }

    #[test]
    fn derivative_obeys_the_product_rule(a in expr(), b in expr(), k in 0usize..4) {
        let s = &VARS[k];
        let lhs = (a.clone() * b.clone()).diff(s).unwrap();
        let rhs = a.diff(s).unwrap() * b.clone() + a.clone() * b.diff(s).unwrap();
        prop_assert!(identically_zero(&(lhs - rhs)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sign_flip_of_a_nonzero_entry_breaks_verification(
        key in prop::sample::select(vec!["plr", "konno-oono", "ex3.3", "ex3.4", "ex3.6", "ex3.9", "cor5.1", "cor5.5"]),
        seed in any::<u64>(),
        slot in 0usize..6,
    ) {
        let e = entry(key).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (sys, fr) = e.instantiate(&e.draw(&mut rng)).unwrap();
        let (i, j) = (slot / 2, slot % 2);
        prop_assume!(!fr.f[i][j].simplify().is_const_zero());
        let tol = Tolerances::default();
        prop_assert!(verify(&sys, &fr, &tol).unwrap().passed);
        prop_assert!(!verify(&sys, &fr.with_entry(i, j, -fr.f[i][j].clone()), &tol).unwrap().passed);
    }

    #[test]
    fn separable_data_solve_u_xt_zero_exactly(
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
    ) {
        let sys = SystemSpec::parse("zero", Delta::Pss, "0", "0").unwrap();
        let texts = [
            format!("({a:?})*x + sin(({b:?})*x)"),
            format!("({c:?})*x^2"),
            format!("({d:?})*t"),
            "cos(t) - 1".to_string(),
        ];
        let data = GoursatData::parse([&texts[0], &texts[1], &texts[2], &texts[3]]).unwrap();
        let g = solve(&sys, &data, 17, 17, &Tolerances::default()).unwrap();
        for j in 0..g.nt {
            for i in 0..g.nx {
                let (x, t) = (g.x(i), g.t(j));
                let [u, ux, v, vx] = g.state(i, j);
                prop_assert!((u - (a * x + (b * x).sin() + d * t)).abs() < 1e-13);
                prop_assert!((ux - (a + b * (b * x).cos())).abs() < 1e-13);
                prop_assert!((v - (c * x * x + t.cos() - 1.0)).abs() < 1e-13);
                prop_assert!((vx - 2.0 * c * x).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn linear_goursat_problem_converges_at_second_order(k in 0.2f64..1.0) {
        // u_xt = k^2 u with data exp(k x), exp(k t) has the solution exp(k (x + t))
        let sys = SystemSpec::parse("lin", Delta::Pss, &format!("({:?})*u", k * k), "0").unwrap();
        let texts = [format!("exp(({k:?})*x)"), format!("exp(({k:?})*t)")];
        let data = GoursatData::parse([&texts[0], "0", &texts[1], "0"]).unwrap();
        let tol = Tolerances::default();
        let err = |n: usize| {
            let g = solve(&sys, &data, n, n, &tol).unwrap();
            (0..g.u.len()).map(|m| {
                let (x, t) = (g.x(m % g.nx), g.t(m / g.nx));
                (g.u[m] - (k * (x + t)).exp()).abs()
            }).fold(0.0, f64::max)
        };
        let order = (err(17) / err(33)).log2();
        prop_assert!(order > 1.8 && order < 2.5, "{}", order);
    }
}

#[test]
fn overrides_of_unknown_parameters_are_rejected() {
    assert!(entry("plr").unwrap().instantiate(&Overrides::default().param("nope", 1.0)).is_err());
}
