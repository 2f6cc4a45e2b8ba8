use pss_core::catalog::{entries, entry, CatalogEntry, DeltaRule, EntryKind, Overrides};
use pss_core::config::Tolerances;
use pss_core::expr::Expr;
use pss_core::frames::{verify, Delta, Frame, SystemSpec};
use pss_core::goursat::{solve, GoursatData};
use pss_core::linear::{
    build, holonomy_loop, in_algebra, lattice_path, transport, unit_state, zero_curvature, CompiledPair, Form,
};

fn flat(lp_ok: Result<bool, pss_core::linear::LinearError>) -> bool {
    // a dependency violation means the pair cannot be flat either
    lp_ok.unwrap_or(false)
}

fn zc_both(sys: &SystemSpec, fr: &Frame, tol: &Tolerances) -> [bool; 2] {
    let ctx = sys.context(tol).unwrap();
    [Form::TwoByTwo, Form::ThreeByThree].map(|form| flat(zero_curvature(&build(fr, sys.delta, form), sys, &ctx)))
}

fn instances(e: &CatalogEntry) -> Vec<(SystemSpec, Frame)> {
    let mut deltas = vec![e.default_delta()];
    if matches!(e.delta, DeltaRule::Either(_)) {
        deltas.push(e.default_delta().flip());
    }
    deltas
        .into_iter()
        .map(|d| e.instantiate(&Overrides::default().delta(d)).unwrap())
        .collect()
}

/// Negate the entry, or set it to 1 where it vanishes identically.
fn mutate(fr: &Frame, i: usize, j: usize) -> Frame {
    let e = &fr.f[i][j];
    if e.simplify().is_const_zero() {
        fr.with_entry(i, j, Expr::one())
    } else {
        fr.with_entry(i, j, -e.clone())
    }
}

#[test]
fn zero_curvature_agrees_with_verification_and_mutations_break_both() {
    let tol = Tolerances::default();
    for e in entries().iter().filter(|e| e.is_hyperbolic()) {
        for (sys, fr) in instances(e) {
            let verified = verify(&sys, &fr, &tol).unwrap().passed;
            let zc = zc_both(&sys, &fr, &tol);
            assert_eq!(zc, [verified; 2], "{} {}", e.key, sys.delta);
            if e.kind == EntryKind::SolverFixture {
                assert!(!verified);
                continue;
            }
            assert!(verified, "{}", e.key);
            for i in 0..3 {
                for j in 0..2 {
                    let m = mutate(&fr, i, j);
                    assert!(!verify(&sys, &m, &tol).unwrap().passed, "{} f{}{}", e.key, i + 1, j + 1);
                    assert_eq!(zc_both(&sys, &m, &tol), [false; 2], "{} f{}{}", e.key, i + 1, j + 1);
                }
            }
        }
    }
}

#[test]
fn pairs_lie_in_their_algebras() {
    let tol = Tolerances::default();
    for e in entries().iter().filter(|e| e.is_hyperbolic()) {
        for (sys, fr) in instances(e) {
            let ctx = sys.context(&tol).unwrap();
            for form in [Form::TwoByTwo, Form::ThreeByThree] {
                assert!(in_algebra(&build(&fr, sys.delta, form), &ctx).unwrap(), "{} {form:?}", e.key);
            }
        }
    }
}

fn grid_and_pair(key: &str, n: usize, form: Form) -> (CompiledPair, pss_core::goursat::SolutionGrid) {
    let e = entry(key).unwrap();
    let (sys, fr) = e.instantiate(&Overrides::default()).unwrap();
    let tol = Tolerances::default();
    let sol = solve(&sys, &GoursatData::parse(e.data).unwrap(), n, n, &tol).unwrap();
    let ctx = sys.context(&tol).unwrap();
    (CompiledPair::new(&build(&fr, sys.delta, form), &ctx).unwrap(), sol)
}

#[test]
fn sl2_wronskian_is_conserved_on_the_fine_grid() {
    let (cp, sol) = grid_and_pair("plr", 257, Form::TwoByTwo);
    let (s, m) = holonomy_loop(&sol, (0.0, 0.0), (1.0, 1.0)).unwrap();
    let tr = transport(&cp, &sol, s, &m, &unit_state(2)).unwrap();
    assert!(tr.summary.drift_per_length <= 1e-8, "{:?}", tr.summary);
}

#[test]
fn su2_norm_is_conserved_and_holonomy_converges() {
    let entry_delta = entry("ex3.4").unwrap().default_delta();
    assert_eq!(entry_delta, Delta::Ss);
    let run = |n| {
        let (cp, sol) = grid_and_pair("ex3.4", n, Form::TwoByTwo);
        let (s, m) = holonomy_loop(&sol, (0.0, 0.0), (1.0, 1.0)).unwrap();
        transport(&cp, &sol, s, &m, &unit_state(2)).unwrap().summary
    };
    let (a, b) = (run(65), run(129));
    assert!(b.drift_per_length <= 1e-8, "{b:?}");
    let order = (a.holonomy_deviation.unwrap() / b.holonomy_deviation.unwrap()).log2();
    assert!(order > 1.8 && order < 2.5, "{order}");
}

#[test]
fn three_by_three_transport_keeps_the_quadratic_form() {
    for key in ["plr", "ex3.4"] {
        let (cp, sol) = grid_and_pair(key, 65, Form::ThreeByThree);
        let tr = transport(&cp, &sol, (0, 0), &lattice_path((0, 0), (64, 64)), &unit_state(3)).unwrap();
        assert!(tr.summary.drift_per_length <= 1e-8, "{key} {:?}", tr.summary);
    }
}
