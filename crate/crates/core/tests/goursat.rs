use pss_core::catalog::{entries, entry, DeltaRule, EntryKind, Overrides};
use pss_core::config::Tolerances;
use pss_core::frames::Delta;
use pss_core::goursat::{curvature, forms_residual, generic_data, solve, validate, GoursatData};
use rand::SeedableRng;

const LEVELS: &[usize] = &[33, 65, 129, 257];

#[test]
fn trivial_fixture_grid_is_exact() {
    let e = entry("trivial-zero").unwrap();
    let (sys, _) = e.instantiate(&Overrides::default()).unwrap();
    let data = GoursatData::parse(e.data).unwrap();
    let g = solve(&sys, &data, 33, 33, &Tolerances::default()).unwrap();
    for j in 0..g.nt {
        for i in 0..g.nx {
            assert_eq!(g.state(i, j), [g.x(i), 1.0, g.t(j), 0.0]);
        }
    }
}

#[test]
fn every_geometric_entry_validates_with_its_default_data() {
    let tol = Tolerances::default();
    for e in entries() {
        // the hyperbolic spherical family has no default data that stays off
        // the degenerate locus
        if !e.is_hyperbolic() || e.kind == EntryKind::SolverFixture || e.key == "cor5.2" {
            continue;
        }
        let mut deltas = vec![e.default_delta()];
        if matches!(e.delta, DeltaRule::Either(_)) {
            deltas.push(e.default_delta().flip());
        }
        for d in deltas {
            let (sys, fr) = e.instantiate(&Overrides::default().delta(d)).unwrap();
            let data = GoursatData::parse(e.data).unwrap();
            let rep = validate(&sys, &fr, &data, LEVELS, &tol).unwrap();
            assert!(rep.passed, "{} {d}: {:?}", e.key, rep.failures);
            assert!(rep.shrink_together, "{} {d}", e.key);
        }
    }
}

#[test]
fn konno_oono_with_vanishing_v_is_degenerate_everywhere() {
    let (sys, fr) = entry("konno-oono").unwrap().instantiate(&Overrides::default()).unwrap();
    let data = GoursatData::parse(["x", "0", "0", "0"]).unwrap();
    let rep = validate(&sys, &fr, &data, &[17, 33], &Tolerances::default()).unwrap();
    assert!(!rep.passed);
    assert!(rep.levels.iter().all(|l| l.degenerate_fraction == 1.0));
    assert!(rep.failures.iter().any(|f| f.contains("degenerate")));
}

#[test]
fn sign_flipped_frame_entry_stalls_the_forms_residual() {
    let (sys, fr) = entry("plr").unwrap().instantiate(&Overrides::default()).unwrap();
    let broken = fr.with_entry(2, 1, -fr.f[2][1].clone());
    let data = GoursatData::parse(entry("plr").unwrap().data).unwrap();
    let tol = Tolerances::default();
    let max = |n| {
        let g = solve(&sys, &data, n, n, &tol).unwrap();
        let r = forms_residual(&sys, &broken, &g, &tol).unwrap();
        r.max.iter().copied().fold(0.0, f64::max)
    };
    let (a, b) = (max(33), max(65));
    assert!(b > 0.1 && b > 0.5 * a, "{a} {b}");
}

#[test]
fn spherical_entry_has_positive_unit_curvature() {
    let e = entry("ex3.4").unwrap();
    let (sys, fr) = e.instantiate(&Overrides::default()).unwrap();
    assert_eq!(sys.delta, Delta::Ss);
    let data = GoursatData::parse(e.data).unwrap();
    let tol = Tolerances::default();
    let g = solve(&sys, &data, 65, 65, &tol).unwrap();
    let k = curvature(&sys, &fr, &g, &tol).unwrap();
    assert!(k.max_deviation(1.0).unwrap() < 1e-2);
}

#[test]
fn random_family_member_validates_on_screened_data() {
    let tol = Tolerances::default();
    let e = entry("cor5.1").unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (sys, fr, data) = (0..10)
        .find_map(|_| {
            let (sys, fr) = e.instantiate(&e.draw(&mut rng)).unwrap();
            generic_data(&sys, &fr, &mut rng, 20, 0.1, 3.0, &tol).map(|d| (sys, fr, d))
        })
        .expect("no screened data");
    let rep = validate(&sys, &fr, &data, LEVELS, &tol).unwrap();
    assert!(rep.passed, "{:?}", rep.failures);
}

#[test]
fn reports_are_reproducible() {
    let e = entry("plr").unwrap();
    let (sys, fr) = e.instantiate(&Overrides::default()).unwrap();
    let data = GoursatData::parse(e.data).unwrap();
    let tol = Tolerances::default();
    let a = serde_json::to_string(&validate(&sys, &fr, &data, &[17, 33], &tol).unwrap()).unwrap();
    let b = serde_json::to_string(&validate(&sys, &fr, &data, &[17, 33], &tol).unwrap()).unwrap();
    assert_eq!(a, b);
}
