use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Case1Params, Case2Params, Variant};
use crate::expr::{parse, Expr, FnDef, FnTable};
use crate::frames::Delta;

/// Magnitude in `[0.3, 1.5]` with a random sign.
fn coef<R: Rng>(rng: &mut R) -> f64 {
    let m = rng.gen_range(0.3..1.5);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn c(x: f64) -> Expr {
    Expr::constant(x)
}

const PHI_BODIES: &[&str] = &["exp(K*s)", "K*s + C", "sin(K*s) + C", "s^2 + C", "cosh(K*s)", "s^3 + K*s"];

const NONLINEAR_TERMS: &[&str] = &["ux*vx", "sin(vx)", "exp(ux/2)", "vx^3", "ux^2", "cos(ux)"];

fn fill<R: Rng>(template: &str, rng: &mut R) -> String {
    let k = coef(rng);
    let c = coef(rng);
    template.replace('K', &format!("({k})")).replace('C', &format!("({c})"))
}

/// A random admissible parameter set for family (i): `mu g - lambda h`
/// satisfies its constraint by construction and the nonlinear part of the
/// free function keeps `W` generic.
pub fn random_case1<R: Rng>(rng: &mut R, variant: Variant, delta: Delta) -> Case1Params {
    let (mut a, mut b) = (coef(rng), coef(rng));
    match rng.gen_range(0..4) {
        0 => a = 0.0,
        1 => b = 0.0,
        _ => {}
    }
    let (mut lambda, mut mu) = (coef(rng), coef(rng));
    match rng.gen_range(0..4) {
        0 => lambda = 0.0,
        1 => mu = 0.0,
        _ => {}
    }
    let eta = coef(rng);
    let s = match variant {
        Variant::T1 => delta.sign(),
        Variant::T2 | Variant::T3 => 1.0,
    };
    let rate = c(s * a) * Expr::vx() + c(s * b) * Expr::ux();
    let free = {
        let term = NONLINEAR_TERMS.choose(rng).unwrap();
        let text = format!("({})*ux + ({})*vx + ({})*{term}", coef(rng), coef(rng), coef(rng));
        parse(&text).unwrap()
    };
    // mu g - lambda h = rate
    let (g, h) = if mu != 0.0 {
        let h = free;
        ((rate + c(lambda) * &h) / c(mu), h)
    } else {
        (free, rate / c(-lambda))
    };
    let phi = fill(PHI_BODIES.choose(rng).unwrap(), rng);
    Case1Params {
        label: format!("random-case1-{variant:?}"),
        variant,
        delta,
        a: c(a),
        b: c(b),
        lambda: c(lambda),
        mu: c(mu),
        eta: c(eta),
        g: g.simplify(),
        h: h.simplify(),
        phi: FnDef { args: vec!["s".into()], body: phi },
        params: BTreeMap::new(),
        functions: FnTable::new(),
    }
}

const P_TERMS: &[&str] = &["u^2", "v^2", "u*v", "sin(u)", "cos(v)", "exp(u/2)", "exp(v/2)", "u^3", "sin(u + v)"];

/// A random admissible parameter set for family (ii) with `|gamma| >= 0.2`
/// and a free function mixing `u` and `v` nonlinearly.
pub fn random_case2<R: Rng>(rng: &mut R, variant: Variant, delta: Delta) -> Case2Params {
    let (a1, b1, a2, b2) = loop {
        let mut k = [coef(rng), coef(rng), coef(rng), coef(rng)];
        if rng.gen_bool(0.25) {
            k[rng.gen_range(0..4)] = 0.0;
        }
        if (k[0] * k[3] - k[1] * k[2]).abs() >= 0.2 {
            break (k[0], k[1], k[2], k[3]);
        }
    };
    let mut terms: Vec<&str> = P_TERMS.choose_multiple(rng, 3).copied().collect();
    terms.push("u");
    terms.push("v");
    let body = terms
        .iter()
        .map(|t| format!("({})*{t}", coef(rng)))
        .collect::<Vec<_>>()
        .join(" + ");
    Case2Params {
        label: format!("random-case2-{variant:?}"),
        variant,
        delta,
        a1: c(a1),
        b1: c(b1),
        a2: c(a2),
        b2: c(b2),
        eta: c(coef(rng)),
        p: FnDef { args: vec!["u".into(), "v".into()], body },
        params: BTreeMap::new(),
        functions: FnTable::new(),
    }
}
