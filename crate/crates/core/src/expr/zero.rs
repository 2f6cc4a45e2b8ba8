//! Randomized identity testing.
//!
//! An expression is declared identically zero when it vanishes, relative to
//! the magnitude of its own intermediate values, at every sampled point.
//! Points where evaluation leaves its domain are redrawn, up to a bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, Expr, FnTable, Point, Sym};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Where each symbol is drawn from: a union of intervals, chosen with
/// probability proportional to width.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub default: Vec<Interval>,
    pub overrides: BTreeMap<Sym, Vec<Interval>>,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            default: vec![Interval::new(-2.0, -0.1), Interval::new(0.1, 2.0)],
            overrides: BTreeMap::new(),
        }
    }
}

impl SampleBox {
    pub fn with(mut self, s: Sym, intervals: Vec<Interval>) -> SampleBox {
        self.overrides.insert(s, intervals);
        self
    }

    pub fn intervals(&self, s: &Sym) -> &[Interval] {
        self.overrides.get(s).map_or(&self.default, Vec::as_slice)
    }

    pub fn sample<R: Rng>(&self, s: &Sym, rng: &mut R) -> f64 {
        let ivs = self.intervals(s);
        let total: f64 = ivs.iter().map(Interval::width).sum();
        if total <= 0.0 {
            return ivs.first().map_or(0.0, |iv| iv.lo);
        }
        let mut t = rng.gen::<f64>() * total;
        for iv in ivs {
            if t <= iv.width() {
                return iv.lo + t;
            }
            t -= iv.width();
        }
        ivs.last().unwrap().hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroConfig {
    pub trials: usize,
    /// Relative tolerance: `|value| <= tol * (1 + scale)`.
    pub tol: f64,
    pub seed: u64,
    /// Give up after this many out-of-domain draws.
    pub max_redraws: usize,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig {
            trials: 100,
            tol: 1e-9,
            seed: 0xC0FFEE,
            max_redraws: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub zero: bool,
    /// Points at which the expression was evaluated successfully.
    pub samples: usize,
    /// Points discarded because evaluation left its domain.
    pub redraws: usize,
    /// Largest `|value| / (1 + scale)` seen.
    pub worst_ratio: f64,
    pub worst_value: f64,
    pub worst_point: BTreeMap<String, f64>,
}

/// Sample `e` at random points; the first sample outside tolerance ends the
/// test with `zero == false`.
pub fn zero_test(e: &Expr, bx: &SampleBox, cfg: &ZeroConfig, fns: &FnTable) -> Result<ZeroReport, EvalError> {
    let mut report = ZeroReport {
        zero: true,
        samples: 0,
        redraws: 0,
        worst_ratio: 0.0,
        worst_value: 0.0,
        worst_point: BTreeMap::new(),
    };
    if let Some(c) = e.as_const() {
        // same criterion as a sampled value whose only intermediate is itself
        report.zero = c.abs() <= cfg.tol * (1.0 + c.abs());
        report.samples = 1;
        report.worst_value = c;
        report.worst_ratio = c.abs() / (1.0 + c.abs());
        return Ok(report);
    }
    if let Some(a) = e.symbols().iter().find(|s| matches!(s, Sym::Arg(_))) {
        return Err(EvalError::Unbound(a.name()));
    }
    let mut sampler = Sampler::new([e], bx, cfg.seed);
    while report.samples < cfg.trials {
        let pt = sampler.next_point();
        match e.eval_scaled(&pt, fns) {
            Ok((v, scale)) => {
                report.samples += 1;
                let ratio = v.abs() / (1.0 + scale);
                if ratio >= report.worst_ratio {
                    report.worst_ratio = ratio;
                    report.worst_value = v;
                    report.worst_point = sampler.describe(&pt);
                }
                if v.abs() > cfg.tol * (1.0 + scale) {
                    report.zero = false;
                    return Ok(report);
                }
            }
            Err(err) if err.is_domain() => {
                report.redraws += 1;
                if report.redraws > cfg.max_redraws {
                    return Err(err);
                }
            }
            Err(err) => return Err(err),
        }
    }
    Ok(report)
}

/// Seeded stream of sample points over the symbols of some expressions.
pub struct Sampler<'a> {
    syms: Vec<Sym>,
    bx: &'a SampleBox,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new<'e>(exprs: impl IntoIterator<Item = &'e Expr>, bx: &'a SampleBox, seed: u64) -> Sampler<'a> {
        let mut syms = std::collections::BTreeSet::new();
        for e in exprs {
            syms.extend(e.symbols().into_iter().filter(|s| !matches!(s, Sym::Arg(_))));
        }
        Sampler {
            syms: syms.into_iter().collect(),
            bx,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn symbols(&self) -> &[Sym] {
        &self.syms
    }

    pub fn next_point(&mut self) -> Point {
        let mut pt = Point::default();
        for s in &self.syms {
            let x = self.bx.sample(s, &mut self.rng);
            match s {
                Sym::Param(p) => {
                    pt.params.insert(p.to_string(), x);
                }
                var => pt.vars[var.var_index().unwrap()] = x,
            }
        }
        pt
    }

    /// Named coordinates of `pt` restricted to the sampled symbols.
    pub fn describe(&self, pt: &Point) -> BTreeMap<String, f64> {
        self.syms.iter().map(|s| (s.name(), pt.get(s).unwrap_or(f64::NAN))).collect()
    }
}

/// A sample point at which some open condition was observed to hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    pub values: Vec<f64>,
}

/// First sample point where every expression evaluates and `accept` holds
/// on the values; `None` after `cfg.trials` evaluated points.
pub fn find_witness(
    exprs: &[Expr],
    bx: &SampleBox,
    cfg: &ZeroConfig,
    fns: &FnTable,
    accept: impl Fn(&[f64]) -> bool,
) -> Option<Witness> {
    let mut sampler = Sampler::new(exprs, bx, cfg.seed);
    let mut evaluated = 0;
    let mut redraws = 0;
    while evaluated < cfg.trials && redraws <= cfg.max_redraws {
        let pt = sampler.next_point();
        let vals: Result<Vec<f64>, EvalError> = exprs.iter().map(|e| e.eval(&pt, fns)).collect();
        match vals {
            Ok(vals) => {
                evaluated += 1;
                if accept(&vals) {
                    return Some(Witness { point: sampler.describe(&pt), values: vals });
                }
            }
            Err(_) => redraws += 1,
        }
    }
    None
}

/// [`zero_test`] with the default box and configuration.
pub fn is_zero(e: &Expr, fns: &FnTable) -> Result<bool, EvalError> {
    Ok(zero_test(e, &SampleBox::default(), &ZeroConfig::default(), fns)?.zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ClosureFn};

    fn z(text: &str) -> bool {
        is_zero(&parse(text).unwrap(), &FnTable::new()).unwrap()
    }

    #[test]
    fn trigonometric_and_hyperbolic_identities() {
        assert!(z("sin(u)^2 + cos(u)^2 - 1"));
        assert!(z("cosh(ux)^2 - sinh(ux)^2 - 1"));
        assert!(z("exp(u + v) - exp(u)*exp(v)"));
        assert!(!z("sin(u)^2 + cos(u)^2 - 1.000001"));
        assert!(!z("u*v - v*u + 1e-6*ux"));
    }

    #[test]
    fn large_terms_cancel_relatively() {
        assert!(z("(1e8*u + v)^2 - 1e16*u^2 - 2e8*u*v - v^2"));
    }

    #[test]
    fn domain_trouble_is_redrawn() {
        // log only defined for half the box
        let r = zero_test(
            &parse("log(u) + log(v) - log(u*v)").unwrap(),
            &SampleBox::default(),
            &ZeroConfig::default(),
            &FnTable::new(),
        )
        .unwrap();
        assert!(r.zero);
        assert!(r.redraws > 0);
        assert_eq!(r.samples, 100);
    }

    #[test]
    fn determinism_and_overrides() {
        let e = parse("u - 0.5").unwrap();
        let bx = SampleBox::default().with(Sym::U, vec![Interval::new(0.5, 0.5)]);
        assert!(zero_test(&e, &bx, &ZeroConfig::default(), &FnTable::new()).unwrap().zero);
        let a = zero_test(&parse("u*v").unwrap(), &SampleBox::default(), &ZeroConfig::default(), &FnTable::new()).unwrap();
        let b = zero_test(&parse("u*v").unwrap(), &SampleBox::default(), &ZeroConfig::default(), &FnTable::new()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn user_functions_in_identities() {
        let mut fns = FnTable::new();
        fns.insert("phi", ClosureFn::new("exp", f64::exp, f64::exp, f64::exp));
        let e = parse("phi'(2*u) - phi(u)^2").unwrap();
        assert!(is_zero(&e, &fns).unwrap());
    }
}
