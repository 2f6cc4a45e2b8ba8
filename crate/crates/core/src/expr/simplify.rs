use std::collections::BTreeMap;

use num_rational::Rational64;

use super::{Builtin, Expr, Node};

/// Products of more than this many sums are left unexpanded.
const MAX_EXPANSION_TERMS: usize = 4096;

impl Expr {
    /// Canonical sum-of-products form: constants folded, like terms and
    /// like powers collected, `0`/`1` identities removed, integer powers of
    /// sums up to 4 expanded.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Neg(x) => mul_all(vec![Expr::constant(-1.0), x.simplify()]),
            Node::Add(xs) => add_all(xs.iter().map(Expr::simplify).collect()),
            Node::Mul(xs) => mul_all(xs.iter().map(Expr::simplify).collect()),
            Node::Pow(b, r) => pow_simplified(b.simplify(), *r),
            Node::Func(f, x) => func_simplified(*f, x.simplify()),
            Node::Call(c) => Expr::call(
                &c.name,
                c.order.clone(),
                c.args.iter().map(Expr::simplify).collect(),
            ),
        }
    }
}

/// Split a simplified term into its numeric coefficient and the remaining
/// monomial (`None` for a pure constant).
fn split_coefficient(term: &Expr) -> (f64, Option<Expr>) {
    match term.node() {
        Node::Const(c) => (*c, None),
        Node::Mul(fs) => match fs[0].as_const() {
            Some(c) => {
                let rest: Vec<Expr> = fs[1..].to_vec();
                (c, Some(Expr::mul(rest)))
            }
            None => (1.0, Some(term.clone())),
        },
        _ => (1.0, Some(term.clone())),
    }
}

fn scaled(c: f64, monomial: Expr) -> Expr {
    if c == 1.0 {
        return monomial;
    }
    let mut fs = vec![Expr::constant(c)];
    match monomial.node() {
        Node::Mul(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(monomial),
    }
    Expr::mul(fs)
}

pub(super) fn add_all(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t.node() {
            Node::Add(xs) => flat.extend(xs.iter().cloned()),
            _ => flat.push(t),
        }
    }
    let mut constant = 0.0;
    let mut collected: BTreeMap<Expr, f64> = BTreeMap::new();
    for t in &flat {
        match split_coefficient(t) {
            (c, None) => constant += c,
            (c, Some(m)) => *collected.entry(m).or_insert(0.0) += c,
        }
    }
    let mut out: Vec<Expr> = collected
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(m, c)| scaled(c, m))
        .collect();
    if constant != 0.0 {
        out.push(Expr::constant(constant));
    }
    Expr::add(out)
}

pub(super) fn mul_all(factors: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(factors.len());
    for f in factors {
        match f.node() {
            Node::Mul(xs) => flat.extend(xs.iter().cloned()),
            _ => flat.push(f),
        }
    }
    let mut coef = 1.0;
    let mut rest = Vec::with_capacity(flat.len());
    for f in flat {
        match f.as_const() {
            Some(c) => coef *= c,
            None => rest.push(f),
        }
    }
    if coef == 0.0 {
        return Expr::zero();
    }

    // distribute over the first sum, if the expansion stays bounded
    if let Some(pos) = rest.iter().position(|f| matches!(f.node(), Node::Add(_))) {
        let size: usize = rest
            .iter()
            .map(|f| match f.node() {
                Node::Add(xs) => xs.len(),
                _ => 1,
            })
            .product();
        if size <= MAX_EXPANSION_TERMS {
            let sum = rest.remove(pos);
            let Node::Add(terms) = sum.node() else { unreachable!() };
            let expanded = terms
                .iter()
                .map(|t| {
                    let mut fs = rest.clone();
                    fs.push(Expr::constant(coef));
                    fs.push(t.clone());
                    mul_all(fs)
                })
                .collect();
            return add_all(expanded);
        }
    }

    let mut powers: BTreeMap<Expr, Rational64> = BTreeMap::new();
    for f in rest {
        let (base, r) = match f.node() {
            Node::Pow(b, r) => (b.clone(), *r),
            _ => (f, Rational64::from_integer(1)),
        };
        *powers.entry(base).or_insert_with(|| Rational64::from_integer(0)) += r;
    }

    let mut out = Vec::with_capacity(powers.len());
    let mut needs_pass = false;
    for (base, r) in powers {
        if r == Rational64::from_integer(0) {
            continue;
        }
        let p = pow_simplified(base, r);
        match p.node() {
            Node::Const(c) => coef *= c,
            Node::Mul(_) | Node::Add(_) => {
                needs_pass = true;
                out.push(p);
            }
            _ => out.push(p),
        }
    }
    if needs_pass {
        out.push(Expr::constant(coef));
        return mul_all(out);
    }
    if coef == 0.0 {
        return Expr::zero();
    }
    out.sort();
    if coef != 1.0 || out.is_empty() {
        out.insert(0, Expr::constant(coef));
    }
    Expr::mul(out)
}

fn fold_const_pow(c: f64, r: Rational64) -> Option<f64> {
    let n = *r.numer();
    let d = *r.denom();
    let v = if d == 1 {
        if c == 0.0 && n < 0 {
            return None;
        }
        c.powi(n.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    } else if c < 0.0 {
        if d % 2 == 0 {
            return None;
        }
        let m = (-c).powf(n as f64 / d as f64);
        if n % 2 == 0 {
            m
        } else {
            -m
        }
    } else {
        if c == 0.0 && n < 0 {
            return None;
        }
        c.powf(n as f64 / d as f64)
    };
    v.is_finite().then_some(v)
}

pub(super) fn pow_simplified(base: Expr, r: Rational64) -> Expr {
    if r == Rational64::from_integer(0) {
        return Expr::one();
    }
    if r == Rational64::from_integer(1) {
        return base;
    }
    let integral = r.is_integer();
    match base.node() {
        Node::Const(c) => match fold_const_pow(*c, r) {
            Some(v) => Expr::constant(v),
            None => Expr::pow(base.clone(), r),
        },
        Node::Pow(b, s) if integral => pow_simplified(b.clone(), s * r),
        Node::Mul(fs) if integral => {
            mul_all(fs.iter().map(|f| pow_simplified(f.clone(), r)).collect())
        }
        Node::Add(_) if integral && *r.numer() > 1 && *r.numer() <= 4 => {
            mul_all(vec![base.clone(); *r.numer() as usize])
        }
        _ => Expr::pow(base, r),
    }
}

fn func_simplified(f: Builtin, arg: Expr) -> Expr {
    if let Some(c) = arg.as_const() {
        let v = match f {
            Builtin::Exp => c.exp(),
            Builtin::Log if c > 0.0 => c.ln(),
            Builtin::Log => f64::NAN,
            Builtin::Sin => c.sin(),
            Builtin::Cos => c.cos(),
            Builtin::Sinh => c.sinh(),
            Builtin::Cosh => c.cosh(),
        };
        if v.is_finite() {
            return Expr::constant(v);
        }
    }
    Expr::func(f, arg)
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn s(text: &str) -> String {
        parse(text).unwrap().simplify().to_string()
    }

    #[test]
    fn folds_and_collects() {
        assert_eq!(s("u + u"), "2*u");
        assert_eq!(s("u*v - v*u"), "0");
        assert_eq!(s("0*u + 1*v"), "v");
        assert_eq!(s("2*3 + 1"), "7");
        assert_eq!(s("u*u^(-1)"), "1");
    }

    #[test]
    fn expands_products_of_sums() {
        assert_eq!(parse("(u+v)^2").unwrap().simplify(), parse("u^2 + 2*u*v + v^2").unwrap().simplify());
        assert_eq!(s("(u - v)*(u + v)"), s("u^2 - v^2"));
    }

    #[test]
    fn keeps_fractional_powers_of_squares() {
        // (u^2)^(1/2) is |u|, not u
        assert_ne!(s("(u^2)^(1/2)"), "u");
        assert_eq!(s("(u^(1/2))^2"), "u");
    }

    #[test]
    fn constant_functions_fold() {
        assert_eq!(s("exp(0)"), "1");
        assert_eq!(s("cos(0) + sinh(0)"), "1");
        assert_eq!(s("log(-1)"), "log(-1)");
    }

    #[test]
    fn simplify_is_idempotent_on_examples() {
        for t in ["eta*(ux+vx)", "(u + 1)^3*v^(-1)", "exp(u - vx)*2 + ux*exp(u + vx)", "phi''(2*v)*(a*u + b)"] {
            let once = parse(t).unwrap().simplify();
            assert_eq!(once.simplify(), once, "{t}");
        }
    }
}
