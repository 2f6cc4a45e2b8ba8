use num_rational::Rational64;

use super::{Builtin, Expr, ExprError, Node, Sym, MAX_USER_DERIVATIVE};

impl Expr {
    /// Partial derivative with respect to a jet variable or a positional
    /// argument, simplified.
    ///
    /// User-function nodes gain one formal order per differentiation; going
    /// past [`MAX_USER_DERIVATIVE`] is an error.
    pub fn diff(&self, s: &Sym) -> Result<Expr, ExprError> {
        if let Sym::Param(p) = s {
            return Err(ExprError::DiffParam(p.to_string()));
        }
        Ok(derivative(self, s, Some(MAX_USER_DERIVATIVE))?.simplify())
    }

    /// Like [`Expr::diff`] but without an order cap, for function bodies
    /// whose derivatives are tabulated ahead of evaluation.
    pub(super) fn diff_unbounded(&self, s: &Sym) -> Expr {
        derivative(self, s, None)
            .expect("uncapped differentiation cannot fail")
            .simplify()
    }
}

fn derivative(e: &Expr, s: &Sym, cap: Option<u32>) -> Result<Expr, ExprError> {
    if !e.depends_on(s) {
        return Ok(Expr::zero());
    }
    let d = |x: &Expr| derivative(x, s, cap);
    Ok(match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Sym(t) => Expr::constant(if t == s { 1.0 } else { 0.0 }),
        Node::Add(xs) => Expr::add(xs.iter().map(d).collect::<Result<_, _>>()?),
        Node::Mul(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                if f.depends_on(s) {
                    let mut prod = fs.clone();
                    prod[i] = d(f)?;
                    terms.push(Expr::mul(prod));
                }
            }
            Expr::add(terms)
        }
        Node::Pow(b, r) => Expr::mul(vec![
            Expr::constant(*r.numer() as f64 / *r.denom() as f64),
            Expr::pow(b.clone(), r - Rational64::from_integer(1)),
            d(b)?,
        ]),
        Node::Neg(x) => Expr::neg_of(d(x)?),
        Node::Func(f, x) => {
            let outer = match f {
                Builtin::Exp => x.exp(),
                Builtin::Log => x.recip(),
                Builtin::Sin => x.cos(),
                Builtin::Cos => Expr::neg_of(x.sin()),
                Builtin::Sinh => x.cosh(),
                Builtin::Cosh => x.sinh(),
            };
            Expr::mul(vec![outer, d(x)?])
        }
        Node::Call(c) => {
            let mut terms = Vec::new();
            for (k, a) in c.args.iter().enumerate() {
                if !a.depends_on(s) {
                    continue;
                }
                if let Some(max) = cap {
                    if c.total_order() >= max {
                        return Err(ExprError::DerivativeOrder { name: c.name.to_string(), max });
                    }
                }
                let mut order = c.order.clone();
                order[k] += 1;
                terms.push(Expr::mul(vec![Expr::call(&c.name, order, c.args.clone()), d(a)?]));
            }
            Expr::add(terms)
        }
    })
}
