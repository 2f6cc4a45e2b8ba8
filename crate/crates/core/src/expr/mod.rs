//! Minimal computer-algebra kernel for expressions in `u, ux, v, vx`.
//!
//! The four jet variables are independent symbols; everything else is a
//! named real parameter, a builtin function, or a user function carrying a
//! formal derivative multi-index (so `phi`, `phi'` and `phi''` are distinct
//! nodes linked by [`Expr::diff`]).
//!
//! Identity testing is numeric (see [`zero`]): simplified forms are canonical
//! enough for structural equality on polynomial inputs, but transcendental
//! identities are only decided by sampling.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
pub mod zero;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

pub use eval::{ClosureFn, EvalError, ExprFn, FnDef, FnTable, Point, UserFn};
pub use parse::{parse, parse_with, ParseContext, ParseError};
pub use zero::{find_witness, is_zero, zero_test, Interval, SampleBox, Sampler, Witness, ZeroConfig, ZeroReport};

/// Highest formal derivative order carried by a user-function node.
pub const MAX_USER_DERIVATIVE: u32 = 2;

/// A symbol: one of the four jet variables, a named parameter, or a
/// positional argument inside a user-function body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    U,
    Ux,
    V,
    Vx,
    Param(Arc<str>),
    Arg(usize),
}

impl Sym {
    pub const VARS: [Sym; 4] = [Sym::U, Sym::Ux, Sym::V, Sym::Vx];

    pub fn param(name: &str) -> Sym {
        Sym::Param(Arc::from(name))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Sym::U | Sym::Ux | Sym::V | Sym::Vx)
    }

    /// Slot in a `[u, ux, v, vx]` array.
    pub fn var_index(&self) -> Option<usize> {
        match self {
            Sym::U => Some(0),
            Sym::Ux => Some(1),
            Sym::V => Some(2),
            Sym::Vx => Some(3),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Sym::U => "u".into(),
            Sym::Ux => "ux".into(),
            Sym::V => "v".into(),
            Sym::Vx => "vx".into(),
            Sym::Param(p) => p.to_string(),
            Sym::Arg(i) => format!("${i}"),
        }
    }

    /// Inverse of [`Sym::name`].
    pub fn from_name(name: &str) -> Sym {
        match name {
            "u" => Sym::U,
            "ux" => Sym::Ux,
            "v" => Sym::V,
            "vx" => Sym::Vx,
            other => {
                if let Some(i) = other.strip_prefix('$').and_then(|d| d.parse().ok()) {
                    Sym::Arg(i)
                } else {
                    Sym::param(other)
                }
            }
        }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Exp => "exp",
            Builtin::Log => "log",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Sinh => "sinh",
            Builtin::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "exp" => Builtin::Exp,
            "log" | "ln" => Builtin::Log,
            "sin" => Builtin::Sin,
            "cos" => Builtin::Cos,
            "sinh" => Builtin::Sinh,
            "cosh" => Builtin::Cosh,
            _ => return None,
        })
    }
}

/// Application of a user function with a formal partial-derivative
/// multi-index (`order[k]` derivatives in argument `k`).
#[derive(Clone, Debug)]
pub struct Call {
    pub name: Arc<str>,
    pub order: Vec<u32>,
    pub args: Vec<Expr>,
}

impl Call {
    pub fn total_order(&self) -> u32 {
        self.order.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Const(f64),
    Sym(Sym),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rational64),
    Neg(Expr),
    Func(Builtin, Expr),
    Call(Call),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("cannot differentiate with respect to parameter `{0}`")]
    DiffParam(String),
    #[error("derivative of `{name}` would exceed order {max}")]
    DerivativeOrder { name: String, max: u32 },
}

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: f64) -> Expr {
        // -0.0 and 0.0 must compare equal structurally
        let c = if c == 0.0 { 0.0 } else { c };
        Expr(Arc::new(Node::Const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn sym(s: Sym) -> Expr {
        Expr(Arc::new(Node::Sym(s)))
    }

    pub fn u() -> Expr {
        Expr::sym(Sym::U)
    }
    pub fn ux() -> Expr {
        Expr::sym(Sym::Ux)
    }
    pub fn v() -> Expr {
        Expr::sym(Sym::V)
    }
    pub fn vx() -> Expr {
        Expr::sym(Sym::Vx)
    }

    pub fn param(name: &str) -> Expr {
        Expr::sym(Sym::param(name))
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Add(terms))),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Mul(factors))),
        }
    }

    pub fn pow(base: Expr, exp: Rational64) -> Expr {
        Expr(Arc::new(Node::Pow(base, exp)))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self.clone(), Rational64::from_integer(n))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::pow(self.clone(), Rational64::new(1, 2))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn neg_of(e: Expr) -> Expr {
        Expr(Arc::new(Node::Neg(e)))
    }

    pub fn func(f: Builtin, arg: Expr) -> Expr {
        Expr(Arc::new(Node::Func(f, arg)))
    }

    pub fn exp(&self) -> Expr {
        Expr::func(Builtin::Exp, self.clone())
    }
    pub fn log(&self) -> Expr {
        Expr::func(Builtin::Log, self.clone())
    }
    pub fn sin(&self) -> Expr {
        Expr::func(Builtin::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::func(Builtin::Cos, self.clone())
    }
    pub fn sinh(&self) -> Expr {
        Expr::func(Builtin::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Expr {
        Expr::func(Builtin::Cosh, self.clone())
    }

    /// User-function application `name[order](args)`.
    pub fn call(name: &str, order: Vec<u32>, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(order.len(), args.len());
        Expr(Arc::new(Node::Call(Call {
            name: Arc::from(name),
            order,
            args,
        })))
    }

    /// Unary user function with `k` formal derivatives: `phi`, `phi'`, `phi''`.
    pub fn call1(name: &str, k: u32, arg: Expr) -> Expr {
        Expr::call(name, vec![k], vec![arg])
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => vec![],
            Node::Add(xs) | Node::Mul(xs) => xs.iter().collect(),
            Node::Pow(b, _) => vec![b],
            Node::Neg(x) | Node::Func(_, x) => vec![x],
            Node::Call(c) => c.args.iter().collect(),
        }
    }

    /// Rebuild this node with each child replaced by `f(child)`.
    pub fn map_children<F: FnMut(&Expr) -> Expr>(&self, mut f: F) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Sym(_) => self.clone(),
            Node::Add(xs) => Expr::add(xs.iter().map(&mut f).collect()),
            Node::Mul(xs) => Expr::mul(xs.iter().map(&mut f).collect()),
            Node::Pow(b, r) => Expr::pow(f(b), *r),
            Node::Neg(x) => Expr::neg_of(f(x)),
            Node::Func(g, x) => Expr::func(*g, f(x)),
            Node::Call(c) => Expr(Arc::new(Node::Call(Call {
                name: c.name.clone(),
                order: c.order.clone(),
                args: c.args.iter().map(&mut f).collect(),
            }))),
        }
    }

    /// All symbols occurring in the tree (user-function bodies excluded).
    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        if let Node::Sym(s) = self.node() {
            out.insert(s.clone());
        }
        for c in self.children() {
            c.collect_symbols(out);
        }
    }

    /// Names of user functions referenced by the tree.
    pub fn functions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_functions(&mut out);
        out
    }

    fn collect_functions(&self, out: &mut BTreeSet<String>) {
        if let Node::Call(c) = self.node() {
            out.insert(c.name.to_string());
        }
        for c in self.children() {
            c.collect_functions(out);
        }
    }

    pub fn depends_on(&self, s: &Sym) -> bool {
        match self.node() {
            Node::Sym(t) => t == s,
            _ => self.children().iter().any(|c| c.depends_on(s)),
        }
    }

    /// Simultaneous substitution of symbols by expressions.
    pub fn subst(&self, map: &BTreeMap<Sym, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        match self.node() {
            Node::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            _ => self.map_children(|c| c.subst(map)),
        }
    }

    /// Replace named parameters by numeric values.
    pub fn bind_params(&self, values: &BTreeMap<String, f64>) -> Expr {
        let map: BTreeMap<Sym, Expr> = values
            .iter()
            .map(|(k, v)| (Sym::param(k), Expr::constant(*v)))
            .collect();
        self.subst(&map)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    fn rank(&self) -> u8 {
        match self.node() {
            Node::Const(_) => 0,
            Node::Sym(_) => 1,
            Node::Pow(..) => 2,
            Node::Mul(_) => 3,
            Node::Add(_) => 4,
            Node::Neg(_) => 5,
            Node::Func(..) => 6,
            Node::Call(_) => 7,
        }
    }
}

fn cmp_slices(a: &[Expr], b: &[Expr]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        match self.rank().cmp(&other.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.total_cmp(b),
            (Node::Sym(a), Node::Sym(b)) => a.cmp(b),
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => cmp_slices(a, b),
            (Node::Pow(a, r), Node::Pow(b, s)) => a.cmp(b).then_with(|| r.cmp(s)),
            (Node::Neg(a), Node::Neg(b)) => a.cmp(b),
            (Node::Func(f, a), Node::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            (Node::Call(a), Node::Call(b)) => a
                .name
                .cmp(&b.name)
                .then_with(|| a.order.cmp(&b.order))
                .then_with(|| cmp_slices(&a.args, &b.args)),
            _ => unreachable!("equal rank implies equal variant"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl From<Sym> for Expr {
    fn from(s: Sym) -> Self {
        Expr::sym(s)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, rhs: f64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::constant(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::constant(self), rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::constant(self), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::neg_of(b)]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg_of(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg_of(self.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add(iter.collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(Expr::constant(-0.0), Expr::zero());
    }

    #[test]
    fn symbol_names_round_trip() {
        for s in [Sym::U, Sym::Ux, Sym::V, Sym::Vx, Sym::param("eta"), Sym::Arg(3)] {
            assert_eq!(Sym::from_name(&s.name()), s);
        }
    }

    #[test]
    fn symbols_and_functions_are_collected() {
        let e = parse("eta*phi'(a*v + b*u) + ux").unwrap();
        let syms = e.symbols();
        assert!(syms.contains(&Sym::U) && syms.contains(&Sym::Ux));
        assert!(syms.contains(&Sym::param("eta")));
        assert_eq!(e.functions().into_iter().collect::<Vec<_>>(), vec!["phi"]);
    }
}
