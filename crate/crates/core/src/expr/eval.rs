use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{parse_with, Builtin, Expr, Node, ParseContext, ParseError, Sym, MAX_USER_DERIVATIVE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("unknown function `{0}`")]
    UnboundFunction(String),
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("function `{name}` has no derivative of order {order:?}")]
    Order { name: String, order: Vec<u32> },
    #[error("{op} outside its domain in `{subtree}`")]
    Domain { op: String, subtree: String },
}

impl EvalError {
    pub fn is_domain(&self) -> bool {
        matches!(self, EvalError::Domain { .. })
    }
}

/// Values for the jet variables and any named parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    /// `[u, ux, v, vx]`
    pub vars: [f64; 4],
    pub params: BTreeMap<String, f64>,
}

impl Point {
    pub fn new(u: f64, ux: f64, v: f64, vx: f64) -> Point {
        Point { vars: [u, ux, v, vx], params: BTreeMap::new() }
    }

    pub fn with_params(mut self, params: &BTreeMap<String, f64>) -> Point {
        self.params.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    pub fn get(&self, s: &Sym) -> Option<f64> {
        match s {
            Sym::Param(p) => self.params.get(&**p).copied(),
            Sym::Arg(_) => None,
            var => Some(self.vars[var.var_index().unwrap()]),
        }
    }
}

/// A function that expressions may call by name.
pub trait UserFn: Send + Sync + fmt::Debug {
    fn arity(&self) -> usize;

    /// Value of the partial derivative `order` at `args`.
    fn eval(&self, order: &[u32], args: &[f64], point: &Point, fns: &FnTable) -> Result<f64, EvalError>;

    fn as_expr_fn(&self) -> Option<&ExprFn> {
        None
    }
}

/// User function given by a closed-form body in positional arguments.
#[derive(Clone, Debug)]
pub struct ExprFn {
    arg_names: Vec<String>,
    body: Expr,
    derivatives: BTreeMap<Vec<u32>, Expr>,
}

fn multi_indices(arity: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; arity]];
    let mut frontier = out.clone();
    for _ in 0..max {
        let mut next = Vec::new();
        for idx in &frontier {
            for k in 0..arity {
                let mut j = idx.clone();
                j[k] += 1;
                if !next.contains(&j) {
                    next.push(j);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl ExprFn {
    /// `body` refers to its arguments as `Sym::Arg(i)`.
    pub fn new(arg_names: Vec<String>, body: Expr) -> ExprFn {
        let mut derivatives = BTreeMap::new();
        for idx in multi_indices(arg_names.len(), MAX_USER_DERIVATIVE) {
            let d = Self::differentiate(&body, &idx);
            derivatives.insert(idx, d);
        }
        ExprFn { arg_names, body, derivatives }
    }

    pub fn parse(arg_names: &[&str], body: &str) -> Result<ExprFn, ParseError> {
        let e = parse_with(body, &ParseContext::with_args(arg_names))?;
        Ok(ExprFn::new(arg_names.iter().map(|s| s.to_string()).collect(), e))
    }

    fn differentiate(body: &Expr, order: &[u32]) -> Expr {
        let mut d = body.simplify();
        for (k, &n) in order.iter().enumerate() {
            for _ in 0..n {
                d = d.diff_unbounded(&Sym::Arg(k));
            }
        }
        d
    }

    pub fn arg_names(&self) -> &[String] {
        &self.arg_names
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    /// Body of the partial derivative `order`, in positional arguments.
    pub fn derivative(&self, order: &[u32]) -> Expr {
        self.derivatives
            .get(order)
            .cloned()
            .unwrap_or_else(|| Self::differentiate(&self.body, order))
    }

    pub fn definition(&self) -> FnDef {
        FnDef {
            args: self.arg_names.clone(),
            body: self.body.to_string_with_args(&self.arg_names),
        }
    }
}

impl UserFn for ExprFn {
    fn arity(&self) -> usize {
        self.arg_names.len()
    }

    fn eval(&self, order: &[u32], args: &[f64], point: &Point, fns: &FnTable) -> Result<f64, EvalError> {
        let body = self.derivative(order);
        let mut scale = 0.0;
        eval_node(&body, point, args, fns, &mut scale)
    }

    fn as_expr_fn(&self) -> Option<&ExprFn> {
        Some(self)
    }
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Unary user function backed by native closures for the value and its
/// first two derivatives.
#[derive(Clone)]
pub struct ClosureFn {
    label: String,
    parts: [Scalar; 3],
}

impl ClosureFn {
    pub fn new(
        label: &str,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> ClosureFn {
        ClosureFn {
            label: label.to_string(),
            parts: [Arc::new(value), Arc::new(d1), Arc::new(d2)],
        }
    }
}

impl fmt::Debug for ClosureFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClosureFn({})", self.label)
    }
}

impl UserFn for ClosureFn {
    fn arity(&self) -> usize {
        1
    }

    fn eval(&self, order: &[u32], args: &[f64], _: &Point, _: &FnTable) -> Result<f64, EvalError> {
        let k = order[0] as usize;
        let f = self.parts.get(k).ok_or_else(|| EvalError::Order {
            name: self.label.clone(),
            order: order.to_vec(),
        })?;
        Ok(f(args[0]))
    }
}

/// Serializable form of an [`ExprFn`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnDef {
    pub args: Vec<String>,
    pub body: String,
}

/// Named user functions available to evaluation.
#[derive(Clone, Default)]
pub struct FnTable {
    fns: BTreeMap<String, Arc<dyn UserFn>>,
}

impl fmt::Debug for FnTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.fns.iter()).finish()
    }
}

impl FnTable {
    pub fn new() -> FnTable {
        FnTable::default()
    }

    pub fn insert(&mut self, name: &str, f: impl UserFn + 'static) {
        self.fns.insert(name.to_string(), Arc::new(f));
    }

    pub fn insert_arc(&mut self, name: &str, f: Arc<dyn UserFn>) {
        self.fns.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn UserFn>> {
        self.fns.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fns.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.fns.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fns.keys().map(String::as_str)
    }

    pub fn arities(&self) -> BTreeMap<String, usize> {
        self.fns.iter().map(|(k, f)| (k.clone(), f.arity())).collect()
    }

    /// Entries of `other` override entries of `self`.
    pub fn extend(&mut self, other: &FnTable) {
        for (k, f) in &other.fns {
            self.fns.insert(k.clone(), f.clone());
        }
    }

    /// Replace every call to a closed-form function by its (differentiated)
    /// body; calls to native functions are kept.
    pub fn inline(&self, e: &Expr) -> Expr {
        match e.node() {
            Node::Call(c) => {
                let args: Vec<Expr> = c.args.iter().map(|a| self.inline(a)).collect();
                match self.fns.get(&*c.name).and_then(|f| f.as_expr_fn()) {
                    Some(def) => {
                        let map = args.into_iter().enumerate().map(|(i, a)| (Sym::Arg(i), a)).collect();
                        self.inline(&def.derivative(&c.order).subst(&map))
                    }
                    None => Expr::call(&c.name, c.order.clone(), args),
                }
            }
            _ => e.map_children(|c| self.inline(c)),
        }
    }

    /// Closed-form definitions, for serialization.
    pub fn definitions(&self) -> BTreeMap<String, FnDef> {
        self.fns
            .iter()
            .filter_map(|(k, f)| f.as_expr_fn().map(|d| (k.clone(), d.definition())))
            .collect()
    }

    /// Parse a table of definitions; bodies may call each other but not
    /// recursively.
    pub fn from_definitions(defs: &BTreeMap<String, FnDef>) -> Result<FnTable, ParseError> {
        let arities: BTreeMap<String, usize> = defs.iter().map(|(k, d)| (k.clone(), d.args.len())).collect();
        let mut table = FnTable::new();
        let mut calls: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (name, def) in defs {
            let ctx = ParseContext {
                params: None,
                functions: Some(arities.clone()),
                args: def.args.clone(),
            };
            let body = parse_with(&def.body, &ctx)?;
            calls.insert(name.clone(), body.functions());
            table.insert(name, ExprFn::new(def.args.clone(), body));
        }
        for name in defs.keys() {
            let mut seen = BTreeSet::new();
            let mut stack = vec![name.clone()];
            while let Some(n) = stack.pop() {
                for m in calls.get(&n).into_iter().flatten() {
                    if m == name {
                        return Err(ParseError::Syntax {
                            offset: 0,
                            message: format!("function `{name}` is defined recursively"),
                        });
                    }
                    if seen.insert(m.clone()) {
                        stack.push(m.clone());
                    }
                }
            }
        }
        Ok(table)
    }
}

fn domain(op: &str, e: &Expr) -> EvalError {
    let mut subtree = e.to_string();
    if subtree.len() > 80 {
        let cut = (0..=77).rev().find(|&i| subtree.is_char_boundary(i)).unwrap_or(0);
        subtree.truncate(cut);
        subtree.push_str("...");
    }
    EvalError::Domain { op: op.to_string(), subtree }
}

fn eval_node(e: &Expr, pt: &Point, args: &[f64], fns: &FnTable, scale: &mut f64) -> Result<f64, EvalError> {
    let v = match e.node() {
        Node::Const(c) => *c,
        Node::Sym(Sym::Arg(i)) => *args.get(*i).ok_or_else(|| EvalError::Unbound(format!("${i}")))?,
        Node::Sym(s) => pt.get(s).ok_or_else(|| EvalError::Unbound(s.name()))?,
        Node::Add(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_node(x, pt, args, fns, scale)?;
            }
            acc
        }
        Node::Mul(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_node(x, pt, args, fns, scale)?;
            }
            acc
        }
        Node::Neg(x) => -eval_node(x, pt, args, fns, scale)?,
        Node::Pow(b, r) => {
            let base = eval_node(b, pt, args, fns, scale)?;
            let (n, d) = (*r.numer(), *r.denom());
            if base == 0.0 && n < 0 {
                return Err(domain("division by zero", e));
            }
            if d == 1 {
                base.powi(n as i32)
            } else if base < 0.0 {
                if d % 2 == 0 {
                    return Err(domain("even root of a negative number", e));
                }
                let m = (-base).powf(n as f64 / d as f64);
                if n % 2 == 0 {
                    m
                } else {
                    -m
                }
            } else {
                base.powf(n as f64 / d as f64)
            }
        }
        Node::Func(f, x) => {
            let a = eval_node(x, pt, args, fns, scale)?;
            match f {
                Builtin::Exp => a.exp(),
                Builtin::Log if a <= 0.0 => return Err(domain("log", e)),
                Builtin::Log => a.ln(),
                Builtin::Sin => a.sin(),
                Builtin::Cos => a.cos(),
                Builtin::Sinh => a.sinh(),
                Builtin::Cosh => a.cosh(),
            }
        }
        Node::Call(c) => {
            let f = fns.get(&c.name).ok_or_else(|| EvalError::UnboundFunction(c.name.to_string()))?;
            if f.arity() != c.args.len() {
                return Err(EvalError::Arity {
                    name: c.name.to_string(),
                    expected: f.arity(),
                    got: c.args.len(),
                });
            }
            let mut vals = Vec::with_capacity(c.args.len());
            for a in &c.args {
                vals.push(eval_node(a, pt, args, fns, scale)?);
            }
            f.eval(&c.order, &vals, pt, fns)?
        }
    };
    if !v.is_finite() {
        return Err(domain("non-finite value", e));
    }
    *scale = scale.max(v.abs());
    Ok(v)
}

impl Expr {
    pub fn eval(&self, pt: &Point, fns: &FnTable) -> Result<f64, EvalError> {
        let mut scale = 0.0;
        eval_node(self, pt, &[], fns, &mut scale)
    }

    /// Value together with the largest magnitude of any intermediate node,
    /// the reference scale for relative zero tests.
    pub fn eval_scaled(&self, pt: &Point, fns: &FnTable) -> Result<(f64, f64), EvalError> {
        let mut scale = 0.0;
        let v = eval_node(self, pt, &[], fns, &mut scale)?;
        Ok((v, scale))
    }

    /// Evaluate at `[u, ux, v, vx]` with no parameters.
    pub fn eval_at(&self, vars: [f64; 4], fns: &FnTable) -> Result<f64, EvalError> {
        self.eval(&Point { vars, params: BTreeMap::new() }, fns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn evaluates_variables_and_parameters() {
        let e = parse("a*u + ux*v^2 - vx").unwrap();
        let pt = Point::new(1.0, 2.0, 3.0, 4.0).with_params(&[("a".to_string(), 0.5)].into());
        assert_eq!(e.eval(&pt, &FnTable::new()).unwrap(), 0.5 + 18.0 - 4.0);
        assert_eq!(
            e.eval(&Point::new(1.0, 2.0, 3.0, 4.0), &FnTable::new()),
            Err(EvalError::Unbound("a".into()))
        );
    }

    #[test]
    fn domain_errors_name_the_subtree() {
        let fns = FnTable::new();
        let err = parse("log(u - 1)").unwrap().eval_at([0.5, 0.0, 0.0, 0.0], &fns).unwrap_err();
        assert!(matches!(err, EvalError::Domain { ref op, ref subtree } if op == "log" && subtree.contains("u")));
        assert!(parse("1/u").unwrap().eval_at([0.0; 4], &fns).unwrap_err().is_domain());
        assert!(parse("sqrt(u)").unwrap().eval_at([-1.0, 0.0, 0.0, 0.0], &fns).unwrap_err().is_domain());
        assert_eq!(parse("u^(1/3)").unwrap().eval_at([-8.0, 0.0, 0.0, 0.0], &fns).unwrap(), -2.0);
    }

    #[test]
    fn closed_form_functions_and_derivatives() {
        let mut fns = FnTable::new();
        fns.insert("phi", ExprFn::parse(&["s"], "s^3").unwrap());
        fns.insert("p", ExprFn::parse(&["x", "y"], "x^2*y").unwrap());
        let e = parse("phi''(u) + p[1,1](u, v) + p(ux, vx)").unwrap();
        let got = e.eval_at([2.0, 1.0, 5.0, 3.0], &fns).unwrap();
        assert_eq!(got, 12.0 + 4.0 + 3.0);
        let inlined = fns.inline(&e).simplify();
        assert!(inlined.functions().is_empty());
        assert_eq!(inlined.eval_at([2.0, 1.0, 5.0, 3.0], &FnTable::new()).unwrap(), got);
    }

    #[test]
    fn closure_functions() {
        let mut fns = FnTable::new();
        fns.insert("phi", ClosureFn::new("exp", f64::exp, f64::exp, f64::exp));
        let e = parse("phi'(u)").unwrap();
        assert_eq!(e.eval_at([0.0; 4], &fns).unwrap(), 1.0);
        assert!(matches!(
            parse("phi[3](u)").unwrap().eval_at([0.0; 4], &fns),
            Err(EvalError::Order { .. })
        ));
    }

    #[test]
    fn definitions_round_trip_and_reject_recursion() {
        let mut defs = BTreeMap::new();
        defs.insert("q".to_string(), FnDef { args: vec!["s".into()], body: "2*s + r(s)".into() });
        defs.insert("r".to_string(), FnDef { args: vec!["s".into()], body: "s^2".into() });
        let t = FnTable::from_definitions(&defs).unwrap();
        let back = FnTable::from_definitions(&t.definitions()).unwrap();
        let e = parse("q(u)").unwrap();
        assert_eq!(e.eval_at([3.0, 0.0, 0.0, 0.0], &back).unwrap(), 15.0);

        defs.insert("r".to_string(), FnDef { args: vec!["s".into()], body: "q(s)".into() });
        assert!(FnTable::from_definitions(&defs).is_err());
    }
}
