use std::fmt::{self, Write};

use num_rational::Rational64;

use super::{Expr, Node, Sym, MAX_USER_DERIVATIVE};

// binding strength of the printed form of a node
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

struct Printer<'a> {
    args: &'a [String],
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 => PREC_NEG,
        Node::Const(_) | Node::Sym(_) | Node::Func(..) | Node::Call(_) => PREC_ATOM,
        Node::Add(_) => PREC_ADD,
        Node::Mul(fs) => match fs[0].as_const() {
            Some(c) if c < 0.0 => PREC_NEG,
            _ => PREC_MUL,
        },
        Node::Neg(_) => PREC_NEG,
        Node::Pow(..) => PREC_POW,
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn write_number(out: &mut String, c: f64) {
    if c.is_finite() && c.fract() == 0.0 && c.abs() < 1e16 {
        write!(out, "{}", c as i64).unwrap();
    } else {
        write!(out, "{c}").unwrap();
    }
}

fn write_rational(out: &mut String, r: Rational64) {
    if r.is_integer() && *r.numer() >= 0 {
        write!(out, "{}", r.numer()).unwrap();
    } else if r.is_integer() {
        write!(out, "({})", r.numer()).unwrap();
    } else {
        write!(out, "({}/{})", r.numer(), r.denom()).unwrap();
    }
}

/// Coefficient-negated copy of a term whose printed form starts with `-`.
fn negated_term(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Const(c) if *c < 0.0 => Some(Expr::constant(-c)),
        Node::Mul(fs) => match fs[0].as_const() {
            Some(c) if c < 0.0 => {
                let mut rest = fs[1..].to_vec();
                if c != -1.0 {
                    rest.insert(0, Expr::constant(-c));
                }
                Some(Expr::mul(rest))
            }
            _ => None,
        },
        Node::Neg(x) => Some(x.clone()),
        _ => None,
    }
}

impl Printer<'_> {
    fn wrapped(&self, out: &mut String, e: &Expr, min_prec: u8) {
        if precedence(e) < min_prec {
            out.push('(');
            self.write(out, e);
            out.push(')');
        } else {
            self.write(out, e);
        }
    }

    fn write(&self, out: &mut String, e: &Expr) {
        match e.node() {
            Node::Const(c) => write_number(out, *c),
            Node::Sym(Sym::Arg(i)) if *i < self.args.len() => out.push_str(&self.args[*i]),
            Node::Sym(s) => out.push_str(&s.name()),
            Node::Add(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    match (k, negated_term(t)) {
                        (0, _) => self.wrapped(out, t, PREC_ADD + 1),
                        (_, Some(n)) => {
                            out.push_str(" - ");
                            self.wrapped(out, &n, PREC_ADD + 1);
                        }
                        (_, None) => {
                            out.push_str(" + ");
                            self.wrapped(out, t, PREC_ADD + 1);
                        }
                    }
                }
            }
            Node::Mul(fs) => {
                let mut rest: &[Expr] = fs;
                if let Some(c) = fs[0].as_const() {
                    if c == -1.0 && fs.len() > 1 {
                        out.push('-');
                        rest = &fs[1..];
                    } else if c < 0.0 && fs.len() > 1 {
                        out.push('-');
                        write_number(out, -c);
                        out.push('*');
                        rest = &fs[1..];
                    }
                }
                for (k, f) in rest.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    self.wrapped(out, f, PREC_MUL + 1);
                }
            }
            Node::Neg(x) => {
                out.push('-');
                self.wrapped(out, x, PREC_MUL + 1);
            }
            Node::Pow(b, r) => {
                self.wrapped(out, b, PREC_ATOM);
                out.push('^');
                write_rational(out, *r);
            }
            Node::Func(f, x) => {
                out.push_str(f.name());
                out.push('(');
                self.write(out, x);
                out.push(')');
            }
            Node::Call(c) => {
                out.push_str(&c.name);
                if c.order.len() == 1 && c.order[0] <= MAX_USER_DERIVATIVE {
                    for _ in 0..c.order[0] {
                        out.push('\'');
                    }
                } else if c.order.iter().any(|&k| k > 0) {
                    out.push('[');
                    for (k, o) in c.order.iter().enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        write!(out, "{o}").unwrap();
                    }
                    out.push(']');
                }
                out.push('(');
                for (k, a) in c.args.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    self.write(out, a);
                }
                out.push(')');
            }
        }
    }
}

impl Expr {
    /// Print with positional arguments `$i` shown as `args[i]`.
    pub fn to_string_with_args(&self, args: &[String]) -> String {
        let mut out = String::new();
        Printer { args }.write(&mut out, self);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        Printer { args: &[] }.write(&mut out, self);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    fn p(text: &str) -> String {
        parse(text).unwrap().simplify().to_string()
    }

    #[test]
    fn signs_and_powers() {
        assert_eq!(p("-2*u"), "-2*u");
        assert_eq!(p("u - v"), "u - v");
        assert_eq!(p("1/u"), "u^(-1)");
        assert_eq!(p("sqrt(u)"), "u^(1/2)");
        assert_eq!(p("-(u*v)"), "-u*v");
    }

    #[test]
    fn primes_and_multi_indices() {
        assert_eq!(p("phi''(u)"), "phi''(u)");
        assert_eq!(Expr::call("p", vec![1, 0], vec![Expr::u(), Expr::v()]).to_string(), "p[1,0](u, v)");
        assert_eq!(Expr::call("p", vec![0, 0], vec![Expr::u(), Expr::v()]).to_string(), "p(u, v)");
    }

    #[test]
    fn round_trip_of_awkward_constants() {
        for t in ["0.1*u + 1e-7", "-3.5*ux^2 - 1e300", "u^(-3)*(u + v)^(-1)"] {
            let e = parse(t).unwrap().simplify();
            assert_eq!(parse(&e.to_string()).unwrap().simplify(), e, "{t}");
        }
    }
}
