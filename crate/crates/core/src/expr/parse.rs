use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_rational::Rational64;
use thiserror::Error;

use super::{Builtin, Expr, Sym};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at byte {offset} is not a rational constant")]
    NonRationalExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonRationalExponent { offset } => *offset,
        }
    }
}

/// What identifiers a parse may bind.
///
/// `None` for `params`/`functions` accepts any name; `args` names bind to
/// positional arguments and shadow the jet variables.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub params: Option<BTreeSet<String>>,
    /// Known user functions and their arities.
    pub functions: Option<BTreeMap<String, usize>>,
    pub args: Vec<String>,
}

impl ParseContext {
    pub fn with_args(args: &[&str]) -> Self {
        ParseContext {
            args: args.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, &ParseContext::default())
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        ctx,
    };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Arg(usize),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{s}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if c == '$' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let k = text[start + 1..i].parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: "expected argument index after `$`".into(),
            })?;
            out.push((Tok::Arg(k), start));
        } else if "+-*/^(),'[]".contains(c) {
            out.push((Tok::Op(c), start));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                offset: start,
                message: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ParseError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(Expr::neg_of(self.term()?));
            } else {
                return Ok(Expr::add(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.recip());
            } else {
                return Ok(Expr::mul(factors));
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::neg_of(self.unary()?))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.offset();
        let exponent = self.unary()?.simplify();
        let r = exponent
            .as_const()
            .and_then(to_rational)
            .ok_or(ParseError::NonRationalExponent { offset: at })?;
        Ok(Expr::pow(base, r))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, at)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.syntax("unexpected end of input"));
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Tok::Arg(k) => {
                self.pos += 1;
                Ok(Expr::sym(Sym::Arg(k)))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                self.identifier(name, at)
            }
            Tok::Op(_) => Err(self.syntax("expected an operand")),
        }
    }

    fn identifier(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        if let Some(k) = self.ctx.args.iter().position(|a| *a == name) {
            return Ok(Expr::sym(Sym::Arg(k)));
        }
        let is_call = matches!(self.peek(), Some(Tok::Op('(' | '\'' | '[')));
        if is_call {
            if name == "sqrt" {
                return Ok(self.call_args(1)?.remove(0).sqrt());
            }
            if let Some(b) = Builtin::from_name(&name) {
                return Ok(Expr::func(b, self.call_args(1)?.remove(0)));
            }
            return self.user_call(name, at);
        }
        match name.as_str() {
            "u" => Ok(Expr::u()),
            "ux" => Ok(Expr::ux()),
            "v" => Ok(Expr::v()),
            "vx" => Ok(Expr::vx()),
            "pi" => Ok(Expr::constant(PI)),
            _ => {
                let known = match &self.ctx.params {
                    Some(ps) => ps.contains(&name),
                    None => Builtin::from_name(&name).is_none() && name != "sqrt",
                };
                if known {
                    Ok(Expr::param(&name))
                } else {
                    Err(ParseError::UnknownIdentifier { offset: at, name })
                }
            }
        }
    }

    fn call_args(&mut self, arity: usize) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != arity {
            return Err(self.syntax(&format!("expected {arity} argument(s), found {}", args.len())));
        }
        Ok(args)
    }

    fn user_call(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        let mut primes = 0u32;
        while self.eat('\'') {
            primes += 1;
        }
        let mut index: Option<Vec<u32>> = None;
        if primes == 0 && self.eat('[') {
            let mut ks = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Num(k)) if k.fract() == 0.0 && *k >= 0.0 => {
                        ks.push(*k as u32);
                        self.pos += 1;
                    }
                    _ => return Err(self.syntax("expected a derivative order")),
                }
                if !self.eat(',') {
                    break;
                }
            }
            self.expect(']')?;
            index = Some(ks);
        }
        let arity = match (&self.ctx.functions, &index) {
            (Some(fs), _) => *fs
                .get(&name)
                .ok_or_else(|| ParseError::UnknownIdentifier { offset: at, name: name.clone() })?,
            (None, Some(ks)) => ks.len(),
            (None, None) => {
                // count arguments without consuming them
                let save = self.pos;
                self.expect('(')?;
                let mut n = 1;
                self.expr()?;
                while self.eat(',') {
                    self.expr()?;
                    n += 1;
                }
                self.pos = save;
                n
            }
        };
        let order = match index {
            Some(ks) if ks.len() == arity => ks,
            Some(_) => return Err(self.syntax("derivative index length does not match arity")),
            None if primes > 0 && arity != 1 => {
                return Err(self.syntax("primes are only allowed on unary functions"))
            }
            None if primes > 0 => vec![primes],
            None => vec![0; arity],
        };
        let args = self.call_args(arity)?;
        Ok(Expr::call(&name, order, args))
    }
}

/// Exact rational for `c` with denominator at most 1000, if there is one.
fn to_rational(c: f64) -> Option<Rational64> {
    if !c.is_finite() {
        return None;
    }
    for d in 1..=1000i64 {
        let n = (c * d as f64).round();
        if (n / d as f64 - c).abs() <= 1e-12 * c.abs().max(1.0) && n.abs() < 1e15 {
            return Some(Rational64::new(n as i64, d));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_offsets_point_at_the_problem() {
        let e = parse("2*u*(").unwrap_err();
        assert_eq!(e.offset(), 5);
        let e = parse("u + ?").unwrap_err();
        assert_eq!(e.offset(), 4);
        let e = parse("u^v").unwrap_err();
        assert_eq!(e, ParseError::NonRationalExponent { offset: 2 });
    }

    #[test]
    fn restricted_parameters_are_enforced() {
        let ctx = ParseContext {
            params: Some(["eta".to_string()].into_iter().collect()),
            ..Default::default()
        };
        assert!(parse_with("eta*u", &ctx).is_ok());
        assert!(matches!(
            parse_with("nu*u", &ctx),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
    }

    #[test]
    fn arguments_shadow_variables() {
        let ctx = ParseContext::with_args(&["u", "s"]);
        let e = parse_with("u*s + v", &ctx).unwrap();
        assert!(e.symbols().contains(&Sym::Arg(0)));
        assert!(e.symbols().contains(&Sym::Arg(1)));
        assert!(!e.symbols().contains(&Sym::U));
    }

    #[test]
    fn calls_and_builtins() {
        let e = parse("p[1,0](u, v) + phi'(ux) + exp(-v)").unwrap();
        assert_eq!(e.functions().len(), 2);
        assert!(parse("phi'(u, v)").is_err());
        assert!(parse("exp(u, v)").is_err());
        assert_eq!(parse("2^3").unwrap().simplify().as_const(), Some(8.0));
        assert_eq!(parse("4^(1/2)").unwrap().simplify().as_const(), Some(2.0));
        assert_eq!(parse("1.5e2").unwrap().as_const(), Some(150.0));
    }
}
