//! Numerical transport of `Psi_x = A Psi`, `Psi_t = B Psi` along lattice
//! paths of a solution grid.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::{Algebra, LinearError, LinearPair};
use crate::expr::{EvalError, Expr, FnTable, Point, Sym};
use crate::frames::{Context, Delta};
use crate::goursat::SolutionGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("path leaves the {nx}x{nt} grid at node ({i}, {j})")]
    OutsideGrid { i: i64, j: i64, nx: usize, nt: usize },
    #[error("bad move `{0}`: expected x+, x-, t+ or t-, optionally followed by a count")]
    BadMove(String),
    #[error("bad loop `{0}`: expected x0,t0:x1,t1")]
    BadLoop(String),
}

/// One lattice edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    XPlus,
    XMinus,
    TPlus,
    TMinus,
}

impl Move {
    fn offset(self) -> (i64, i64) {
        match self {
            Move::XPlus => (1, 0),
            Move::XMinus => (-1, 0),
            Move::TPlus => (0, 1),
            Move::TMinus => (0, -1),
        }
    }

    /// Parse a whitespace or comma separated list such as `x+4 t+ x-4 t-`.
    pub fn parse_list(text: &str) -> Result<Vec<Move>, PathError> {
        let mut out = Vec::new();
        for tok in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let bad = || PathError::BadMove(tok.to_string());
            let (head, count) = tok.split_at(tok.len().min(2));
            let m: Move = head.parse().map_err(|_| bad())?;
            let n = if count.is_empty() { 1 } else { count.parse::<usize>().map_err(|_| bad())? };
            out.extend(std::iter::repeat_n(m, n));
        }
        Ok(out)
    }
}

impl FromStr for Move {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Move, PathError> {
        match s {
            "x+" => Ok(Move::XPlus),
            "x-" => Ok(Move::XMinus),
            "t+" => Ok(Move::TPlus),
            "t-" => Ok(Move::TMinus),
            _ => Err(PathError::BadMove(s.to_string())),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::XPlus => "x+",
            Move::XMinus => "x-",
            Move::TPlus => "t+",
            Move::TMinus => "t-",
        })
    }
}

/// Moves from `from` to `to`, along `x` first and then along `t`.
pub fn lattice_path(from: (usize, usize), to: (usize, usize)) -> Vec<Move> {
    let dx = to.0 as i64 - from.0 as i64;
    let dt = to.1 as i64 - from.1 as i64;
    let xs = std::iter::repeat_n(if dx > 0 { Move::XPlus } else { Move::XMinus }, dx.unsigned_abs() as usize);
    let ts = std::iter::repeat_n(if dt > 0 { Move::TPlus } else { Move::TMinus }, dt.unsigned_abs() as usize);
    xs.chain(ts).collect()
}

fn node_of(sol: &SolutionGrid, x: f64, t: f64) -> Result<(usize, usize), PathError> {
    let i = (x / sol.hx).round() as i64;
    let j = (t / sol.ht).round() as i64;
    if i < 0 || j < 0 || i >= sol.nx as i64 || j >= sol.nt as i64 {
        return Err(PathError::OutsideGrid { i, j, nx: sol.nx, nt: sol.nt });
    }
    Ok((i as usize, j as usize))
}

/// Counter-clockwise boundary of the rectangle with corners `(x0,t0)` and
/// `(x1,t1)` in physical coordinates, snapped to the nearest nodes.
pub fn holonomy_loop(
    sol: &SolutionGrid,
    corner0: (f64, f64),
    corner1: (f64, f64),
) -> Result<((usize, usize), Vec<Move>), PathError> {
    let a = node_of(sol, corner0.0, corner0.1)?;
    let b = node_of(sol, corner1.0, corner1.1)?;
    let mut moves = lattice_path(a, (b.0, a.1));
    moves.extend(lattice_path((b.0, a.1), b));
    moves.extend(lattice_path(b, (a.0, b.1)));
    moves.extend(lattice_path((a.0, b.1), a));
    Ok((a, moves))
}

/// Parse `x0,t0:x1,t1`.
pub fn parse_loop(text: &str) -> Result<((f64, f64), (f64, f64)), PathError> {
    let bad = || PathError::BadLoop(text.to_string());
    let corner = |s: &str| -> Result<(f64, f64), PathError> {
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
    };
    let (p, q) = text.split_once(':').ok_or_else(bad)?;
    Ok((corner(p)?, corner(q)?))
}

type CMat = Vec<Complex64>;

/// Matrices of a linear pair with parameters bound, ready for evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPair {
    pub algebra: Algebra,
    pub delta: Delta,
    n: usize,
    a: Vec<(Expr, Expr)>,
    b: Vec<(Expr, Expr)>,
    fns: FnTable,
}

impl CompiledPair {
    pub fn new(lp: &LinearPair, ctx: &Context) -> Result<CompiledPair, LinearError> {
        let flat = |m: &super::Matrix| -> Vec<(Expr, Expr)> {
            m.iter().flatten().map(|e| (ctx.prepare(&e.re), ctx.prepare(&e.im))).collect()
        };
        let (a, b) = (flat(&lp.a), flat(&lp.b));
        for (re, im) in a.iter().chain(&b) {
            for e in [re, im] {
                if let Some(Sym::Param(p)) = e.symbols().into_iter().find(|s| matches!(s, Sym::Param(_))) {
                    return Err(LinearError::FreeParameter(p.to_string()));
                }
            }
        }
        Ok(CompiledPair { algebra: lp.algebra, delta: lp.delta, n: lp.dim(), a, b, fns: ctx.fns.clone() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, m: &[(Expr, Expr)], state: [f64; 4]) -> Result<CMat, EvalError> {
        let p = Point { vars: state, ..Point::default() };
        m.iter()
            .map(|(re, im)| Ok(Complex64::new(re.eval(&p, &self.fns)?, im.eval(&p, &self.fns)?)))
            .collect()
    }
}

fn matmul(n: usize, x: &[Complex64], y: &[Complex64]) -> CMat {
    let mut out = vec![Complex64::default(); n * n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i * n + k];
            for j in 0..n {
                out[i * n + j] += xik * y[k * n + j];
            }
        }
    }
    out
}

fn axpy(y: &[Complex64], a: f64, x: &[Complex64]) -> CMat {
    y.iter().zip(x).map(|(y, x)| y + x * a).collect()
}

/// One classic fourth-order step of `Phi' = M(s) Phi` over a step of signed
/// length `h`, with `M` sampled at the start, midpoint and end.
fn rk4(n: usize, phi: &[Complex64], m: [&[Complex64]; 3], h: f64) -> CMat {
    let k1 = matmul(n, m[0], phi);
    let k2 = matmul(n, m[1], &axpy(phi, 0.5 * h, &k1));
    let k3 = matmul(n, m[1], &axpy(phi, 0.5 * h, &k2));
    let k4 = matmul(n, m[2], &axpy(phi, h, &k3));
    (0..n * n)
        .map(|k| phi[k] + (k1[k] + (k2[k] + k3[k]) * 2.0 + k4[k]) * (h / 6.0))
        .collect()
}

fn det(n: usize, m: &[Complex64]) -> Complex64 {
    match n {
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
    }
}

/// Quantity the flow preserves, as a deviation from its initial value:
/// `det Phi - 1` for sl2, `|Phi psi0|^2 - |psi0|^2` for su2, and
/// `max |Phi^T J Phi - J|` for the 3x3 forms.
fn invariant_drift(cp: &CompiledPair, phi: &[Complex64], psi0: &[Complex64]) -> f64 {
    let n = cp.n;
    match cp.algebra {
        Algebra::Sl2 => (det(n, phi) - 1.0).norm(),
        Algebra::Su2 => {
            let psi = apply(n, phi, psi0);
            let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            (norm(&psi) - norm(psi0)).abs()
        }
        Algebra::So21 | Algebra::So3 => {
            let d = cp.delta.sign();
            let j = [1.0, -d, -d];
            let mut worst: f64 = 0.0;
            for r in 0..n {
                for c in 0..n {
                    let q: f64 = (0..n).map(|k| phi[k * n + r].re * j[k] * phi[k * n + c].re).sum();
                    let target = if r == c { j[r] } else { 0.0 };
                    worst = worst.max((q - target).abs());
                }
            }
            worst
        }
    }
}

fn apply(n: usize, m: &[Complex64], v: &[Complex64]) -> CMat {
    (0..n).map(|i| (0..n).map(|k| m[i * n + k] * v[k]).sum()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportSummary {
    pub algebra: Algebra,
    pub steps: usize,
    pub path_length: f64,
    /// Largest deviation of the conserved quantity along the path.
    pub max_drift: f64,
    pub drift_per_length: f64,
    pub closed: bool,
    /// `|Psi_end - Psi_start| / |Psi_start|` on a closed path.
    pub holonomy_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportTrace {
    pub rows: Vec<TraceRow>,
    pub summary: TransportSummary,
}

impl TransportTrace {
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.psi.len());
        let complex = self.summary.algebra == Algebra::Su2;
        let mut out = String::from("step,i,j,x,t");
        for k in 1..=n {
            if complex {
                let _ = write!(out, ",psi{k}_re,psi{k}_im");
            } else {
                let _ = write!(out, ",psi{k}");
            }
        }
        out.push_str(",drift,holonomy_deviation\n");
        let start = self.rows.first().map(|r| r.psi.clone()).unwrap_or_default();
        let start_norm = start.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{},{}", r.step, r.i, r.j, r.x, r.t);
            for z in &r.psi {
                if complex {
                    let _ = write!(out, ",{},{}", z.re, z.im);
                } else {
                    let _ = write!(out, ",{}", z.re);
                }
            }
            let dev = r.psi.iter().zip(&start).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / start_norm;
            let _ = writeln!(out, ",{},{}", r.drift, dev);
        }
        out
    }
}

/// Integrate the fundamental solution from the identity along `moves`,
/// using `A` on x-edges and `B` on t-edges; coefficients come from the grid
/// nodes at the edge ends and their average at the midpoint. The trace
/// records `Psi = Phi psi0`.
pub fn transport(
    cp: &CompiledPair,
    sol: &SolutionGrid,
    start: (usize, usize),
    moves: &[Move],
    psi0: &[Complex64],
) -> Result<TransportTrace, LinearError> {
    let n = cp.n;
    assert_eq!(psi0.len(), n, "initial state has the wrong dimension");
    let eval_err = |e: EvalError| LinearError::Eval(e);
    let mut phi: CMat = (0..n * n).map(|k| if k / n == k % n { Complex64::new(1.0, 0.0) } else { Complex64::default() }).collect();
    let (mut i, mut j) = (start.0 as i64, start.1 as i64);
    let inside = |i: i64, j: i64| i >= 0 && j >= 0 && i < sol.nx as i64 && j < sol.nt as i64;
    if !inside(i, j) {
        return Err(PathError::OutsideGrid { i, j, nx: sol.nx, nt: sol.nt }.into());
    }
    let row = |step: usize, i: usize, j: usize, phi: &[Complex64]| TraceRow {
        step,
        i,
        j,
        x: sol.x(i),
        t: sol.t(j),
        psi: apply(n, phi, psi0),
        drift: invariant_drift(cp, phi, psi0),
    };
    let mut rows = vec![row(0, i as usize, j as usize, &phi)];
    let mut length = 0.0;
    let mut max_drift: f64 = 0.0;
    for (k, m) in moves.iter().enumerate() {
        let (di, dj) = m.offset();
        let (ni, nj) = (i + di, j + dj);
        if !inside(ni, nj) {
            return Err(PathError::OutsideGrid { i: ni, j: nj, nx: sol.nx, nt: sol.nt }.into());
        }
        let s0 = sol.state(i as usize, j as usize);
        let s1 = sol.state(ni as usize, nj as usize);
        let mid: [f64; 4] = std::array::from_fn(|c| 0.5 * (s0[c] + s1[c]));
        let (mat, h) = if dj == 0 { (&cp.a, di as f64 * sol.hx) } else { (&cp.b, dj as f64 * sol.ht) };
        let ms = [
            cp.eval(mat, s0).map_err(eval_err)?,
            cp.eval(mat, mid).map_err(eval_err)?,
            cp.eval(mat, s1).map_err(eval_err)?,
        ];
        phi = rk4(n, &phi, [&ms[0], &ms[1], &ms[2]], h);
        length += h.abs();
        (i, j) = (ni, nj);
        let r = row(k + 1, i as usize, j as usize, &phi);
        max_drift = max_drift.max(r.drift);
        rows.push(r);
    }
    let closed = (i as usize, j as usize) == start && !moves.is_empty();
    let holonomy_deviation = closed.then(|| {
        let end = &rows.last().unwrap().psi;
        let diff: f64 = end.iter().zip(psi0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        diff / psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    });
    let summary = TransportSummary {
        algebra: cp.algebra,
        steps: moves.len(),
        path_length: length,
        max_drift,
        drift_per_length: if length > 0.0 { max_drift / length } else { 0.0 },
        closed,
        holonomy_deviation,
    };
    Ok(TransportTrace { rows, summary })
}

/// First basis vector, the default initial state.
pub fn unit_state(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Overrides};
    use crate::config::Tolerances;
    use crate::frames::Frame;
    use crate::goursat::{solve, GoursatData};
    use crate::linear::{build, Form};

    fn plr_setup(n: usize) -> (CompiledPair, SolutionGrid) {
        let e = catalog::entry("plr").unwrap();
        let (sys, fr) = e.instantiate(&Overrides::default()).unwrap();
        let tol = Tolerances::default();
        let sol = solve(&sys, &GoursatData::parse(e.data).unwrap(), n, n, &tol).unwrap();
        let ctx = sys.context(&tol).unwrap();
        let cp = CompiledPair::new(&build(&fr, sys.delta, Form::TwoByTwo), &ctx).unwrap();
        (cp, sol)
    }

    #[test]
    fn moves_parse_with_counts() {
        let m = Move::parse_list("x+2, t+ x-2 t-").unwrap();
        assert_eq!(m, vec![Move::XPlus, Move::XPlus, Move::TPlus, Move::XMinus, Move::XMinus, Move::TMinus]);
        assert!(Move::parse_list("y+").is_err());
        assert!(Move::parse_list("x+z").is_err());
    }

    #[test]
    fn lattice_path_goes_x_then_t() {
        assert_eq!(lattice_path((2, 1), (0, 2)), vec![Move::XMinus, Move::XMinus, Move::TPlus]);
        assert!(lattice_path((3, 3), (3, 3)).is_empty());
    }

    #[test]
    fn zero_pair_keeps_state_constant() {
        let sys = crate::frames::SystemSpec::parse("zero", Delta::Pss, "0", "0").unwrap();
        let tol = Tolerances::default();
        let sol = solve(&sys, &GoursatData::parse(["x", "0", "0", "t"]).unwrap(), 9, 9, &tol).unwrap();
        let cp = CompiledPair::new(&build(&Frame::zero(), Delta::Pss, Form::TwoByTwo), &Context::new(&tol)).unwrap();
        let (start, moves) = holonomy_loop(&sol, (0.0, 0.0), (1.0, 1.0)).unwrap();
        let tr = transport(&cp, &sol, start, &moves, &unit_state(2)).unwrap();
        assert!(tr.rows.iter().all(|r| r.psi == unit_state(2)));
        assert_eq!(tr.summary.holonomy_deviation, Some(0.0));
        assert_eq!(tr.summary.path_length, 4.0);
    }

    #[test]
    fn path_leaving_the_grid_is_an_error() {
        let (cp, sol) = plr_setup(9);
        let r = transport(&cp, &sol, (0, 0), &[Move::XMinus], &unit_state(2));
        assert!(matches!(r, Err(LinearError::Path(PathError::OutsideGrid { i: -1, .. }))));
        assert!(holonomy_loop(&sol, (0.0, 0.0), (1.5, 1.0)).is_err());
    }

    #[test]
    fn plr_holonomy_shrinks_at_second_order() {
        let dev = |n| {
            let (cp, sol) = plr_setup(n);
            let (s, m) = holonomy_loop(&sol, (0.0, 0.0), (1.0, 1.0)).unwrap();
            transport(&cp, &sol, s, &m, &unit_state(2)).unwrap().summary.holonomy_deviation.unwrap()
        };
        let (a, b) = (dev(33), dev(65));
        let order = (a / b).log2();
        assert!(order > 1.8 && order < 2.5, "{a} {b} {order}");
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let (cp, sol) = plr_setup(9);
        let tr = transport(&cp, &sol, (0, 0), &lattice_path((0, 0), (3, 2)), &unit_state(2)).unwrap();
        let csv = tr.to_csv();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.starts_with("step,i,j,x,t,psi1,psi2,drift,holonomy_deviation\n"));
        assert!(!tr.summary.closed);
    }
}
