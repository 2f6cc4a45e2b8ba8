use std::thread;

use serde::Serialize;

use super::{require_bound, solve, GoursatData, GoursatError, Rhs, SolutionGrid};
use crate::config::Tolerances;
use crate::expr::{Expr, FnTable, Point};
use crate::frames::{metric, Frame, SystemSpec};

/// Frame entries evaluated at every node, `vals[i][j][node]`.
struct FrameField {
    vals: [[Vec<f64>; 2]; 3],
}

fn eval_on_grid(exprs: &[Expr], fns: &FnTable, sol: &SolutionGrid) -> Result<Vec<Vec<f64>>, GoursatError> {
    let mut out = vec![Vec::with_capacity(sol.u.len()); exprs.len()];
    for j in 0..sol.nt {
        for i in 0..sol.nx {
            let p = Point { vars: sol.state(i, j), ..Point::default() };
            for (e, col) in exprs.iter().zip(out.iter_mut()) {
                col.push(e.eval(&p, fns).map_err(|source| GoursatError::Eval { i, j, source })?);
            }
        }
    }
    Ok(out)
}

impl FrameField {
    fn new(sys: &SystemSpec, fr: &Frame, sol: &SolutionGrid, tol: &Tolerances) -> Result<FrameField, GoursatError> {
        let ctx = sys.context(tol)?;
        let prepared = ctx.prepare_frame(fr);
        let exprs: Vec<Expr> = prepared.entries().map(|(_, _, e)| e.clone()).collect();
        require_bound(&exprs.iter().collect::<Vec<_>>())?;
        let mut cols = eval_on_grid(&exprs, &ctx.fns, sol)?.into_iter();
        let mut next = || cols.next().unwrap();
        Ok(FrameField {
            vals: [[next(), next()], [next(), next()], [next(), next()]],
        })
    }
}

/// Centered differences of a node field.
struct Diff<'a> {
    sol: &'a SolutionGrid,
}

impl Diff<'_> {
    fn x(&self, f: &[f64], i: usize, j: usize) -> f64 {
        (f[self.sol.idx(i + 1, j)] - f[self.sol.idx(i - 1, j)]) / (2.0 * self.sol.hx)
    }

    fn t(&self, f: &[f64], i: usize, j: usize) -> f64 {
        (f[self.sol.idx(i, j + 1)] - f[self.sol.idx(i, j - 1)]) / (2.0 * self.sol.ht)
    }

    fn xx(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let s = self.sol;
        (f[s.idx(i + 1, j)] - 2.0 * f[s.idx(i, j)] + f[s.idx(i - 1, j)]) / (s.hx * s.hx)
    }

    fn tt(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let s = self.sol;
        (f[s.idx(i, j + 1)] - 2.0 * f[s.idx(i, j)] + f[s.idx(i, j - 1)]) / (s.ht * s.ht)
    }

    fn xt(&self, f: &[f64], i: usize, j: usize) -> f64 {
        let s = self.sol;
        (f[s.idx(i + 1, j + 1)] - f[s.idx(i + 1, j - 1)] - f[s.idx(i - 1, j + 1)] + f[s.idx(i - 1, j - 1)])
            / (4.0 * s.hx * s.ht)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PdeResidual {
    /// Max interior `|D_t u_x - F|` and `|D_t v_x - G|`.
    pub max: f64,
    /// Max interior `|D_x u - u_x|` and `|D_x v - v_x|`.
    pub consistency: f64,
}

/// Discrete residual of the PDE and of the stored first derivatives, by
/// centered differences at interior nodes.
pub fn pde_residual(sys: &SystemSpec, sol: &SolutionGrid, tol: &Tolerances) -> Result<PdeResidual, GoursatError> {
    let rhs = Rhs::new(sys, tol)?;
    let d = Diff { sol };
    let mut out = PdeResidual { max: 0.0, consistency: 0.0 };
    for (i, j) in sol.interior() {
        let fg = rhs.eval(sol.state(i, j)).map_err(|source| GoursatError::Eval { i, j, source })?;
        let k = sol.idx(i, j);
        out.max = out.max.max((d.t(&sol.ux, i, j) - fg[0]).abs()).max((d.t(&sol.vx, i, j) - fg[1]).abs());
        out.consistency = out
            .consistency
            .max((d.x(&sol.u, i, j) - sol.ux[k]).abs())
            .max((d.x(&sol.v, i, j) - sol.vx[k]).abs());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormsResidual {
    /// Residual fields of the three local structure equations; `NaN` on the
    /// boundary ring.
    pub fields: [Vec<f64>; 3],
    pub max: [f64; 3],
}

/// `D_x f_i2 - D_t f_i1` minus the wedge terms of the structure equations,
/// evaluated on the numerical solution.
pub fn forms_residual(
    sys: &SystemSpec,
    fr: &Frame,
    sol: &SolutionGrid,
    tol: &Tolerances,
) -> Result<FormsResidual, GoursatError> {
    let ff = FrameField::new(sys, fr, sol, tol)?;
    let f = &ff.vals;
    let delta = sys.delta.sign();
    let d = Diff { sol };
    let n = sol.u.len();
    let mut fields = [vec![f64::NAN; n], vec![f64::NAN; n], vec![f64::NAN; n]];
    let mut max = [0.0f64; 3];
    for (i, j) in sol.interior() {
        let k = sol.idx(i, j);
        let e = |a: usize, b: usize| f[a][b][k];
        let wedge = [
            e(2, 0) * e(1, 1) - e(2, 1) * e(1, 0),
            e(0, 0) * e(2, 1) - e(0, 1) * e(2, 0),
            delta * (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)),
        ];
        for r in 0..3 {
            let val = d.x(&f[r][1], i, j) - d.t(&f[r][0], i, j) - wedge[r];
            fields[r][k] = val;
            max[r] = max[r].max(val.abs());
        }
    }
    Ok(FormsResidual { fields, max })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    /// Gaussian curvature at interior nodes with a nondegenerate metric.
    pub k: Vec<Option<f64>>,
    pub interior: usize,
    /// Interior nodes excluded because `det g` is below the threshold.
    pub degenerate: usize,
}

impl CurvatureField {
    pub fn degenerate_fraction(&self) -> f64 {
        if self.interior == 0 {
            0.0
        } else {
            self.degenerate as f64 / self.interior as f64
        }
    }

    /// Max `|K - target|` over the evaluated nodes.
    pub fn max_deviation(&self, target: f64) -> Option<f64> {
        self.k.iter().flatten().map(|k| (k - target).abs()).reduce(f64::max)
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Brioschi curvature of the metric `omega_1^2 + omega_2^2` on the numerical
/// solution, with centered differences for all derivatives.
pub fn curvature(
    sys: &SystemSpec,
    fr: &Frame,
    sol: &SolutionGrid,
    tol: &Tolerances,
) -> Result<CurvatureField, GoursatError> {
    let ctx = sys.context(tol)?;
    let g = metric(&ctx.prepare_frame(fr)).map(|e| ctx.prepare(&e));
    require_bound(&g.iter().collect::<Vec<_>>())?;
    let vals = eval_on_grid(&g, &ctx.fns, sol)?;
    let (ee, ff, gg) = (&vals[0], &vals[1], &vals[2]);
    let d = Diff { sol };
    let mut k = vec![None; sol.u.len()];
    let (mut interior, mut degenerate) = (0, 0);
    for (i, j) in sol.interior() {
        interior += 1;
        let n = sol.idx(i, j);
        let (e, f, g) = (ee[n], ff[n], gg[n]);
        let det = e * g - f * f;
        if det < tol.degenerate_metric {
            degenerate += 1;
            continue;
        }
        let (e_x, e_t) = (d.x(ee, i, j), d.t(ee, i, j));
        let (f_x, f_t) = (d.x(ff, i, j), d.t(ff, i, j));
        let (g_x, g_t) = (d.x(gg, i, j), d.t(gg, i, j));
        let top = -0.5 * d.tt(ee, i, j) + d.xt(ff, i, j) - 0.5 * d.xx(gg, i, j);
        let m1 = [[top, 0.5 * e_x, f_x - 0.5 * e_t], [f_t - 0.5 * g_x, e, f], [0.5 * g_t, f, g]];
        let m2 = [[0.0, 0.5 * e_t, 0.5 * g_x], [0.5 * e_t, e, f], [0.5 * g_x, f, g]];
        k[n] = Some((det3(m1) - det3(m2)) / (det * det));
    }
    Ok(CurvatureField { k, interior, degenerate })
}

/// Coarse look at a solution: smallest `det g` and largest state component
/// over all nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Screen {
    pub min_det: f64,
    pub max_state: f64,
}

pub fn screen(
    sys: &SystemSpec,
    fr: &Frame,
    data: &GoursatData,
    n: usize,
    tol: &Tolerances,
) -> Result<Screen, GoursatError> {
    let sol = solve(sys, data, n, n, tol)?;
    let ctx = sys.context(tol)?;
    let g = metric(&ctx.prepare_frame(fr)).map(|e| ctx.prepare(&e));
    require_bound(&g.iter().collect::<Vec<_>>())?;
    let vals = eval_on_grid(&g, &ctx.fns, &sol)?;
    let min_det = (0..sol.u.len())
        .map(|k| vals[0][k] * vals[2][k] - vals[1][k] * vals[1][k])
        .fold(f64::INFINITY, f64::min);
    let max_state = [&sol.u, &sol.v, &sol.ux, &sol.vx]
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(Screen { min_det, max_state })
}

/// First generated data set whose coarse solution keeps `det g` above
/// `min_det` and every state component below `max_state`.
pub fn generic_data<R: rand::Rng>(
    sys: &SystemSpec,
    fr: &Frame,
    rng: &mut R,
    attempts: usize,
    min_det: f64,
    max_state: f64,
    tol: &Tolerances,
) -> Option<GoursatData> {
    (0..attempts).find_map(|_| {
        let data = GoursatData::generated(rng);
        match screen(sys, fr, &data, 33, tol) {
            Ok(s) if s.min_det >= min_det && s.max_state <= max_state => Some(data),
            _ => None,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub nx: usize,
    pub nt: usize,
    pub hx: f64,
    pub ht: f64,
    pub pde_residual: f64,
    pub consistency: f64,
    pub forms_residual: [f64; 3],
    pub forms_max: f64,
    /// Max interior `|K + delta|`; absent when every node is degenerate.
    pub curvature_deviation: Option<f64>,
    pub degenerate_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orders {
    pub pde_residual: Option<f64>,
    pub forms_residual: Option<f64>,
    pub curvature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReport {
    pub system: String,
    pub delta: i32,
    pub target_curvature: f64,
    pub data: [String; 4],
    pub levels: Vec<LevelReport>,
    /// Convergence orders estimated from the two finest levels.
    pub orders: Orders,
    /// Forms residual and curvature error decrease together at every
    /// refinement.
    pub shrink_together: bool,
    pub passed: bool,
    pub failures: Vec<String>,
    pub tolerances: Tolerances,
}

fn run_level(
    sys: &SystemSpec,
    fr: &Frame,
    data: &GoursatData,
    n: usize,
    tol: &Tolerances,
) -> Result<(LevelReport, SolutionGrid, CurvatureField), GoursatError> {
    let sol = solve(sys, data, n, n, tol)?;
    let pde = pde_residual(sys, &sol, tol)?;
    let forms = forms_residual(sys, fr, &sol, tol)?;
    let k = curvature(sys, fr, &sol, tol)?;
    let report = LevelReport {
        nx: sol.nx,
        nt: sol.nt,
        hx: sol.hx,
        ht: sol.ht,
        pde_residual: pde.max,
        consistency: pde.consistency,
        forms_residual: forms.max,
        forms_max: forms.max.iter().copied().fold(0.0, f64::max),
        curvature_deviation: k.max_deviation(sys.delta.curvature()),
        degenerate_fraction: k.degenerate_fraction(),
    };
    Ok((report, sol, k))
}

/// Solve on each level (run in parallel) and check the geometric contract.
/// Also returns the finest grid and its curvature field.
pub fn validate_with_grid(
    sys: &SystemSpec,
    fr: &Frame,
    data: &GoursatData,
    levels: &[usize],
    tol: &Tolerances,
) -> Result<(GeometryReport, Option<(SolutionGrid, CurvatureField)>), GoursatError> {
    let runs: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| s.spawn(move || run_level(sys, fr, data, n, tol)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("level worker panicked")).collect()
    });
    let mut reports = Vec::new();
    let mut finest = None;
    for r in runs {
        let (rep, sol, k) = r?;
        reports.push(rep);
        finest = Some((sol, k));
    }

    let order = |pick: fn(&LevelReport) -> Option<f64>| -> Option<f64> {
        let [a, b] = reports.len().checked_sub(2).map(|s| [&reports[s], &reports[s + 1]])?;
        let (ea, eb) = (pick(a)?, pick(b)?);
        let o = (ea / eb).ln() / (a.hx / b.hx).ln();
        o.is_finite().then_some(o)
    };
    let orders = Orders {
        pde_residual: order(|l| Some(l.pde_residual)),
        forms_residual: order(|l| Some(l.forms_max)),
        curvature: order(|l| l.curvature_deviation),
    };
    let shrink_together = reports.windows(2).all(|w| {
        let forms = w[1].forms_max < w[0].forms_max;
        let k = matches!((w[0].curvature_deviation, w[1].curvature_deviation), (Some(a), Some(b)) if b < a);
        forms && k
    });

    let mut failures = Vec::new();
    if reports.len() < 2 {
        failures.push("at least two refinement levels are needed".to_string());
    }
    for (name, o) in [
        ("pde residual", orders.pde_residual),
        ("forms residual", orders.forms_residual),
        ("curvature", orders.curvature),
    ] {
        match o {
            Some(o) if o >= tol.order_min && o <= tol.order_max => {}
            Some(o) => failures.push(format!(
                "{name} order {o:.3} outside [{}, {}]",
                tol.order_min, tol.order_max
            )),
            None => failures.push(format!("{name} order undefined")),
        }
    }
    if let Some(last) = reports.last() {
        match last.curvature_deviation {
            Some(dev) if dev <= tol.curvature => {}
            Some(dev) => failures.push(format!("finest |K + delta| = {dev:e} exceeds {:e}", tol.curvature)),
            None => failures.push("no nondegenerate interior node at the finest level".to_string()),
        }
    }
    for l in &reports {
        if l.degenerate_fraction >= tol.degenerate_fraction {
            failures.push(format!(
                "degenerate metric at {:.1}% of interior nodes on the {}x{} grid",
                100.0 * l.degenerate_fraction,
                l.nx,
                l.nt
            ));
        }
    }

    let report = GeometryReport {
        system: sys.label.clone(),
        delta: sys.delta.sign() as i32,
        target_curvature: sys.delta.curvature(),
        data: data.texts().clone(),
        levels: reports,
        orders,
        shrink_together,
        passed: failures.is_empty(),
        failures,
        tolerances: tol.clone(),
    };
    Ok((report, finest))
}

pub fn validate(
    sys: &SystemSpec,
    fr: &Frame,
    data: &GoursatData,
    levels: &[usize],
    tol: &Tolerances,
) -> Result<GeometryReport, GoursatError> {
    Ok(validate_with_grid(sys, fr, data, levels, tol)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Delta;

    fn zero_system() -> SystemSpec {
        SystemSpec::parse("zero", Delta::Pss, "0", "0").unwrap()
    }

    #[test]
    fn euclidean_frame_is_flat() {
        let data = GoursatData::parse(["sin(x)", "x^2", "t", "t^2"]).unwrap();
        let tol = Tolerances::default();
        let sol = solve(&zero_system(), &data, 17, 17, &tol).unwrap();
        let fr = Frame::parse([["1", "0"], ["0", "1"], ["0", "0"]]).unwrap();
        let k = curvature(&zero_system(), &fr, &sol, &tol).unwrap();
        assert_eq!(k.degenerate, 0);
        assert!(k.max_deviation(0.0).unwrap() <= 1e-10);
        // a flat frame fails only the third structure equation, by delta
        let r = forms_residual(&zero_system(), &fr, &sol, &tol).unwrap();
        assert_eq!(r.max, [0.0, 0.0, 1.0]);
        let r = forms_residual(&zero_system(), &Frame::zero(), &sol, &tol).unwrap();
        assert_eq!(r.max, [0.0; 3]);
    }

    #[test]
    fn polar_metric_has_zero_curvature() {
        // dx^2 + x^2 dt^2 away from x = 0
        let fr = Frame::parse([["1", "0"], ["0", "u"], ["0", "0"]]).unwrap();
        let data = GoursatData::parse(["1 + x", "0", "1", "0"]).unwrap();
        let tol = Tolerances::default();
        let sol = solve(&zero_system(), &data, 33, 33, &tol).unwrap();
        let k = curvature(&zero_system(), &fr, &sol, &tol).unwrap();
        assert!(k.max_deviation(0.0).unwrap() < 1e-10);
    }

    #[test]
    fn sphere_metric_has_unit_curvature() {
        // dx^2 + sin(x)^2 dt^2 with u = x
        let fr = Frame::parse([["1", "0"], ["0", "sin(u)"], ["0", "0"]]).unwrap();
        let data = GoursatData::parse(["0.5 + x", "0", "0.5", "0"]).unwrap();
        let tol = Tolerances::default();
        let dev = |n| {
            let sol = solve(&zero_system(), &data, n, n, &tol).unwrap();
            curvature(&zero_system(), &fr, &sol, &tol).unwrap().max_deviation(1.0).unwrap()
        };
        let (a, b) = (dev(33), dev(65));
        assert!(b < 1e-3 && (a / b).log2() > 1.8, "{a} {b}");
    }

    #[test]
    fn degenerate_nodes_are_counted() {
        let fr = Frame::parse([["1", "0"], ["0", "0"], ["0", "0"]]).unwrap();
        let data = GoursatData::parse(["x", "0", "0", "t"]).unwrap();
        let tol = Tolerances::default();
        let sol = solve(&zero_system(), &data, 9, 9, &tol).unwrap();
        let k = curvature(&zero_system(), &fr, &sol, &tol).unwrap();
        assert_eq!(k.degenerate_fraction(), 1.0);
        assert_eq!(k.max_deviation(0.0), None);
    }
}
