use std::fs;

use clap::Args;
use pss_core::catalog::{entries, entry, reduce as certify, Overrides};
use pss_core::classify::{
    build_case1, build_case2, compare_printed, derive_fg, printed_case1, printed_case2, random_case1, random_case2,
    BuildParams, ParamsFile, PrintedCheck, Variant,
};
use pss_core::config::Tolerances;
use pss_core::frames::{genericity, verify as verify_frame, Delta, SystemFile};
use pss_core::goursat::{pde_residual, solve as solve_grid, validate_with_grid};
use pss_core::linear::{
    build, holonomy_loop, in_algebra, parse_loop, transport as run_transport, unit_state, zero_curvature, CompiledPair,
    Form, LinearError, Move,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{input, CliError, CliResult};
use crate::source::{DataArgs, Source};
use crate::Global;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    input: Value,
    seed: u64,
    passed: bool,
    tolerances: &'a Tolerances,
    result: T,
}

/// Print the report and, with an output directory, write it and the
/// companion files there.
fn emit<T: Serialize>(
    g: &Global,
    tol: &Tolerances,
    command: &str,
    description: Value,
    passed: bool,
    result: T,
    files: &[(&str, String)],
) -> CliResult<bool> {
    let env = Envelope { command, input: description, seed: g.seed, passed, tolerances: tol, result };
    let mut text = serde_json::to_string_pretty(&env).expect("report serializes");
    text.push('\n');
    print!("{text}");
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
        let name = format!("{}.json", command.replace(' ', "-"));
        for (file, body) in std::iter::once((name.as_str(), &text)).chain(files.iter().map(|(f, b)| (*f, b))) {
            let path = dir.join(file);
            fs::write(&path, body).map_err(|e| input(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(passed)
}

pub fn verify(g: &Global, s: &Source) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let l = s.load()?;
    let report = verify_frame(&l.sys, &l.frame, &tol)?;
    emit(g, &tol, "verify", l.description, report.passed, &report, &[])
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Parameter file (`"case": "1"` or `"2"`).
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    params: Option<std::path::PathBuf>,
    /// Draw a random admissible parameter set from the seed.
    #[arg(long, value_parser = ["case1", "case2"])]
    random: Option<String>,
    /// Constant row for --random: T1 (f31), T2 (f21) or T3 (f11).
    #[arg(long, default_value = "T2", value_parser = parse_variant)]
    variant: Variant,
    /// Curvature sign for --random.
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_delta)]
    delta: Delta,
}

fn parse_variant(text: &str) -> Result<Variant, String> {
    serde_json::from_value(Value::String(text.to_uppercase())).map_err(|_| format!("variant must be T1, T2 or T3, got `{text}`"))
}

fn parse_delta(text: &str) -> Result<Delta, String> {
    let v: i8 = text.parse().map_err(|_| format!("delta must be 1 or -1, got `{text}`"))?;
    Delta::try_from(v)
}

#[derive(Serialize)]
struct Generated {
    system: SystemFile,
    verified: bool,
    generic: bool,
    /// The system solved again from the frame agrees with the built one.
    derive_fg_matches: bool,
    printed: Vec<PrintedCheck>,
}

pub fn generate(g: &Global, a: &GenerateArgs) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let (params, description) = match (&a.params, &a.random) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let params = ParamsFile::from_json(&text)?.to_params()?;
            (params, json!({ "params": path.display().to_string() }))
        }
        (None, Some(case)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let params = if case == "case1" {
                BuildParams::Case1(random_case1(&mut rng, a.variant, a.delta))
            } else {
                BuildParams::Case2(random_case2(&mut rng, a.variant, a.delta))
            };
            (params, json!({ "random": case, "variant": a.variant, "delta": a.delta }))
        }
        (None, None) => unreachable!("clap requires --params or --random"),
    };
    let (sys, frame, printed) = match &params {
        BuildParams::Case1(p) => {
            let (sys, frame) = build_case1(p, &tol)?;
            let (f, g) = printed_case1(p)?;
            (sys, frame, vec![("printed".to_string(), f, g)])
        }
        BuildParams::Case2(p) => {
            let (sys, frame) = build_case2(p, &tol)?;
            (sys, frame, printed_case2(p))
        }
    };
    let ctx = sys.context(&tol)?;
    let d = derive_fg(&frame, sys.delta, &ctx)?;
    let derive_fg_matches =
        ctx.is_zero(&ctx.prepare(&(&d.f - &sys.f)))? && ctx.is_zero(&ctx.prepare(&(&d.g - &sys.g)))?;
    let verified = verify_frame(&sys, &frame, &tol)?.passed;
    let generic = genericity(&sys, &ctx)?;
    let printed = compare_printed(&printed, &sys, &ctx)?;
    let system = SystemFile::from_parts(&sys, &frame);
    let file = system.to_json() + "\n";
    let passed = verified && generic && derive_fg_matches;
    let result = Generated { system, verified, generic, derive_fg_matches, printed };
    emit(g, &tol, "generate", description, passed, result, &[("system.json", file)])
}

pub fn solve(g: &Global, s: &Source, data: &DataArgs, n: usize) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let l = s.load()?;
    let d = data.resolve(&l, g.seed, &tol)?;
    let sol = solve_grid(&l.sys, &d, n, n, &tol)?;
    let pde = pde_residual(&l.sys, &sol, &tol)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let result = json!({
        "label": sol.label,
        "nx": sol.nx,
        "nt": sol.nt,
        "hx": sol.hx,
        "ht": sol.ht,
        "data": d.texts(),
        "max_abs": { "u": max_abs(&sol.u), "v": max_abs(&sol.v), "ux": max_abs(&sol.ux), "vx": max_abs(&sol.vx) },
        "pde_residual": pde,
    });
    emit(g, &tol, "solve", l.description, true, result, &[("grid.csv", sol.to_csv(None))])
}

pub fn curvature(g: &Global, s: &Source, data: &DataArgs, levels: &[usize]) -> CliResult<bool> {
    let tol = g.tolerances()?;
    if levels.len() < 2 || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(input("--levels needs at least two increasing grid sizes"));
    }
    let l = s.load()?;
    let d = data.resolve(&l, g.seed, &tol)?;
    let (report, finest) = validate_with_grid(&l.sys, &l.frame, &d, levels, &tol)?;
    let files: Vec<(&str, String)> = finest.iter().map(|(sol, k)| ("grid.csv", sol.to_csv(Some(k)))).collect();
    let passed = report.passed;
    emit(g, &tol, "curvature", l.description, passed, report, &files)
}

#[derive(Args, Debug)]
pub struct TransportArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    data: DataArgs,
    /// Nodes per side of the solution grid.
    #[arg(long, default_value_t = 129)]
    n: usize,
    /// 2x2 (sl2 / su2) or 3x3 (so(2,1) / so(3)).
    #[arg(long, default_value = "2x2", value_parser = ["2x2", "3x3"])]
    form: String,
    /// Closed rectangle `x0,t0:x1,t1`, traversed counter-clockwise.
    #[arg(long = "loop", conflicts_with = "moves")]
    rect: Option<String>,
    /// Explicit lattice moves, e.g. `x+4 t+2 x-4 t-2`.
    #[arg(long)]
    moves: Option<String>,
    /// Start node `i,j` for --moves.
    #[arg(long, default_value = "0,0")]
    start: String,
}

fn parse_node(text: &str) -> CliResult<(usize, usize)> {
    let bad = || input(format!("start node must be `i,j`, got `{text}`"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

pub fn transport(g: &Global, a: &TransportArgs) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let l = a.source.load()?;
    let d = a.data.resolve(&l, g.seed, &tol)?;
    let sol = solve_grid(&l.sys, &d, a.n, a.n, &tol)?;
    let form = if a.form == "3x3" { Form::ThreeByThree } else { Form::TwoByTwo };
    let cp = CompiledPair::new(&build(&l.frame, l.sys.delta, form), &l.sys.context(&tol)?)?;
    let (start, moves) = match &a.moves {
        Some(text) => (parse_node(&a.start)?, Move::parse_list(text).map_err(LinearError::from)?),
        None => {
            let (c0, c1) = parse_loop(a.rect.as_deref().unwrap_or("0,0:1,1")).map_err(LinearError::from)?;
            holonomy_loop(&sol, c0, c1).map_err(LinearError::from)?
        }
    };
    let trace = run_transport(&cp, &sol, start, &moves, &unit_state(cp.dim()))?;
    let passed = trace.summary.drift_per_length <= tol.transport_drift;
    let mut description = l.description;
    description["n"] = json!(a.n);
    description["form"] = json!(a.form);
    let result = json!({
        "start": [start.0, start.1],
        "moves": moves.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" "),
        "summary": trace.summary,
    });
    emit(g, &tol, "transport", description, passed, result, &[("trace.csv", trace.to_csv())])
}

pub fn linear_check(g: &Global, s: &Source) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let l = s.load()?;
    let ctx = l.sys.context(&tol)?;
    let mut rows = Vec::new();
    let mut passed = true;
    for form in [Form::TwoByTwo, Form::ThreeByThree] {
        let lp = build(&l.frame, l.sys.delta, form);
        let (zc, note) = match zero_curvature(&lp, &l.sys, &ctx) {
            Ok(b) => (b, None),
            Err(e @ LinearError::FreeDerivative { .. }) => (false, Some(e.to_string())),
            Err(e) => return Err(CliError::from(e)),
        };
        passed &= zc;
        rows.push(json!({
            "form": form,
            "algebra": lp.algebra,
            "zero_curvature": zc,
            "in_algebra": in_algebra(&lp, &ctx)?,
            "note": note,
        }));
    }
    let verified = verify_frame(&l.sys, &l.frame, &tol)?.passed;
    let result = json!({ "label": l.sys.label, "delta": l.sys.delta, "forms": rows, "structure_equations": verified });
    emit(g, &tol, "linear check", l.description, passed, result, &[])
}

pub fn catalog_list(g: &Global) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let list: Vec<Value> = entries()
        .iter()
        .map(|e| json!({ "key": e.key, "name": e.name, "kind": e.kind, "delta": e.delta }))
        .collect();
    emit(g, &tol, "catalog list", json!({}), true, list, &[])
}

pub fn catalog_show(g: &Global, key: &str) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let e = entry(key)?;
    let system = if e.is_hyperbolic() {
        let (sys, frame) = e.instantiate(&Overrides::default())?;
        Some(SystemFile::from_parts(&sys, &frame))
    } else {
        None
    };
    let files: Vec<(&str, String)> = system.iter().map(|s| ("system.json", s.to_json() + "\n")).collect();
    let result = json!({ "entry": e, "system": system });
    emit(g, &tol, "catalog show", json!({ "key": key }), true, result, &files)
}

pub fn reduce(g: &Global, from: &str, to: &str, params: &[(String, f64)]) -> CliResult<bool> {
    let tol = g.tolerances()?;
    let ov = Overrides { params: params.iter().cloned().collect(), ..Overrides::default() };
    let (sys, frame, cert) = certify(from, to, &ov, &tol)?;
    let file = SystemFile::from_parts(&sys, &frame).to_json() + "\n";
    let description = json!({ "from": from, "to": to, "params": ov.params });
    let passed = cert.passed;
    emit(g, &tol, "reduce", description, passed, cert, &[("system.json", file)])
}
