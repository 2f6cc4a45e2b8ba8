use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use pss_core::catalog::{entry, Overrides};
use pss_core::config::Tolerances;
use pss_core::expr::FnDef;
use pss_core::frames::{Delta, Frame, SystemFile, SystemSpec};
use pss_core::goursat::{generic_data, GoursatData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{input, CliResult};

/// Where the system and frame come from, plus parameter overrides.
#[derive(Args, Debug)]
pub struct Source {
    /// Catalog key (see `pss catalog list`).
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    pub catalog: Option<String>,
    /// System+frame JSON document.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Shorthand for `-p eta=VALUE`.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Shorthand for `-p nu=VALUE`.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Bind a parameter, `name=value`.
    #[arg(short = 'p', long = "param", value_parser = parse_binding)]
    pub params: Vec<(String, f64)>,
    /// Leave a parameter free (checked by sampling).
    #[arg(long = "free")]
    pub free: Vec<String>,
    /// Curvature sign, 1 (K=-1) or -1 (K=+1), where the entry allows both.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_delta)]
    pub delta: Option<Delta>,
    /// Replace a function body, e.g. `phi(s)=sinh(s)` or `q(z,y)=z*y`.
    #[arg(long = "function", value_parser = parse_function)]
    pub functions: Vec<(String, FnDef)>,
}

pub fn parse_binding(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text.split_once('=').ok_or_else(|| format!("expected name=value, got `{text}`"))?;
    let value = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_delta(text: &str) -> Result<Delta, String> {
    let v: i8 = text.parse().map_err(|_| format!("delta must be 1 or -1, got `{text}`"))?;
    Delta::try_from(v)
}

fn parse_function(text: &str) -> Result<(String, FnDef), String> {
    let bad = || format!("expected name(args)=body, got `{text}`");
    let (head, body) = text.split_once('=').ok_or_else(bad)?;
    let (name, args) = head.trim().strip_suffix(')').and_then(|h| h.split_once('(')).ok_or_else(bad)?;
    let args = args.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect();
    Ok((name.trim().to_string(), FnDef { args, body: body.trim().to_string() }))
}

pub struct Loaded {
    pub sys: SystemSpec,
    pub frame: Frame,
    /// Default characteristic data of a catalog entry.
    pub data: Option<[String; 4]>,
    pub description: Value,
}

impl Source {
    fn bindings(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        if let Some(x) = self.eta {
            out.insert("eta".into(), x);
        }
        if let Some(x) = self.nu {
            out.insert("nu".into(), x);
        }
        out
    }

    pub fn overrides(&self) -> Overrides {
        Overrides {
            params: self.bindings(),
            free: self.free.iter().cloned().collect(),
            delta: self.delta,
            functions: self.functions.iter().cloned().collect(),
        }
    }

    fn describe(&self) -> Value {
        let functions: BTreeMap<_, _> = self.functions.iter().cloned().collect();
        json!({
            "catalog": self.catalog,
            "file": self.file.as_ref().map(|p| p.display().to_string()),
            "params": self.bindings(),
            "free": self.free,
            "delta": self.delta,
            "functions": functions,
        })
    }

    pub fn load(&self) -> CliResult<Loaded> {
        if let Some(key) = &self.catalog {
            let e = entry(key)?;
            let (sys, frame) = e.instantiate(&self.overrides())?;
            return Ok(Loaded { sys, frame, data: Some(e.data.map(String::from)), description: self.describe() });
        }
        let path = self.file.as_ref().expect("clap requires --catalog or --file");
        let mut doc = SystemFile::read(path)?;
        for (name, value) in self.bindings() {
            let spec = doc.params.get_mut(&name).ok_or_else(|| input(format!("unknown parameter `{name}`")))?;
            spec.value = Some(value);
            spec.free = false;
        }
        for name in &self.free {
            let spec = doc.params.get_mut(name).ok_or_else(|| input(format!("unknown parameter `{name}`")))?;
            spec.value = None;
            spec.free = true;
        }
        if let Some(d) = self.delta {
            doc.delta = d;
        }
        for (name, def) in &self.functions {
            doc.functions.insert(name.clone(), def.clone());
        }
        let (sys, frame) = doc.to_parts()?;
        Ok(Loaded { sys, frame, data: None, description: self.describe() })
    }
}

/// Characteristic data on the unit square.
#[derive(Args, Debug)]
pub struct DataArgs {
    /// `u(x,0);v(x,0);u(0,t);v(0,t)`, overriding the catalog defaults.
    #[arg(long, conflicts_with = "generic")]
    pub data: Option<String>,
    /// Draw random data from the seed, screened to keep the metric
    /// nondegenerate on a coarse grid.
    #[arg(long)]
    pub generic: bool,
}

impl DataArgs {
    pub fn resolve(&self, loaded: &Loaded, seed: u64, tol: &Tolerances) -> CliResult<GoursatData> {
        if let Some(text) = &self.data {
            let parts: Vec<&str> = text.split(';').map(str::trim).collect();
            let parts: [&str; 4] =
                parts.try_into().map_err(|_| input("--data needs four expressions separated by `;`"))?;
            return Ok(GoursatData::parse(parts)?);
        }
        if self.generic {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            return generic_data(&loaded.sys, &loaded.frame, &mut rng, 50, 0.1, 3.0, tol)
                .ok_or_else(|| crate::error::CliError::Failed("no screened data found in 50 draws".into()));
        }
        match &loaded.data {
            Some(d) => Ok(GoursatData::parse([&d[0], &d[1], &d[2], &d[3]])?),
            None => Err(input("a --file system needs --data or --generic")),
        }
    }
}
