use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Delta, Frame, FrameError, ParamSpec, SystemSpec};
use crate::expr::{parse_with, Expr, FnDef, FnTable, ParseContext};

/// The "system+frame" JSON document: every expression as grammar text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub label: String,
    pub delta: Delta,
    #[serde(default)]
    pub params: BTreeMap<String, ParamSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FnDef>,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    pub frame: [[String; 2]; 3],
}

impl SystemFile {
    pub fn from_parts(sys: &SystemSpec, fr: &Frame) -> SystemFile {
        let params = sys
            .params
            .iter()
            .map(|(k, p)| {
                let mut p = p.clone();
                p.free = p.value.is_none();
                (k.clone(), p)
            })
            .collect();
        SystemFile {
            label: sys.label.clone(),
            delta: sys.delta,
            params,
            functions: sys.functions.definitions(),
            f: sys.f.to_string(),
            g: sys.g.to_string(),
            frame: std::array::from_fn(|i| [fr.f[i][0].to_string(), fr.f[i][1].to_string()]),
        }
    }

    /// Parse all expressions; identifiers must be declared parameters or
    /// functions of this document.
    pub fn to_parts(&self) -> Result<(SystemSpec, Frame), FrameError> {
        let functions = FnTable::from_definitions(&self.functions)?;
        let ctx = ParseContext {
            params: Some(self.params.keys().cloned().collect()),
            functions: Some(functions.arities()),
            args: Vec::new(),
        };
        let p = |s: &str| parse_with(s, &ctx);
        let mut rows: Vec<[Expr; 2]> = Vec::new();
        for row in &self.frame {
            rows.push([p(&row[0])?, p(&row[1])?]);
        }
        for (name, spec) in &self.params {
            if spec.free && spec.value.is_some() {
                return Err(FrameError::Param { name: name.clone(), reason: "both free and bound".into() });
            }
            spec.check(name)?;
        }
        let sys = SystemSpec {
            label: self.label.clone(),
            delta: self.delta,
            f: p(&self.f)?,
            g: p(&self.g)?,
            params: self.params.clone(),
            functions,
        };
        Ok((sys, Frame::new(rows.try_into().unwrap())))
    }

    pub fn from_json(text: &str) -> Result<SystemFile, FrameError> {
        serde_json::from_str(text).map_err(|e| FrameError::Invalid(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<SystemFile, FrameError> {
        let text = std::fs::read_to_string(path).map_err(|e| FrameError::Invalid(format!("{}: {e}", path.display())))?;
        SystemFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system file serializes")
    }
}
