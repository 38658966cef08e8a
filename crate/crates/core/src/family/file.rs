//! JSON family documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{parse_expr, Convention, Env, FamilySpec, PathSpec};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerances, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Complex([f64; 2]),
}

impl Cell {
    pub fn value(self) -> C64 {
        match self {
            Cell::Real(x) => C64::new(x, 0.0),
            Cell::Complex([re, im]) => C64::new(re, im),
        }
    }

    pub fn from_value(z: C64) -> Cell {
        if z.im == 0.0 {
            Cell::Real(z.re)
        } else {
            Cell::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFields {
    pub var: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bind: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisFields {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFields {
    pub x: AxisFields,
    pub y: AxisFields,
}

/// On-disk family description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub name: String,
    pub size: usize,
    pub convention: Convention,
    pub entries: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Vec<Vec<Cell>>>,
    /// Hermitian metric entries, same syntax and parameters as `entries`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathFields>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridFields>,
}

impl FamilyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("family files always serialize")
    }

    /// Validates the document and builds the family.
    pub fn to_spec(&self, tol: &Tolerances) -> Result<FamilySpec> {
        if self.size == 0 || self.entries.len() != self.size {
            return Err(Error::Schema(format!(
                "size is {} but entries has {} rows",
                self.size,
                self.entries.len()
            )));
        }
        let parity = match &self.parity {
            None => None,
            Some(rows) => {
                if rows.len() != self.size || rows.iter().any(|r| r.len() != self.size) {
                    return Err(Error::Schema(format!("parity must be {0}x{0}", self.size)));
                }
                let rows: Vec<Vec<C64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|c| c.value()).collect())
                    .collect();
                Some(
                    ComplexMatrix::from_rows(&rows)
                        .map_err(|e| Error::Schema(format!("parity: {e}")))?,
                )
            }
        };
        let spec = FamilySpec::new(
            self.name.clone(),
            self.entries.clone(),
            self.parameters.clone(),
            parity,
            self.convention,
            tol,
        )?;
        let spec = match &self.metric {
            Some(m) => spec.with_metric(m.clone())?,
            None => spec,
        };
        if let Some(p) = self.path_spec()? {
            p.validate_against(&spec)?;
        }
        if let Some(g) = &self.grid {
            for axis in [&g.x, &g.y] {
                check_axis(axis, &spec)?;
            }
        }
        Ok(spec)
    }

    pub fn path_spec(&self) -> Result<Option<PathSpec>> {
        self.path.as_ref().map(path_from_fields).transpose()
    }

    pub fn from_spec(spec: &FamilySpec) -> Self {
        FamilyFile {
            name: spec.name.clone(),
            size: spec.n,
            convention: spec.convention,
            entries: spec.sources.clone(),
            parity: spec.parity.as_ref().map(|p| {
                p.matrix()
                    .rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(Cell::from_value).collect())
                    .collect()
            }),
            metric: spec.metric_sources.clone(),
            parameters: spec.parameters.clone(),
            path: None,
            grid: None,
        }
    }
}

pub fn path_from_fields(p: &PathFields) -> Result<PathSpec> {
    let mut bind = BTreeMap::new();
    for (k, src) in &p.bind {
        let e = parse_expr(src).map_err(|e| Error::Schema(format!("path bind `{k}`: {e}")))?;
        bind.insert(k.clone(), e);
    }
    if bind.is_empty() {
        bind.insert(p.var.clone(), super::Expr::Ident(p.var.clone()));
    }
    PathSpec::from_parts(p.var.clone(), p.from, p.to, p.steps, bind)
}

pub fn check_axis(axis: &AxisFields, spec: &FamilySpec) -> Result<()> {
    if !spec.parameters.contains_key(&axis.param) {
        return Err(Error::Schema(format!(
            "grid axis names undeclared parameter `{}`",
            axis.param
        )));
    }
    if !(axis.from.is_finite() && axis.to.is_finite()) || axis.n == 0 {
        return Err(Error::Schema(format!(
            "grid axis `{}` must have finite range and n >= 1",
            axis.param
        )));
    }
    Ok(())
}

pub fn env_from_pairs(pairs: &[(&str, f64)]) -> Env {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
