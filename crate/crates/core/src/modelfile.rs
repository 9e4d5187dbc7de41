//! TOML model files.
//!
//! ```toml
//! n = 3
//! coordinates = ["x", "y", "theta"]
//! angles = ["theta"]            # optional, only affects CSV presentation
//! potential = "0"
//! external_force = ["0", "0", "0"]
//! metric = [["m", "0", "0"], ["0", "m", "0"], ["0", "0", "I"]]
//! inputs = [["sin(theta)", "-cos(theta)", "1"]]
//!
//! [parameters]
//! m = 1.0
//! I = 1.0
//!
//! [constraint]
//! mu = [["sin(theta)", "-cos(theta)", "0"]]
//! Z = ["0"]                     # or X = [...] with Z = -S X
//! ```
//!
//! Every expression is a string in the expression language. Unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constraint::AffineConstraint;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::geometry::{Chart, MechanicalModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub coordinates: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<String>,
    pub potential: String,
    pub external_force: Vec<String>,
    pub metric: Vec<Vec<String>>,
    pub inputs: Vec<Vec<String>>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub constraint: ConstraintSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub mu: Vec<Vec<String>>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
}

/// A validated model file.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: MechanicalModel,
    pub constraint: AffineConstraint,
    /// Indices of coordinates that are angles.
    pub angles: Vec<usize>,
}

fn field_expr(field: String, text: &str) -> Result<Expr> {
    parse(text).map_err(|source| Error::Parse { field, source })
}

fn row_exprs(field: &str, row: &[String]) -> Result<Vec<Expr>> {
    row.iter()
        .enumerate()
        .map(|(i, t)| field_expr(format!("{field}[{i}]"), t))
        .collect()
}

fn grid_exprs(field: &str, grid: &[Vec<String>]) -> Result<Vec<Vec<Expr>>> {
    grid.iter()
        .enumerate()
        .map(|(i, row)| row_exprs(&format!("{field}[{i}]"), row))
        .collect()
}

fn strings(row: &[Expr]) -> Vec<String> {
    row.iter().map(ToString::to_string).collect()
}

impl ModelFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Model(format!("model file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model files always serialize")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Exports a model/constraint pair. The constraint is written in
    /// `(mu, Z)` form.
    pub fn from_parts(model: &MechanicalModel, con: &AffineConstraint, angles: &[&str]) -> Self {
        let chart = model.chart();
        Self {
            n: chart.dim(),
            coordinates: chart.coordinates().to_vec(),
            angles: angles.iter().map(|s| s.to_string()).collect(),
            potential: model.potential().to_string(),
            external_force: strings(model.external_force()),
            metric: model.metric().iter().map(|r| strings(r)).collect(),
            inputs: model.input_coframe().iter().map(|r| strings(r)).collect(),
            parameters: chart.parameters().iter().cloned().collect(),
            constraint: ConstraintSection {
                mu: con.mu().iter().map(|r| strings(r)).collect(),
                z: Some(strings(con.z())),
                x: None,
            },
        }
    }

    pub fn build(&self) -> Result<LoadedModel> {
        if self.coordinates.len() != self.n {
            return Err(Error::Model(format!(
                "n = {} but {} coordinates are listed",
                self.n,
                self.coordinates.len()
            )));
        }
        let chart = Chart::new(
            self.coordinates.iter().map(String::as_str),
            self.parameters.iter().map(|(k, v)| (k.as_str(), *v)),
        )?;
        let metric = grid_exprs("metric", &self.metric)?;
        let potential = field_expr("potential".into(), &self.potential)?;
        let external_force = row_exprs("external_force", &self.external_force)?;
        let inputs = grid_exprs("inputs", &self.inputs)?;
        let model = MechanicalModel::new(chart.clone(), metric, potential, external_force, inputs)?;

        let mu = grid_exprs("constraint.mu", &self.constraint.mu)?;
        let constraint = match (&self.constraint.z, &self.constraint.x) {
            (Some(z), None) => AffineConstraint::new(&chart, mu, row_exprs("constraint.Z", z)?)?,
            (None, Some(x)) => AffineConstraint::from_vector_field(&chart, mu, row_exprs("constraint.X", x)?)?,
            _ => {
                return Err(Error::Model(
                    "constraint needs exactly one of `Z` or `X`".into(),
                ))
            }
        };
        constraint.check_compatible(&model)?;

        let angles = self
            .angles
            .iter()
            .map(|a| {
                self.coordinates
                    .iter()
                    .position(|c| c == a)
                    .ok_or_else(|| Error::Model(format!("angle `{a}` is not a coordinate")))
            })
            .collect::<Result<_>>()?;
        Ok(LoadedModel {
            model,
            constraint,
            angles,
        })
    }
}

/// Reads and validates a model file.
pub fn load(path: &Path) -> Result<LoadedModel> {
    ModelFile::read(path)?.build()
}
