//! Model files and DOT export.
//!
//! Models are stored as JSON documents with the keys `worlds`, `agents`,
//! `names`, `k`, `f`, `d` (optional), `val` and `actual` (optional). Relation
//! entries are generator pair lists; reading closes them (equivalence closure
//! for `k`, symmetric closure for `f`), writing emits the closed relations
//! with reflexive and mirrored pairs dropped for compactness, so read ∘ write
//! is the identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EflModel, ModelError, Point, Violation};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("model violates EFL conditions: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// The on-disk document shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    pub agents: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub names: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub k: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub f: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<BTreeMap<String, Vec<(String, String)>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub val: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<(String, String)>,
}

impl ModelFile {
    /// Builds and validates the model described by the document.
    pub fn to_model(&self) -> Result<(EflModel, Option<Point>), IoError> {
        let mut b = EflModel::builder()
            .worlds(self.worlds.iter().map(|w| w.as_str()))
            .agents(self.agents.iter().map(|a| a.as_str()));
        for (agent, pairs) in &self.k {
            for (u, v) in pairs {
                b = b.k(agent, u, v);
            }
        }
        for (world, pairs) in &self.f {
            for (x, y) in pairs {
                b = b.f(world, x, y);
            }
        }
        if let Some(d) = &self.d {
            b = b.with_want_relation();
            for (world, pairs) in d {
                for (x, y) in pairs {
                    b = b.want(world, x, y);
                }
            }
        }
        for (nominal, agent) in &self.names {
            b = b.name(nominal, agent);
        }
        for (prop, points) in &self.val {
            for (w, a) in points {
                b = b.fact(prop, w, a);
            }
        }
        let model = b.build()?;
        let violations = model.validate();
        if !violations.is_empty() {
            return Err(IoError::Invalid(violations));
        }
        let actual = match &self.actual {
            None => None,
            Some((w, a)) => Some(model.point(w, a)?),
        };
        Ok((model, actual))
    }

    /// The document for a model: closed relations minus reflexive `k` pairs,
    /// one direction per undirected edge, in carrier order.
    pub fn from_model(model: &EflModel, actual: Option<&Point>) -> ModelFile {
        let world_index: BTreeMap<&str, usize> = model
            .worlds()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let agent_index: BTreeMap<&str, usize> = model
            .agents()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let mut k = BTreeMap::new();
        for agent in model.agents() {
            let pairs: Vec<(String, String)> = model
                .k_pairs(agent)
                .iter()
                .filter(|(u, v)| world_index[u.as_str()] < world_index[v.as_str()])
                .map(|(u, v)| (u.as_str().to_string(), v.as_str().to_string()))
                .collect();
            if !pairs.is_empty() {
                k.insert(agent.as_str().to_string(), pairs);
            }
        }
        let mut f = BTreeMap::new();
        for world in model.worlds() {
            let pairs: Vec<(String, String)> = model
                .f_pairs(world)
                .iter()
                .filter(|(a, b)| agent_index[a.as_str()] < agent_index[b.as_str()])
                .map(|(a, b)| (a.as_str().to_string(), b.as_str().to_string()))
                .collect();
            if !pairs.is_empty() {
                f.insert(world.as_str().to_string(), pairs);
            }
        }
        let d = if model.has_want_relation() {
            let mut d = BTreeMap::new();
            for world in model.worlds() {
                let pairs: Vec<(String, String)> = model
                    .d_pairs(world)
                    .iter()
                    .map(|(a, b)| (a.as_str().to_string(), b.as_str().to_string()))
                    .collect();
                if !pairs.is_empty() {
                    d.insert(world.as_str().to_string(), pairs);
                }
            }
            Some(d)
        } else {
            None
        };
        let val = model
            .props()
            .map(|prop| {
                (
                    prop.to_string(),
                    model
                        .valuation(prop)
                        .iter()
                        .map(|p| (p.world.as_str().to_string(), p.agent.as_str().to_string()))
                        .collect(),
                )
            })
            .collect();
        ModelFile {
            worlds: model
                .worlds()
                .iter()
                .map(|w| w.as_str().to_string())
                .collect(),
            agents: model
                .agents()
                .iter()
                .map(|a| a.as_str().to_string())
                .collect(),
            names: model
                .nominals()
                .map(|(n, a)| (n.to_string(), a.as_str().to_string()))
                .collect(),
            k,
            f,
            d,
            val,
            actual: actual.map(|p| (p.world.as_str().to_string(), p.agent.as_str().to_string())),
        }
    }
}

/// Reads and validates a model file.
pub fn read_model(path: &Path) -> Result<(EflModel, Option<Point>), IoError> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.to_model()
}

/// Writes a model (and optionally its designated point) as a model file.
pub fn write_model(model: &EflModel, actual: Option<&Point>, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, model_to_string(model, actual))?;
    Ok(())
}

/// The model-file text for a model.
pub fn model_to_string(model: &EflModel, actual: Option<&Point>) -> String {
    let file = ModelFile::from_model(model, actual);
    let mut text = serde_json::to_string_pretty(&file).expect("model files serialize");
    text.push('\n');
    text
}

/// Renders the model in the row/column diagram convention: one node per
/// point, worlds as rows and agents as columns, solid knowledge edges within
/// a column (one spanning chain per equivalence class), dotted friendship
/// edges within a row, dashed arrows for the want relation, and labels
/// listing the propositions true at each point. The designated point, when
/// given, is drawn with a double border.
pub fn export_dot(model: &EflModel, actual: Option<&Point>) -> String {
    let mut out = String::new();
    out.push_str("graph model {\n");
    out.push_str("  node [shape=ellipse];\n");
    let props: Vec<&str> = model.props().collect();
    for world in model.worlds() {
        let _ = writeln!(out, "  subgraph \"cluster_{world}\" {{");
        out.push_str("    rank=same; style=invis;\n");
        for agent in model.agents() {
            let point = Point {
                world: world.clone(),
                agent: agent.clone(),
            };
            let mut label = format!("{world},{agent}");
            for prop in &props {
                if model.holds_at(prop, &point) {
                    let _ = write!(label, "\\n{prop}");
                }
            }
            let peripheries = if actual == Some(&point) {
                " peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    \"{world},{agent}\" [label=\"{label}\"{peripheries}];"
            );
        }
        out.push_str("  }\n");
    }
    // Knowledge: a chain through each equivalence class, per agent.
    for agent in model.agents() {
        let mut seen: Vec<&crate::model::WorldId> = Vec::new();
        for world in model.worlds() {
            if seen.contains(&world) {
                continue;
            }
            let class: Vec<&crate::model::WorldId> = model
                .worlds()
                .iter()
                .filter(|v| model.k_related(agent, world, v))
                .collect();
            seen.extend(&class);
            for pair in class.windows(2) {
                let _ = writeln!(
                    out,
                    "  \"{},{agent}\" -- \"{},{agent}\" [style=solid];",
                    pair[0], pair[1]
                );
            }
        }
    }
    // Friendship: dotted, one edge per unordered pair.
    let agent_index: BTreeMap<&str, usize> = model
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    for world in model.worlds() {
        for (a, b) in model.f_pairs(world) {
            if agent_index[a.as_str()] < agent_index[b.as_str()] {
                let _ = writeln!(out, "  \"{world},{a}\" -- \"{world},{b}\" [style=dotted];");
            }
        }
        for (a, b) in model.d_pairs(world) {
            let _ = writeln!(
                out,
                "  \"{world},{a}\" -- \"{world},{b}\" [style=dashed dir=forward];"
            );
        }
    }
    out.push_str("}\n");
    out
}

/// Writes the DOT rendering to a file.
pub fn write_dot(model: &EflModel, actual: Option<&Point>, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, export_dot(model, actual))?;
    Ok(())
}
