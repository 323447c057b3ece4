//! Applying transformations and action structures to models.
//!
//! These entry points are strict: the transformed structure must satisfy all
//! EFL model conditions (per-agent equivalence relations, symmetric
//! irreflexive friendship), or the operation fails with the violated
//! condition. Repair is never silent; a transformation that needs
//! reflexivity, say, must build it in with `true?` the way the defining
//! program terms do.

use std::collections::BTreeMap;

use crate::engine::{Dense, EvalError, PointMap};
use crate::model::{EflModel, Point};
use crate::syntax::{Formula, GddlOperator, PdlTransformation, Program};

/// The program that relates same-agent points exactly when they are
/// `K`-related and agree on `phi`: `(φ? ; K ; φ?) ∪ (¬φ? ; K ; ¬φ?)`.
///
/// Assigning it to `K` removes the epistemic links between states that
/// disagree on `phi`, revealing to every agent whether `phi` holds for them.
pub fn cut_k(phi: Formula) -> Program {
    let pos = || Program::test(phi.clone());
    let neg = || Program::test(phi.clone().not());
    pos()
        .seq(Program::K.seq(pos()))
        .union(neg().seq(Program::K.seq(neg())))
}

/// A transformed model together with the tracking of designated points.
#[derive(Debug, Clone)]
pub struct TransformResult {
    pub model: EflModel,
    point_map: BTreeMap<Point, Point>,
}

impl TransformResult {
    /// Where a point of the original model lands in the transformed one.
    pub fn map_point(&self, p: &Point) -> Option<&Point> {
        self.point_map.get(p)
    }

    pub fn point_map(&self) -> &BTreeMap<Point, Point> {
        &self.point_map
    }
}

/// Applies a transformation to a model. Every right-hand side is denoted in
/// the input model, the reinterpreted components are installed simultaneously,
/// and the result is re-validated. States are untouched, so the point map is
/// the identity.
pub fn apply_trans(
    model: &EflModel,
    trans: &PdlTransformation,
) -> Result<TransformResult, EvalError> {
    let dense = Dense::from_model(model)?;
    let next = dense.apply_trans(trans, None, true)?;
    let out = next.to_model();
    let point_map = model
        .worlds()
        .iter()
        .flat_map(|w| {
            model.agents().iter().map(|a| {
                let p = Point {
                    world: w.clone(),
                    agent: a.clone(),
                };
                (p.clone(), p)
            })
        })
        .collect();
    Ok(TransformResult {
        model: out,
        point_map,
    })
}

/// Applies an action structure: one transformed copy of the model per action,
/// the internal relations lifted between copies of the same world, then the
/// integrating transformation over the product. A pre-transformation point
/// `(w, a)` lands at `((w, actual), a)`; product worlds are named
/// `world@action`.
pub fn apply_gddl(model: &EflModel, op: &GddlOperator) -> Result<TransformResult, EvalError> {
    let dense = Dense::from_model(model)?;
    let next = dense.apply_gddl(op, true)?;
    let out = next.to_model();
    let map = PointMap::Product {
        n_agents: model.agents().len(),
        n_actions: op.actions().len(),
        actual: op.actual_index(),
    };
    let n_agents = model.agents().len();
    let point_map = model
        .worlds()
        .iter()
        .enumerate()
        .flat_map(|(wi, w)| {
            let out = &out;
            model.agents().iter().enumerate().map(move |(ai, a)| {
                let pre = Point {
                    world: w.clone(),
                    agent: a.clone(),
                };
                let target = map.apply(wi * n_agents + ai);
                let post = Point {
                    world: out.worlds()[target / n_agents].clone(),
                    agent: out.agents()[target % n_agents].clone(),
                };
                (pre, post)
            })
        })
        .collect();
    Ok(TransformResult {
        model: out,
        point_map,
    })
}
