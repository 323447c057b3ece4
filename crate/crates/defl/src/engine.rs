//! Denotation engine.
//!
//! Formulas denote sets of (world, agent) points; program terms denote
//! relations on points. `K` steps keep the agent fixed and moves along the
//! agent's indistinguishability relation; `F`, `A` and `D` keep the world
//! fixed and move between agents. Everything is computed over a dense
//! bit-level representation so that the bounded validity checker can sweep
//! millions of models; the public entry points translate between that
//! representation and [`EflModel`] points.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{AgentId, EflModel, Point, PointedModel, Violation, WorldId};
use crate::syntax::{
    expand, AssignRhs, AssignTarget, DynOp, Formula, GddlOperator, PdlTransformation, Program,
};

/// Models are capped at 64 points (worlds × agents) so that point sets fit in
/// a machine word. Action-structure products count against the same cap.
pub const MAX_POINTS: usize = 64;

/// Errors raised during evaluation or model transformation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown nominal `{0}`")]
    UnknownNominal(String),
    #[error("`down` requires a named-agent model")]
    DownRequiresNamedAgents,
    #[error("model has {0} points; at most {MAX_POINTS} are supported")]
    ModelTooLarge(usize),
    #[error("internal relation `{0}'` is not bound here")]
    UnboundInternal(String),
    #[error("assignment to `{target}` relates points across {dimension}s")]
    CrossDimension { target: String, dimension: String },
    #[error("nominal `{0}` reassigned to a formula that does not pick out a single agent at every world")]
    NominalNotRigid(String),
    #[error("the model carries no want relation")]
    WantRelationMissing,
    #[error("actions disagree on whether the model carries a want relation")]
    MixedWantRelation,
    #[error("transformation result is not an EFL model: {}", format_violations(.0))]
    EflViolation(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    match vs.len() {
        0 => "unknown violation".to_string(),
        1 => vs[0].to_string(),
        n => format!("{} (and {} more)", vs[0], n - 1),
    }
}

/// Evaluation options for the public entry points.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// When set, every dynamic operator hit during evaluation must produce a
    /// proper EFL model; a frame-condition failure aborts with the violated
    /// condition. Off by default: evaluation is structural, because the
    /// defining operators legitimately pass through non-EFL structures — the
    /// two-step friendship deletion has an asymmetric intermediate, and a
    /// send to an epistemically uncertain group breaks S5 at points a schema
    /// never looks at. Model surgery through [`crate::dynamics::apply_trans`]
    /// and [`crate::dynamics::apply_gddl`] always validates.
    pub strict_dynamics: bool,
}

/// A set of evaluation points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PointSet(BTreeSet<Point>);

impl PointSet {
    pub fn contains(&self, p: &Point) -> bool {
        self.0.contains(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.0.iter()
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.0
    }
}

impl FromIterator<Point> for PointSet {
    fn from_iter<T: IntoIterator<Item = Point>>(iter: T) -> Self {
        PointSet(iter.into_iter().collect())
    }
}

impl IntoIterator for PointSet {
    type Item = Point;
    type IntoIter = <BTreeSet<Point> as IntoIterator>::IntoIter;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// A relation on evaluation points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PointRelation(BTreeSet<(Point, Point)>);

impl PointRelation {
    pub fn contains(&self, from: &Point, to: &Point) -> bool {
        self.0.contains(&(from.clone(), to.clone()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Point, Point)> {
        self.0.iter()
    }
}

impl FromIterator<(Point, Point)> for PointRelation {
    fn from_iter<T: IntoIterator<Item = (Point, Point)>>(iter: T) -> Self {
        PointRelation(iter.into_iter().collect())
    }
}

/// The exact denotation of `phi` in `model`.
pub fn eval(model: &EflModel, phi: &Formula) -> Result<PointSet, EvalError> {
    eval_with(model, phi, EvalOptions::default())
}

pub fn eval_with(
    model: &EflModel,
    phi: &Formula,
    opts: EvalOptions,
) -> Result<PointSet, EvalError> {
    let dense = Dense::from_model(model)?;
    let mask = dense.eval(phi, opts.strict_dynamics)?;
    Ok(dense.mask_to_points(mask))
}

/// The exact relational denotation of `prog` in `model`.
pub fn denote(model: &EflModel, prog: &Program) -> Result<PointRelation, EvalError> {
    let dense = Dense::from_model(model)?;
    let rel = dense.denote(prog, None, false)?;
    Ok(dense.rel_to_pairs(&rel))
}

/// True when the formula holds at the designated point.
pub fn satisfies(pm: &PointedModel, phi: &Formula) -> Result<bool, EvalError> {
    satisfies_with(pm, phi, EvalOptions::default())
}

pub fn satisfies_with(
    pm: &PointedModel,
    phi: &Formula,
    opts: EvalOptions,
) -> Result<bool, EvalError> {
    let set = eval_with(&pm.model, phi, opts)?;
    Ok(set.contains(&pm.point))
}

// ---------------------------------------------------------------------------
// Dense representation
// ---------------------------------------------------------------------------

/// A relation over at most [`MAX_POINTS`] points: one adjacency word per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Rel {
    pub(crate) n: usize,
    pub(crate) rows: Vec<u64>,
}

impl Rel {
    pub(crate) fn empty(n: usize) -> Rel {
        Rel {
            n,
            rows: vec![0; n],
        }
    }

    pub(crate) fn from_diag(mask: u64, n: usize) -> Rel {
        let mut r = Rel::empty(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                r.rows[i] = 1u64 << i;
            }
        }
        r
    }

    pub(crate) fn set(&mut self, i: usize, j: usize) {
        self.rows[i] |= 1u64 << j;
    }

    pub(crate) fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub(crate) fn union(&self, other: &Rel) -> Rel {
        debug_assert_eq!(self.n, other.n);
        Rel {
            n: self.n,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub(crate) fn compose(&self, other: &Rel) -> Rel {
        debug_assert_eq!(self.n, other.n);
        let mut out = Rel::empty(self.n);
        for i in 0..self.n {
            let mut row = 0u64;
            let mut mids = self.rows[i];
            while mids != 0 {
                let j = mids.trailing_zeros() as usize;
                mids &= mids - 1;
                row |= other.rows[j];
            }
            out.rows[i] = row;
        }
        out
    }

    /// Reflexive-transitive closure.
    pub(crate) fn star(&self) -> Rel {
        let mut rows = self.rows.clone();
        for (i, row) in rows.iter_mut().enumerate() {
            *row |= 1u64 << i;
        }
        for k in 0..self.n {
            let rk = rows[k];
            for row in rows.iter_mut() {
                if *row >> k & 1 == 1 {
                    *row |= rk;
                }
            }
        }
        Rel { n: self.n, rows }
    }

    /// Points at which every successor lies in `mask`.
    pub(crate) fn box_over(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        for i in 0..self.n {
            if self.rows[i] & !mask == 0 {
                out |= 1u64 << i;
            }
        }
        out
    }
}

/// Dense form of a model: points are indexed `world * n_agents + agent`, so a
/// world occupies one contiguous block of bits and an agent one stride.
#[derive(Debug, Clone)]
pub(crate) struct Dense<'a> {
    pub(crate) n_worlds: usize,
    pub(crate) n_agents: usize,
    pub(crate) world_names: Vec<Cow<'a, str>>,
    pub(crate) agent_names: Vec<&'a str>,
    /// Same-agent pairs only.
    pub(crate) k: Rel,
    /// Same-world pairs only.
    pub(crate) f: Rel,
    pub(crate) d: Option<Rel>,
    pub(crate) g: Vec<(Cow<'a, str>, usize)>,
    pub(crate) val: Vec<(Cow<'a, str>, u64)>,
}

impl<'a> Dense<'a> {
    pub(crate) fn n_points(&self) -> usize {
        self.n_worlds * self.n_agents
    }

    pub(crate) fn full_mask(&self) -> u64 {
        full_mask(self.n_points())
    }

    pub(crate) fn point_index(&self, w: usize, a: usize) -> usize {
        w * self.n_agents + a
    }

    fn world_of(&self, point: usize) -> usize {
        point / self.n_agents
    }

    fn agent_of(&self, point: usize) -> usize {
        point % self.n_agents
    }

    /// All points of one world.
    fn world_block(&self, w: usize) -> u64 {
        (full_mask(self.n_agents)) << (w * self.n_agents)
    }

    /// All points of one agent.
    fn agent_column(&self, a: usize) -> u64 {
        let mut out = 0u64;
        for w in 0..self.n_worlds {
            out |= 1u64 << self.point_index(w, a);
        }
        out
    }

    fn lookup_nominal(&self, token: &str) -> Result<usize, EvalError> {
        self.g
            .iter()
            .rev()
            .find(|(t, _)| t == token)
            .map(|&(_, a)| a)
            .ok_or_else(|| EvalError::UnknownNominal(token.to_string()))
    }

    fn lookup_prop(&self, token: &str) -> u64 {
        self.val
            .iter()
            .find(|(t, _)| t == token)
            .map(|&(_, m)| m)
            .unwrap_or(0)
    }

    fn is_named_agent(&self) -> bool {
        (0..self.n_agents).all(|a| self.g.iter().any(|&(_, b)| b == a))
    }

    fn with_nominal(&self, token: &str, agent: usize) -> Dense<'a> {
        let mut out = self.clone();
        out.g.retain(|(t, _)| t != token);
        out.g.push((Cow::Owned(token.to_string()), agent));
        out
    }

    pub(crate) fn from_model(m: &'a EflModel) -> Result<Dense<'a>, EvalError> {
        let n_worlds = m.worlds().len();
        let n_agents = m.agents().len();
        let n = n_worlds * n_agents;
        if n > MAX_POINTS {
            return Err(EvalError::ModelTooLarge(n));
        }
        let widx: BTreeMap<&str, usize> = m
            .worlds()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let aidx: BTreeMap<&str, usize> = m
            .agents()
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let mut k = Rel::empty(n);
        for (ai, agent) in m.agents().iter().enumerate() {
            for (u, v) in m.k_pairs(agent) {
                let (ui, vi) = (widx[u.as_str()], widx[v.as_str()]);
                k.set(ui * n_agents + ai, vi * n_agents + ai);
            }
        }
        let mut f = Rel::empty(n);
        let mut d = m.has_want_relation().then(|| Rel::empty(n));
        for (wi, world) in m.worlds().iter().enumerate() {
            for (a, b) in m.f_pairs(world) {
                f.set(
                    wi * n_agents + aidx[a.as_str()],
                    wi * n_agents + aidx[b.as_str()],
                );
            }
            if let Some(d) = d.as_mut() {
                for (a, b) in m.d_pairs(world) {
                    d.set(
                        wi * n_agents + aidx[a.as_str()],
                        wi * n_agents + aidx[b.as_str()],
                    );
                }
            }
        }
        let g = m
            .nominals()
            .map(|(tok, agent)| (Cow::Borrowed(tok), aidx[agent.as_str()]))
            .collect();
        let val = m
            .props()
            .map(|prop| {
                let mut mask = 0u64;
                for p in m.valuation(prop) {
                    mask |= 1u64 << (widx[p.world.as_str()] * n_agents + aidx[p.agent.as_str()]);
                }
                (Cow::Borrowed(prop), mask)
            })
            .collect();
        Ok(Dense {
            n_worlds,
            n_agents,
            world_names: m
                .worlds()
                .iter()
                .map(|w| Cow::Borrowed(w.as_str()))
                .collect(),
            agent_names: m.agents().iter().map(|a| a.as_str()).collect(),
            k,
            f,
            d,
            g,
            val,
        })
    }

    pub(crate) fn to_model(&self) -> EflModel {
        let worlds: Vec<WorldId> = self
            .world_names
            .iter()
            .map(|w| WorldId::new(w.as_ref()))
            .collect();
        let agents: Vec<AgentId> = self.agent_names.iter().map(|a| AgentId::new(*a)).collect();
        let mut k = BTreeMap::new();
        for (ai, agent) in agents.iter().enumerate() {
            let mut pairs = BTreeSet::new();
            for u in 0..self.n_worlds {
                for v in 0..self.n_worlds {
                    if self
                        .k
                        .contains(self.point_index(u, ai), self.point_index(v, ai))
                    {
                        pairs.insert((worlds[u].clone(), worlds[v].clone()));
                    }
                }
            }
            k.insert(agent.clone(), pairs);
        }
        let mut f = BTreeMap::new();
        let mut d_out = self.d.as_ref().map(|_| BTreeMap::new());
        for (wi, world) in worlds.iter().enumerate() {
            let mut pairs = BTreeSet::new();
            for a in 0..self.n_agents {
                for b in 0..self.n_agents {
                    if self
                        .f
                        .contains(self.point_index(wi, a), self.point_index(wi, b))
                    {
                        pairs.insert((agents[a].clone(), agents[b].clone()));
                    }
                }
            }
            f.insert(world.clone(), pairs);
            if let (Some(d_out), Some(d)) = (d_out.as_mut(), self.d.as_ref()) {
                let mut pairs = BTreeSet::new();
                for a in 0..self.n_agents {
                    for b in 0..self.n_agents {
                        if d.contains(self.point_index(wi, a), self.point_index(wi, b)) {
                            pairs.insert((agents[a].clone(), agents[b].clone()));
                        }
                    }
                }
                d_out.insert(world.clone(), pairs);
            }
        }
        let g = self
            .g
            .iter()
            .map(|(tok, a)| (tok.to_string(), agents[*a].clone()))
            .collect();
        let val = self
            .val
            .iter()
            .map(|(tok, mask)| {
                let mut points = BTreeSet::new();
                let mut bits = *mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    points.insert(Point {
                        world: worlds[self.world_of(i)].clone(),
                        agent: agents[self.agent_of(i)].clone(),
                    });
                }
                (tok.to_string(), points)
            })
            .collect();
        EflModel::from_parts(worlds, agents, k, f, d_out, g, val)
    }

    pub(crate) fn mask_to_points(&self, mask: u64) -> PointSet {
        let mut out = BTreeSet::new();
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out.insert(self.point_of(i));
        }
        PointSet(out)
    }

    pub(crate) fn point_of(&self, i: usize) -> Point {
        Point {
            world: WorldId::new(self.world_names[self.world_of(i)].as_ref()),
            agent: AgentId::new(self.agent_names[self.agent_of(i)]),
        }
    }

    pub(crate) fn rel_to_pairs(&self, rel: &Rel) -> PointRelation {
        let mut out = BTreeSet::new();
        for i in 0..rel.n {
            let mut bits = rel.rows[i];
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                out.insert((self.point_of(i), self.point_of(j)));
            }
        }
        PointRelation(out)
    }

    /// The universal same-world relation.
    fn a_rel(&self) -> Rel {
        let mut r = Rel::empty(self.n_points());
        for w in 0..self.n_worlds {
            let block = self.world_block(w);
            for a in 0..self.n_agents {
                r.rows[self.point_index(w, a)] = block;
            }
        }
        r
    }

    // -- evaluation --------------------------------------------------------

    pub(crate) fn eval(&self, phi: &Formula, strict: bool) -> Result<u64, EvalError> {
        match phi {
            Formula::Bool(true) => Ok(self.full_mask()),
            Formula::Bool(false) => Ok(0),
            Formula::Prop(t) => Ok(self.lookup_prop(t)),
            Formula::Nom(t) => Ok(self.agent_column(self.lookup_nominal(t)?)),
            Formula::Not(f) => Ok(self.full_mask() & !self.eval(f, strict)?),
            Formula::And(a, b) => Ok(self.eval(a, strict)? & self.eval(b, strict)?),
            Formula::BoxK(f) => {
                let m = self.eval(f, strict)?;
                Ok(self.k.box_over(m))
            }
            Formula::BoxF(f) => {
                let m = self.eval(f, strict)?;
                Ok(self.f.box_over(m))
            }
            Formula::BoxA(f) => {
                let m = self.eval(f, strict)?;
                let mut out = 0u64;
                for w in 0..self.n_worlds {
                    let block = self.world_block(w);
                    if block & !m == 0 {
                        out |= block;
                    }
                }
                Ok(out)
            }
            Formula::BoxD(f) => {
                let d = self.d.as_ref().ok_or(EvalError::WantRelationMissing)?;
                let m = self.eval(f, strict)?;
                Ok(d.box_over(m))
            }
            Formula::At(n, f) => {
                let a = self.lookup_nominal(n)?;
                let m = self.eval(f, strict)?;
                let mut out = 0u64;
                for w in 0..self.n_worlds {
                    if m >> self.point_index(w, a) & 1 == 1 {
                        out |= self.world_block(w);
                    }
                }
                Ok(out)
            }
            Formula::Down(n, f) => {
                if !self.is_named_agent() {
                    return Err(EvalError::DownRequiresNamedAgents);
                }
                let mut out = 0u64;
                for a in 0..self.n_agents {
                    let rebound = self.with_nominal(n, a);
                    out |= rebound.eval(f, strict)? & self.agent_column(a);
                }
                Ok(out)
            }
            Formula::ProgBox(p, f) => {
                let rel = self.denote(p, None, strict)?;
                let m = self.eval(f, strict)?;
                Ok(rel.box_over(m))
            }
            Formula::Dyn(op, f) => {
                let (next, map) = self.apply_op(op, strict)?;
                let m = next.eval(f, strict)?;
                let mut out = 0u64;
                for i in 0..self.n_points() {
                    if m >> map.apply(i) & 1 == 1 {
                        out |= 1u64 << i;
                    }
                }
                Ok(out)
            }
            Formula::Sugar(_) => self.eval(&expand(phi), strict),
        }
    }

    pub(crate) fn denote(
        &self,
        prog: &Program,
        env: Option<&BTreeMap<&str, Rel>>,
        strict: bool,
    ) -> Result<Rel, EvalError> {
        match prog {
            Program::K => Ok(self.k.clone()),
            Program::F => Ok(self.f.clone()),
            Program::A => Ok(self.a_rel()),
            Program::D => self.d.clone().ok_or(EvalError::WantRelationMissing),
            Program::Internal(t) => env
                .and_then(|e| e.get(t.as_str()).cloned())
                .ok_or_else(|| EvalError::UnboundInternal(t.clone())),
            Program::Test(f) => Ok(Rel::from_diag(self.eval(f, strict)?, self.n_points())),
            Program::Seq(a, b) => Ok(self
                .denote(a, env, strict)?
                .compose(&self.denote(b, env, strict)?)),
            Program::Union(a, b) => Ok(self
                .denote(a, env, strict)?
                .union(&self.denote(b, env, strict)?)),
            Program::Star(p) => Ok(self.denote(p, env, strict)?.star()),
        }
    }

    pub(crate) fn apply_op(
        &self,
        op: &DynOp,
        strict: bool,
    ) -> Result<(Dense<'a>, PointMap), EvalError> {
        match op {
            DynOp::Trans(t) => {
                let next = self.apply_trans(t, None, strict)?;
                Ok((next, PointMap::Identity))
            }
            DynOp::Gddl(g) => {
                let next = self.apply_gddl(g, strict)?;
                Ok((
                    next,
                    PointMap::Product {
                        n_agents: self.n_agents,
                        n_actions: g.actions().len(),
                        actual: g.actual_index(),
                    },
                ))
            }
        }
    }

    /// Applies a transformation. All right-hand sides are denoted in `self`
    /// before anything is installed, so assignments are simultaneous.
    pub(crate) fn apply_trans(
        &self,
        t: &PdlTransformation,
        env: Option<&BTreeMap<&str, Rel>>,
        strict: bool,
    ) -> Result<Dense<'a>, EvalError> {
        let mut new_k = None;
        let mut new_f = None;
        let mut new_d = None;
        let mut new_props: Vec<(&str, u64)> = Vec::new();
        let mut new_noms: Vec<(&str, usize)> = Vec::new();
        for (target, rhs) in t.assignments() {
            match (target, rhs) {
                (AssignTarget::K, AssignRhs::Program(p)) => {
                    let rel = self.denote(p, env, strict)?;
                    self.check_same_agent(&rel, "K")?;
                    new_k = Some(rel);
                }
                (AssignTarget::F, AssignRhs::Program(p)) => {
                    let rel = self.denote(p, env, strict)?;
                    self.check_same_world(&rel, "F")?;
                    new_f = Some(rel);
                }
                (AssignTarget::D, AssignRhs::Program(p)) => {
                    let rel = self.denote(p, env, strict)?;
                    self.check_same_world(&rel, "D")?;
                    new_d = Some(rel);
                }
                (AssignTarget::Prop(tok), AssignRhs::Formula(f)) => {
                    new_props.push((tok, self.eval(f, strict)?));
                }
                (AssignTarget::Nominal(tok), AssignRhs::Formula(f)) => {
                    let mask = self.eval(f, strict)?;
                    let agent = (0..self.n_agents)
                        .find(|&a| mask == self.agent_column(a))
                        .ok_or_else(|| EvalError::NominalNotRigid(tok.clone()))?;
                    new_noms.push((tok, agent));
                }
                // The constructors pair targets with the right kind of
                // right-hand side; any other combination is unreachable.
                _ => unreachable!("mismatched assignment"),
            }
        }
        let mut out = self.clone();
        if let Some(k) = new_k {
            out.k = k;
        }
        if let Some(f) = new_f {
            out.f = f;
        }
        if let Some(d) = new_d {
            out.d = Some(d);
        }
        for (tok, mask) in new_props {
            if let Some(entry) = out.val.iter_mut().find(|(t, _)| t == tok) {
                entry.1 = mask;
            } else {
                out.val.push((Cow::Owned(tok.to_string()), mask));
            }
        }
        for (tok, agent) in new_noms {
            out.g.retain(|(t, _)| t != tok);
            out.g.push((Cow::Owned(tok.to_string()), agent));
        }
        if strict {
            let violations = out.frame_violations();
            if !violations.is_empty() {
                return Err(EvalError::EflViolation(violations));
            }
        }
        Ok(out)
    }

    /// Forms the product with the action set, lifts the internal relations,
    /// and applies the integrating transformation.
    pub(crate) fn apply_gddl(
        &self,
        op: &GddlOperator,
        strict: bool,
    ) -> Result<Dense<'a>, EvalError> {
        let n_actions = op.actions().len();
        let n = self.n_points() * n_actions;
        if n > MAX_POINTS {
            return Err(EvalError::ModelTooLarge(n));
        }
        // Transform one copy of the model per action. Frame conditions are
        // only meaningful after integration, so the slabs are built
        // structurally even in strict mode.
        let slabs: Vec<Dense<'a>> = op
            .actions()
            .iter()
            .map(|(_, t)| self.apply_trans(t, None, false))
            .collect::<Result<_, _>>()?;

        let n_worlds = self.n_worlds * n_actions;
        let n_agents = self.n_agents;
        // Product world (w, d_i) has index w * n_actions + i.
        let lift = |slab: usize, point: usize| -> usize {
            let (w, a) = (point / n_agents, point % n_agents);
            (w * n_actions + slab) * n_agents + a
        };
        let mut k = Rel::empty(n);
        let mut f = Rel::empty(n);
        let has_d = slabs.iter().filter(|s| s.d.is_some()).count();
        if has_d != 0 && has_d != slabs.len() {
            return Err(EvalError::MixedWantRelation);
        }
        let mut d = (has_d == slabs.len()).then(|| Rel::empty(n));
        for (si, slab) in slabs.iter().enumerate() {
            for i in 0..slab.n_points() {
                let mut bits = slab.k.rows[i];
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    k.set(lift(si, i), lift(si, j));
                }
                let mut bits = slab.f.rows[i];
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    f.set(lift(si, i), lift(si, j));
                }
                if let (Some(d), Some(slab_d)) = (d.as_mut(), slab.d.as_ref()) {
                    let mut bits = slab_d.rows[i];
                    while bits != 0 {
                        let j = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        d.set(lift(si, i), lift(si, j));
                    }
                }
            }
        }
        let world_names: Vec<Cow<'a, str>> = (0..self.n_worlds)
            .flat_map(|w| {
                op.actions()
                    .iter()
                    .map(move |(id, _)| Cow::Owned(format!("{}@{}", self.world_names[w], id)))
            })
            .collect();
        // Valuation and naming are inherited pointwise: per-action
        // transformations cannot touch them.
        let val = self
            .val
            .iter()
            .map(|(tok, mask)| {
                let mut out = 0u64;
                let mut bits = *mask;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for s in 0..n_actions {
                        out |= 1u64 << lift(s, i);
                    }
                }
                (tok.clone(), out)
            })
            .collect();
        let product = Dense {
            n_worlds,
            n_agents,
            world_names,
            agent_names: self.agent_names.clone(),
            k,
            f,
            d,
            g: self.g.clone(),
            val,
        };
        // Internal relations relate the action copies of each world,
        // agent-wise.
        let action_index: BTreeMap<&str, usize> = op
            .actions()
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i))
            .collect();
        let mut env: BTreeMap<&str, Rel> = BTreeMap::new();
        for (name, pairs) in op.internal() {
            let mut rel = Rel::empty(n);
            for (da, db) in pairs {
                let (sa, sb) = (action_index[da.as_str()], action_index[db.as_str()]);
                for i in 0..self.n_points() {
                    rel.set(lift(sa, i), lift(sb, i));
                }
            }
            env.insert(name.as_str(), rel);
        }
        product.apply_trans(op.integrate(), Some(&env), strict)
    }

    fn check_same_agent(&self, rel: &Rel, target: &str) -> Result<(), EvalError> {
        for i in 0..rel.n {
            if rel.rows[i] & !self.agent_column(self.agent_of(i)) != 0 {
                return Err(EvalError::CrossDimension {
                    target: target.to_string(),
                    dimension: "agent".to_string(),
                });
            }
        }
        Ok(())
    }

    fn check_same_world(&self, rel: &Rel, target: &str) -> Result<(), EvalError> {
        for i in 0..rel.n {
            if rel.rows[i] & !self.world_block(self.world_of(i)) != 0 {
                return Err(EvalError::CrossDimension {
                    target: target.to_string(),
                    dimension: "world".to_string(),
                });
            }
        }
        Ok(())
    }

    /// Frame-condition violations, in the same order as
    /// [`EflModel::validate`]: per-agent knowledge conditions, then per-world
    /// friendship conditions.
    pub(crate) fn frame_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let world_id = |w: usize| WorldId::new(self.world_names[w].as_ref());
        let agent_id = |a: usize| AgentId::new(self.agent_names[a]);
        for a in 0..self.n_agents {
            for u in 0..self.n_worlds {
                let i = self.point_index(u, a);
                if !self.k.contains(i, i) {
                    out.push(Violation::KNotReflexive {
                        agent: agent_id(a),
                        world: world_id(u),
                    });
                }
                let mut bits = self.k.rows[i];
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if !self.k.contains(j, i) {
                        out.push(Violation::KNotSymmetric {
                            agent: agent_id(a),
                            from: world_id(u),
                            to: world_id(self.world_of(j)),
                        });
                    }
                    // Transitivity: successors of successors must stay inside.
                    if self.k.rows[j] & !self.k.rows[i] != 0 {
                        let extra = self.k.rows[j] & !self.k.rows[i];
                        let t = extra.trailing_zeros() as usize;
                        out.push(Violation::KNotTransitive {
                            agent: agent_id(a),
                            from: world_id(u),
                            via: world_id(self.world_of(j)),
                            to: world_id(self.world_of(t)),
                        });
                    }
                }
            }
        }
        for w in 0..self.n_worlds {
            for a in 0..self.n_agents {
                let i = self.point_index(w, a);
                if self.f.contains(i, i) {
                    out.push(Violation::FReflexive {
                        world: world_id(w),
                        agent: agent_id(a),
                    });
                }
                let mut bits = self.f.rows[i];
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    if i != j && !self.f.contains(j, i) {
                        out.push(Violation::FNotSymmetric {
                            world: world_id(w),
                            from: agent_id(a),
                            to: agent_id(self.agent_of(j)),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Where each pre-transformation point lands in the transformed model.
#[derive(Debug, Clone, Copy)]
pub(crate) enum PointMap {
    Identity,
    /// GDDL products send `(w, a)` to `((w, actual), a)`.
    Product {
        n_agents: usize,
        n_actions: usize,
        actual: usize,
    },
}

impl PointMap {
    pub(crate) fn apply(&self, i: usize) -> usize {
        match *self {
            PointMap::Identity => i,
            PointMap::Product {
                n_agents,
                n_actions,
                actual,
            } => {
                let (w, a) = (i / n_agents, i % n_agents);
                (w * n_actions + actual) * n_agents + a
            }
        }
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
