//! Finite two-dimensional Kripke models.
//!
//! A model carries a set of epistemic states (worlds), a set of agents, one
//! equivalence relation `k_a` over worlds per agent, one symmetric irreflexive
//! friendship relation `f_w` over agents per world, an optional "want"
//! relation `d_w` per world, a naming map from agent nominals to agents, and a
//! valuation assigning each propositional variable a set of (world, agent)
//! points. Formulas are evaluated at points, so a proposition may be true of
//! one agent and false of another in the same world.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Identifier of an epistemic state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(String);

impl WorldId {
    pub fn new(id: impl Into<String>) -> Self {
        WorldId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for WorldId {
    fn from(s: &str) -> Self {
        WorldId::new(s)
    }
}

/// Identifier of an agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

/// An evaluation index: a world paired with an agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub world: WorldId,
    pub agent: AgentId,
}

impl Point {
    pub fn new(world: impl Into<WorldId>, agent: impl Into<AgentId>) -> Self {
        Point {
            world: world.into(),
            agent: agent.into(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.world, self.agent)
    }
}

/// Errors raised while constructing or manipulating models.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown nominal `{0}`")]
    UnknownNominal(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("duplicate agent `{0}`")]
    DuplicateAgent(String),
    #[error("model has no worlds")]
    NoWorlds,
    #[error("model has no agents")]
    NoAgents,
    #[error("world map is not a bijection: {0}")]
    WorldMapNotBijective(String),
    #[error("agent map is not a bijection: {0}")]
    AgentMapNotBijective(String),
}

/// One broken model condition, reported as data rather than as a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    KNotReflexive {
        agent: AgentId,
        world: WorldId,
    },
    KNotSymmetric {
        agent: AgentId,
        from: WorldId,
        to: WorldId,
    },
    KNotTransitive {
        agent: AgentId,
        from: WorldId,
        via: WorldId,
        to: WorldId,
    },
    FReflexive {
        world: WorldId,
        agent: AgentId,
    },
    FNotSymmetric {
        world: WorldId,
        from: AgentId,
        to: AgentId,
    },
    ValuationOutsideModel {
        prop: String,
        point: Point,
    },
    NominalUnknownAgent {
        nominal: String,
        agent: AgentId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KNotReflexive { agent, world } => {
                write!(f, "k_{agent} is not reflexive at {world}")
            }
            Violation::KNotSymmetric { agent, from, to } => {
                write!(
                    f,
                    "k_{agent} is not symmetric: has ({from},{to}) but not ({to},{from})"
                )
            }
            Violation::KNotTransitive {
                agent,
                from,
                via,
                to,
            } => {
                write!(f, "k_{agent} is not transitive: ({from},{via}) and ({via},{to}) but not ({from},{to})")
            }
            Violation::FReflexive { world, agent } => {
                write!(
                    f,
                    "f_{world} is not irreflexive: contains ({agent},{agent})"
                )
            }
            Violation::FNotSymmetric { world, from, to } => {
                write!(
                    f,
                    "f_{world} is not symmetric: has ({from},{to}) but not ({to},{from})"
                )
            }
            Violation::ValuationOutsideModel { prop, point } => {
                write!(
                    f,
                    "valuation of `{prop}` contains {point}, which is outside the model"
                )
            }
            Violation::NominalUnknownAgent { nominal, agent } => {
                write!(
                    f,
                    "nominal `{nominal}` names `{agent}`, which is not an agent of the model"
                )
            }
        }
    }
}

type AgentPairs = BTreeSet<(AgentId, AgentId)>;

/// A finite model for epistemic friendship logic.
///
/// Immutable once built; every operation that changes a model returns a new
/// one, so models can be shared freely between threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EflModel {
    worlds: Vec<WorldId>,
    agents: Vec<AgentId>,
    /// Per agent, the full (closed) relation over worlds, ordered pairs
    /// including the diagonal.
    k: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>>,
    /// Per world, the friendship relation over agents, stored with both
    /// directions of each edge and no diagonal.
    f: BTreeMap<WorldId, AgentPairs>,
    /// Per world, the want relation; `None` when the model does not carry one.
    d: Option<BTreeMap<WorldId, AgentPairs>>,
    /// Agent nominals.
    g: BTreeMap<String, AgentId>,
    /// Valuation; props with empty extensions are not stored.
    val: BTreeMap<String, BTreeSet<Point>>,
}

impl EflModel {
    pub fn builder() -> ModelBuilder {
        ModelBuilder::new()
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn has_world(&self, w: &WorldId) -> bool {
        self.worlds.contains(w)
    }

    pub fn has_agent(&self, a: &AgentId) -> bool {
        self.agents.contains(a)
    }

    /// The closed indistinguishability relation of `agent`, as ordered pairs.
    pub fn k_pairs(&self, agent: &AgentId) -> BTreeSet<(WorldId, WorldId)> {
        self.k.get(agent).cloned().unwrap_or_default()
    }

    pub fn k_related(&self, agent: &AgentId, from: &WorldId, to: &WorldId) -> bool {
        self.k
            .get(agent)
            .is_some_and(|r| r.contains(&(from.clone(), to.clone())))
    }

    /// The friendship relation at `world`, both directions of every edge.
    pub fn f_pairs(&self, world: &WorldId) -> AgentPairs {
        self.f.get(world).cloned().unwrap_or_default()
    }

    pub fn friends(&self, world: &WorldId, a: &AgentId, b: &AgentId) -> bool {
        self.f
            .get(world)
            .is_some_and(|r| r.contains(&(a.clone(), b.clone())))
    }

    pub fn has_want_relation(&self) -> bool {
        self.d.is_some()
    }

    /// The want relation at `world`, or an empty set when the model carries
    /// none.
    pub fn d_pairs(&self, world: &WorldId) -> AgentPairs {
        self.d
            .as_ref()
            .and_then(|m| m.get(world).cloned())
            .unwrap_or_default()
    }

    pub fn wants(&self, world: &WorldId, a: &AgentId, b: &AgentId) -> bool {
        self.d
            .as_ref()
            .and_then(|m| m.get(world))
            .is_some_and(|r| r.contains(&(a.clone(), b.clone())))
    }

    pub fn nominal(&self, token: &str) -> Option<&AgentId> {
        self.g.get(token)
    }

    pub fn nominals(&self) -> impl Iterator<Item = (&str, &AgentId)> {
        self.g.iter().map(|(n, a)| (n.as_str(), a))
    }

    pub fn nominal_tokens(&self) -> BTreeSet<String> {
        self.g.keys().cloned().collect()
    }

    pub fn props(&self) -> impl Iterator<Item = &str> {
        self.val.keys().map(|p| p.as_str())
    }

    pub fn valuation(&self, prop: &str) -> BTreeSet<Point> {
        self.val.get(prop).cloned().unwrap_or_default()
    }

    pub fn holds_at(&self, prop: &str, point: &Point) -> bool {
        self.val.get(prop).is_some_and(|s| s.contains(point))
    }

    pub fn contains_point(&self, point: &Point) -> bool {
        self.has_world(&point.world) && self.has_agent(&point.agent)
    }

    /// Builds the point from string tokens, checking membership.
    pub fn point(&self, world: &str, agent: &str) -> Result<Point, ModelError> {
        let world = WorldId::new(world);
        let agent = AgentId::new(agent);
        if !self.has_world(&world) {
            return Err(ModelError::UnknownWorld(world.0));
        }
        if !self.has_agent(&agent) {
            return Err(ModelError::UnknownAgent(agent.0));
        }
        Ok(Point { world, agent })
    }

    /// True when every agent is named by at least one nominal.
    pub fn is_named_agent(&self) -> bool {
        self.agents.iter().all(|a| self.g.values().any(|b| b == a))
    }

    /// Checks every model condition and reports each failure. An empty list
    /// means the model is a proper EFL model.
    ///
    /// Violations come out in a fixed order: agents in model order for the
    /// `k` conditions, then worlds in model order for the `f` conditions,
    /// then valuation and naming checks.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for agent in &self.agents {
            let rel = self.k.get(agent).cloned().unwrap_or_default();
            for w in &self.worlds {
                if !rel.contains(&(w.clone(), w.clone())) {
                    out.push(Violation::KNotReflexive {
                        agent: agent.clone(),
                        world: w.clone(),
                    });
                }
            }
            for (from, to) in &rel {
                if !rel.contains(&(to.clone(), from.clone())) {
                    out.push(Violation::KNotSymmetric {
                        agent: agent.clone(),
                        from: from.clone(),
                        to: to.clone(),
                    });
                }
            }
            for (from, via) in &rel {
                for (via2, to) in &rel {
                    if via == via2 && !rel.contains(&(from.clone(), to.clone())) {
                        out.push(Violation::KNotTransitive {
                            agent: agent.clone(),
                            from: from.clone(),
                            via: via.clone(),
                            to: to.clone(),
                        });
                    }
                }
            }
        }
        for world in &self.worlds {
            let rel = self.f_pairs(world);
            for (a, b) in &rel {
                if a == b {
                    out.push(Violation::FReflexive {
                        world: world.clone(),
                        agent: a.clone(),
                    });
                } else if !rel.contains(&(b.clone(), a.clone())) {
                    out.push(Violation::FNotSymmetric {
                        world: world.clone(),
                        from: a.clone(),
                        to: b.clone(),
                    });
                }
            }
        }
        for (prop, points) in &self.val {
            for p in points {
                if !self.contains_point(p) {
                    out.push(Violation::ValuationOutsideModel {
                        prop: prop.clone(),
                        point: p.clone(),
                    });
                }
            }
        }
        for (nominal, agent) in &self.g {
            if !self.has_agent(agent) {
                out.push(Violation::NominalUnknownAgent {
                    nominal: nominal.clone(),
                    agent: agent.clone(),
                });
            }
        }
        out
    }

    /// Returns the model in which `nominal` names `agent`; everything else is
    /// untouched. The nominal may be new.
    pub fn rename(&self, nominal: &str, agent: &AgentId) -> Result<EflModel, ModelError> {
        if !self.has_agent(agent) {
            return Err(ModelError::UnknownAgent(agent.0.clone()));
        }
        let mut out = self.clone();
        out.g.insert(nominal.to_string(), agent.clone());
        Ok(out)
    }

    /// A nominal token not currently in use by this model.
    pub fn fresh_nominal(&self) -> String {
        let mut i = 0usize;
        loop {
            let cand = format!("n{i}");
            if !self.g.contains_key(&cand) {
                return cand;
            }
            i += 1;
        }
    }

    /// True when `world_map` and `agent_map` carry this model exactly onto
    /// `other`: same shape of `k`, `f`, `d`, `g` and valuation under the maps.
    pub fn equal_modulo_iso(
        &self,
        other: &EflModel,
        world_map: &BTreeMap<WorldId, WorldId>,
        agent_map: &BTreeMap<AgentId, AgentId>,
    ) -> Result<bool, ModelError> {
        // Both maps must be bijections between the respective carriers.
        if world_map.len() != self.worlds.len()
            || self.worlds.iter().any(|w| !world_map.contains_key(w))
        {
            return Err(ModelError::WorldMapNotBijective(
                "domain does not match the source worlds".into(),
            ));
        }
        let image: BTreeSet<_> = world_map.values().collect();
        if image.len() != other.worlds.len() || other.worlds.iter().any(|w| !image.contains(w)) {
            return Err(ModelError::WorldMapNotBijective(
                "image does not match the target worlds".into(),
            ));
        }
        if agent_map.len() != self.agents.len()
            || self.agents.iter().any(|a| !agent_map.contains_key(a))
        {
            return Err(ModelError::AgentMapNotBijective(
                "domain does not match the source agents".into(),
            ));
        }
        let image: BTreeSet<_> = agent_map.values().collect();
        if image.len() != other.agents.len() || other.agents.iter().any(|a| !image.contains(a)) {
            return Err(ModelError::AgentMapNotBijective(
                "image does not match the target agents".into(),
            ));
        }
        let mw = |w: &WorldId| world_map[w].clone();
        let ma = |a: &AgentId| agent_map[a].clone();

        for agent in &self.agents {
            let mapped: BTreeSet<_> = self
                .k_pairs(agent)
                .iter()
                .map(|(u, v)| (mw(u), mw(v)))
                .collect();
            if mapped != other.k_pairs(&ma(agent)) {
                return Ok(false);
            }
        }
        for world in &self.worlds {
            let mapped: BTreeSet<_> = self
                .f_pairs(world)
                .iter()
                .map(|(a, b)| (ma(a), ma(b)))
                .collect();
            if mapped != other.f_pairs(&mw(world)) {
                return Ok(false);
            }
        }
        if self.d.is_some() != other.d.is_some() {
            return Ok(false);
        }
        if self.d.is_some() {
            for world in &self.worlds {
                let mapped: BTreeSet<_> = self
                    .d_pairs(world)
                    .iter()
                    .map(|(a, b)| (ma(a), ma(b)))
                    .collect();
                if mapped != other.d_pairs(&mw(world)) {
                    return Ok(false);
                }
            }
        }
        let g_mapped: BTreeMap<_, _> = self.g.iter().map(|(n, a)| (n.clone(), ma(a))).collect();
        if g_mapped != other.g {
            return Ok(false);
        }
        let val_mapped: BTreeMap<String, BTreeSet<Point>> = self
            .val
            .iter()
            .map(|(p, pts)| {
                (
                    p.clone(),
                    pts.iter()
                        .map(|pt| Point {
                            world: mw(&pt.world),
                            agent: ma(&pt.agent),
                        })
                        .collect(),
                )
            })
            .collect();
        if val_mapped != other.val {
            return Ok(false);
        }
        Ok(true)
    }

    /// Identity-map comparison, for models over the same carriers.
    pub fn equal_under_identity(&self, other: &EflModel) -> Result<bool, ModelError> {
        let wm = self.worlds.iter().map(|w| (w.clone(), w.clone())).collect();
        let am = self.agents.iter().map(|a| (a.clone(), a.clone())).collect();
        self.equal_modulo_iso(other, &wm, &am)
    }

    /// Internal constructor for components that are already closed and
    /// consistent (the dense engine and the enumerator use it).
    pub(crate) fn from_parts(
        worlds: Vec<WorldId>,
        agents: Vec<AgentId>,
        k: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>>,
        f: BTreeMap<WorldId, AgentPairs>,
        d: Option<BTreeMap<WorldId, AgentPairs>>,
        g: BTreeMap<String, AgentId>,
        mut val: BTreeMap<String, BTreeSet<Point>>,
    ) -> EflModel {
        val.retain(|_, pts| !pts.is_empty());
        EflModel {
            worlds,
            agents,
            k,
            f,
            d,
            g,
            val,
        }
    }
}

/// A model with a designated evaluation point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: EflModel,
    pub point: Point,
}

impl PointedModel {
    pub fn new(model: EflModel, point: Point) -> Result<Self, ModelError> {
        if !model.has_world(&point.world) {
            return Err(ModelError::UnknownWorld(point.world.0));
        }
        if !model.has_agent(&point.agent) {
            return Err(ModelError::UnknownAgent(point.agent.0));
        }
        Ok(PointedModel { model, point })
    }
}

/// Builder for [`EflModel`].
///
/// Relations are supplied as generators. By default the knowledge generators
/// are closed reflexively, symmetrically and transitively (matching the usual
/// diagram convention) and friendship generators symmetrically; both closures
/// can be disabled to construct deliberately broken models for `validate`.
#[derive(Clone, Debug, Default)]
pub struct ModelBuilder {
    worlds: Vec<WorldId>,
    agents: Vec<AgentId>,
    k_gen: Vec<(AgentId, WorldId, WorldId)>,
    f_gen: Vec<(WorldId, AgentId, AgentId)>,
    d_gen: Option<Vec<(WorldId, AgentId, AgentId)>>,
    names: Vec<(String, AgentId)>,
    facts: Vec<(String, WorldId, AgentId)>,
    close_k: bool,
    close_f: bool,
}

impl ModelBuilder {
    pub fn new() -> Self {
        ModelBuilder {
            close_k: true,
            close_f: true,
            ..Default::default()
        }
    }

    pub fn worlds<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<WorldId>,
    {
        self.worlds.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn agents<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<AgentId>,
    {
        self.agents.extend(ids.into_iter().map(Into::into));
        self
    }

    /// Adds a `k_agent` generator edge between two worlds.
    pub fn k(mut self, agent: &str, from: &str, to: &str) -> Self {
        self.k_gen
            .push((AgentId::new(agent), WorldId::new(from), WorldId::new(to)));
        self
    }

    /// Adds a friendship generator edge between two agents at a world.
    pub fn f(mut self, world: &str, a: &str, b: &str) -> Self {
        self.f_gen
            .push((WorldId::new(world), AgentId::new(a), AgentId::new(b)));
        self
    }

    /// Marks the model as carrying a want relation (even if empty).
    pub fn with_want_relation(mut self) -> Self {
        self.d_gen.get_or_insert_with(Vec::new);
        self
    }

    /// Adds a directed want edge at a world. No closure is applied; the want
    /// relation has no frame conditions.
    pub fn want(mut self, world: &str, from: &str, to: &str) -> Self {
        self.d_gen.get_or_insert_with(Vec::new).push((
            WorldId::new(world),
            AgentId::new(from),
            AgentId::new(to),
        ));
        self
    }

    pub fn name(mut self, nominal: &str, agent: &str) -> Self {
        self.names.push((nominal.to_string(), AgentId::new(agent)));
        self
    }

    /// Makes `prop` true at the point `(world, agent)`.
    pub fn fact(mut self, prop: &str, world: &str, agent: &str) -> Self {
        self.facts
            .push((prop.to_string(), WorldId::new(world), AgentId::new(agent)));
        self
    }

    /// Disables the equivalence closure of the knowledge generators.
    pub fn without_k_closure(mut self) -> Self {
        self.close_k = false;
        self
    }

    /// Disables the symmetric closure of the friendship generators.
    pub fn without_f_closure(mut self) -> Self {
        self.close_f = false;
        self
    }

    pub fn build(self) -> Result<EflModel, ModelError> {
        if self.worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        if self.agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let mut seen = BTreeSet::new();
        for w in &self.worlds {
            if !seen.insert(w.clone()) {
                return Err(ModelError::DuplicateWorld(w.0.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for a in &self.agents {
            if !seen.insert(a.clone()) {
                return Err(ModelError::DuplicateAgent(a.0.clone()));
            }
        }
        let world_ok = |w: &WorldId| -> Result<(), ModelError> {
            if self.worlds.contains(w) {
                Ok(())
            } else {
                Err(ModelError::UnknownWorld(w.0.clone()))
            }
        };
        let agent_ok = |a: &AgentId| -> Result<(), ModelError> {
            if self.agents.contains(a) {
                Ok(())
            } else {
                Err(ModelError::UnknownAgent(a.0.clone()))
            }
        };

        let mut k: BTreeMap<AgentId, BTreeSet<(WorldId, WorldId)>> = BTreeMap::new();
        for (agent, from, to) in &self.k_gen {
            agent_ok(agent)?;
            world_ok(from)?;
            world_ok(to)?;
            k.entry(agent.clone())
                .or_default()
                .insert((from.clone(), to.clone()));
        }
        if self.close_k {
            for agent in &self.agents {
                let gens = k.remove(agent).unwrap_or_default();
                k.insert(agent.clone(), equivalence_closure(&self.worlds, &gens));
            }
        } else {
            for agent in &self.agents {
                k.entry(agent.clone()).or_default();
            }
        }

        let mut f: BTreeMap<WorldId, AgentPairs> = BTreeMap::new();
        for (world, a, b) in &self.f_gen {
            world_ok(world)?;
            agent_ok(a)?;
            agent_ok(b)?;
            let rel = f.entry(world.clone()).or_default();
            rel.insert((a.clone(), b.clone()));
            if self.close_f {
                rel.insert((b.clone(), a.clone()));
            }
        }
        for world in &self.worlds {
            f.entry(world.clone()).or_default();
        }

        let d = match &self.d_gen {
            None => None,
            Some(edges) => {
                let mut d: BTreeMap<WorldId, AgentPairs> = BTreeMap::new();
                for (world, a, b) in edges {
                    world_ok(world)?;
                    agent_ok(a)?;
                    agent_ok(b)?;
                    d.entry(world.clone())
                        .or_default()
                        .insert((a.clone(), b.clone()));
                }
                for world in &self.worlds {
                    d.entry(world.clone()).or_default();
                }
                Some(d)
            }
        };

        let mut g = BTreeMap::new();
        for (nominal, agent) in &self.names {
            agent_ok(agent)?;
            g.insert(nominal.clone(), agent.clone());
        }

        let mut val: BTreeMap<String, BTreeSet<Point>> = BTreeMap::new();
        for (prop, world, agent) in &self.facts {
            world_ok(world)?;
            agent_ok(agent)?;
            val.entry(prop.clone()).or_default().insert(Point {
                world: world.clone(),
                agent: agent.clone(),
            });
        }

        Ok(EflModel::from_parts(
            self.worlds,
            self.agents,
            k,
            f,
            d,
            g,
            val,
        ))
    }
}

/// Reflexive-symmetric-transitive closure of generator edges over `worlds`.
fn equivalence_closure(
    worlds: &[WorldId],
    gens: &BTreeSet<(WorldId, WorldId)>,
) -> BTreeSet<(WorldId, WorldId)> {
    // Union-find over world indices.
    let index = |w: &WorldId| worlds.iter().position(|x| x == w).expect("checked");
    let mut parent: Vec<usize> = (0..worlds.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for (a, b) in gens {
        let (ra, rb) = (find(&mut parent, index(a)), find(&mut parent, index(b)));
        parent[ra] = rb;
    }
    let mut out = BTreeSet::new();
    for (i, a) in worlds.iter().enumerate() {
        for (j, b) in worlds.iter().enumerate() {
            if find(&mut parent, i) == find(&mut parent, j) {
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The two-world, two-agent model with a universal knowledge relation,
    /// constant friendship, one named agent and `p` true at `(u0, a)`.
    pub(crate) fn fig1_model() -> EflModel {
        EflModel::builder()
            .worlds(["u0", "u1"])
            .agents(["a", "b"])
            .k("a", "u0", "u1")
            .k("b", "u0", "u1")
            .f("u0", "a", "b")
            .f("u1", "a", "b")
            .name("n", "a")
            .fact("p", "u0", "a")
            .build()
            .unwrap()
    }

    #[test]
    fn fig1_model_is_valid() {
        let m = fig1_model();
        assert_eq!(m.validate(), vec![]);
        assert!(!m.is_named_agent());
    }

    #[test]
    fn reflexive_friendship_is_reported() {
        let m = EflModel::builder()
            .worlds(["u0"])
            .agents(["a", "b"])
            .f("u0", "a", "a")
            .build()
            .unwrap();
        let violations = m.validate();
        assert_eq!(
            violations,
            vec![Violation::FReflexive {
                world: WorldId::new("u0"),
                agent: AgentId::new("a"),
            }]
        );
    }

    #[test]
    fn unclosed_k_is_reported() {
        let m = EflModel::builder()
            .worlds(["u0", "u1"])
            .agents(["b"])
            .k("b", "u0", "u1")
            .without_k_closure()
            .build()
            .unwrap();
        let violations = m.validate();
        assert!(violations.contains(&Violation::KNotReflexive {
            agent: AgentId::new("b"),
            world: WorldId::new("u0"),
        }));
        assert!(violations.contains(&Violation::KNotSymmetric {
            agent: AgentId::new("b"),
            from: WorldId::new("u0"),
            to: WorldId::new("u1"),
        }));
    }

    #[test]
    fn closure_makes_equivalence() {
        let m = EflModel::builder()
            .worlds(["u0", "u1", "u2"])
            .agents(["a"])
            .k("a", "u0", "u1")
            .k("a", "u1", "u2")
            .build()
            .unwrap();
        assert_eq!(m.validate(), vec![]);
        assert!(m.k_related(&"a".into(), &"u0".into(), &"u2".into()));
        assert!(m.k_related(&"a".into(), &"u2".into(), &"u0".into()));
        assert!(m.k_related(&"a".into(), &"u1".into(), &"u1".into()));
    }

    #[test]
    fn rename_changes_only_g() {
        let m = fig1_model();
        let renamed = m.rename("n", &AgentId::new("b")).unwrap();
        assert_eq!(renamed.nominal("n"), Some(&AgentId::new("b")));
        assert_eq!(renamed.worlds(), m.worlds());
        assert_eq!(renamed.agents(), m.agents());
        assert_eq!(renamed.k_pairs(&"a".into()), m.k_pairs(&"a".into()));
        assert_eq!(renamed.f_pairs(&"u0".into()), m.f_pairs(&"u0".into()));
        assert_eq!(renamed.valuation("p"), m.valuation("p"));
        // Renaming to the current referent is the identity.
        let same = m.rename("n", &AgentId::new("a")).unwrap();
        assert_eq!(same, m);
        // Last write wins.
        let twice = m
            .rename("n", &AgentId::new("b"))
            .unwrap()
            .rename("n", &AgentId::new("a"))
            .unwrap();
        assert_eq!(twice.nominal("n"), Some(&AgentId::new("a")));
        assert!(m.rename("n", &AgentId::new("zz")).is_err());
    }

    #[test]
    fn fresh_nominals_are_fresh() {
        let m = fig1_model();
        let n1 = m.fresh_nominal();
        assert!(m.nominal(&n1).is_none());
        let m2 = m.rename(&n1, &AgentId::new("a")).unwrap();
        let n2 = m2.fresh_nominal();
        assert_ne!(n1, n2);
    }

    #[test]
    fn iso_identity_and_mismatch() {
        let m = fig1_model();
        assert!(m.equal_under_identity(&m).unwrap());
        let other = EflModel::builder()
            .worlds(["u0", "u1"])
            .agents(["a", "b"])
            .k("a", "u0", "u1")
            .k("b", "u0", "u1")
            .f("u0", "a", "b")
            .f("u1", "a", "b")
            .name("n", "a")
            .fact("p", "u1", "a")
            .build()
            .unwrap();
        assert!(!m.equal_under_identity(&other).unwrap());
    }

    #[test]
    fn iso_relabelling() {
        let m = fig1_model();
        let relabelled = EflModel::builder()
            .worlds(["v0", "v1"])
            .agents(["x", "y"])
            .k("x", "v0", "v1")
            .k("y", "v0", "v1")
            .f("v0", "x", "y")
            .f("v1", "x", "y")
            .name("n", "x")
            .fact("p", "v0", "x")
            .build()
            .unwrap();
        let wm = [("u0", "v0"), ("u1", "v1")]
            .into_iter()
            .map(|(a, b)| (WorldId::new(a), WorldId::new(b)))
            .collect();
        let am = [("a", "x"), ("b", "y")]
            .into_iter()
            .map(|(a, b)| (AgentId::new(a), AgentId::new(b)))
            .collect();
        assert!(m.equal_modulo_iso(&relabelled, &wm, &am).unwrap());
        // A non-bijective map is an error, not `false`.
        let bad: BTreeMap<WorldId, WorldId> = [(WorldId::new("u0"), WorldId::new("v0"))]
            .into_iter()
            .collect();
        assert!(m.equal_modulo_iso(&relabelled, &bad, &am).is_err());
    }

    #[test]
    fn want_relation_is_free_form() {
        let m = EflModel::builder()
            .worlds(["u0"])
            .agents(["a", "b"])
            .want("u0", "a", "b")
            .want("u0", "a", "a")
            .build()
            .unwrap();
        assert!(m.has_want_relation());
        assert_eq!(m.validate(), vec![]);
        assert!(m.wants(&"u0".into(), &"a".into(), &"b".into()));
        assert!(!m.wants(&"u0".into(), &"b".into(), &"a".into()));
    }

    #[test]
    fn nominals_may_alias() {
        // Nothing forces distinct nominals to name distinct agents.
        let m = EflModel::builder()
            .worlds(["u0"])
            .agents(["a", "b"])
            .name("n", "a")
            .name("m", "a")
            .build()
            .unwrap();
        assert_eq!(m.validate(), vec![]);
        assert_eq!(m.nominal("n"), m.nominal("m"));
        assert!(!m.is_named_agent()); // b still unnamed
    }
}
