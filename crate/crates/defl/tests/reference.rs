//! Cross-validation of the evaluation engine against a naive reference
//! implementation that transcribes the satisfaction clauses directly over
//! point sets, with none of the engine's bit-level machinery. The two are
//! compared on randomly generated models and formulas.

use std::collections::{BTreeMap, BTreeSet};

use defl::model::{AgentId, EflModel, Point, WorldId};
use defl::syntax::{AssignRhs, AssignTarget, DynOp, Formula, PdlTransformation, Program};

/// A model unfolded into plain sets: the reference works on this, never on
/// the engine's representation.
#[derive(Clone)]
struct Flat {
    worlds: Vec<WorldId>,
    agents: Vec<AgentId>,
    k: BTreeSet<(Point, Point)>,
    f: BTreeSet<(Point, Point)>,
    d: Option<BTreeSet<(Point, Point)>>,
    g: BTreeMap<String, AgentId>,
    val: BTreeMap<String, BTreeSet<Point>>,
}

impl Flat {
    fn of(m: &EflModel) -> Flat {
        let point = |w: &WorldId, a: &AgentId| Point {
            world: w.clone(),
            agent: a.clone(),
        };
        let mut k = BTreeSet::new();
        for a in m.agents() {
            for (u, v) in m.k_pairs(a) {
                k.insert((point(&u, a), point(&v, a)));
            }
        }
        let mut f = BTreeSet::new();
        let mut d = m.has_want_relation().then(BTreeSet::new);
        for w in m.worlds() {
            for (a, b) in m.f_pairs(w) {
                f.insert((point(w, &a), point(w, &b)));
            }
            if let Some(d) = d.as_mut() {
                for (a, b) in m.d_pairs(w) {
                    d.insert((point(w, &a), point(w, &b)));
                }
            }
        }
        Flat {
            worlds: m.worlds().to_vec(),
            agents: m.agents().to_vec(),
            k,
            f,
            d,
            g: m.nominals()
                .map(|(n, a)| (n.to_string(), a.clone()))
                .collect(),
            val: m.props().map(|p| (p.to_string(), m.valuation(p))).collect(),
        }
    }

    fn points(&self) -> Vec<Point> {
        self.worlds
            .iter()
            .flat_map(|w| {
                self.agents.iter().map(move |a| Point {
                    world: w.clone(),
                    agent: a.clone(),
                })
            })
            .collect()
    }

    fn truth(&self, phi: &Formula) -> BTreeSet<Point> {
        self.points()
            .into_iter()
            .filter(|p| self.sat(p, phi))
            .collect()
    }

    fn sat(&self, at: &Point, phi: &Formula) -> bool {
        match phi {
            Formula::Bool(b) => *b,
            Formula::Prop(t) => self.val.get(t).is_some_and(|s| s.contains(at)),
            Formula::Nom(t) => self.g.get(t) == Some(&at.agent),
            Formula::Not(f) => !self.sat(at, f),
            Formula::And(a, b) => self.sat(at, a) && self.sat(at, b),
            Formula::BoxK(f) => self
                .k
                .iter()
                .filter(|(from, _)| from == at)
                .all(|(_, to)| self.sat(to, f)),
            Formula::BoxF(f) => self
                .f
                .iter()
                .filter(|(from, _)| from == at)
                .all(|(_, to)| self.sat(to, f)),
            Formula::BoxA(f) => self.agents.iter().all(|b| {
                self.sat(
                    &Point {
                        world: at.world.clone(),
                        agent: b.clone(),
                    },
                    f,
                )
            }),
            Formula::BoxD(f) => self
                .d
                .as_ref()
                .expect("reference models carry d when D occurs")
                .iter()
                .filter(|(from, _)| from == at)
                .all(|(_, to)| self.sat(to, f)),
            Formula::At(n, f) => {
                let agent = self.g.get(n).expect("known nominal").clone();
                self.sat(
                    &Point {
                        world: at.world.clone(),
                        agent,
                    },
                    f,
                )
            }
            Formula::Down(n, f) => {
                let mut renamed = self.clone();
                renamed.g.insert(n.clone(), at.agent.clone());
                renamed.sat(at, f)
            }
            Formula::ProgBox(p, f) => {
                let rel = self.run(p);
                rel.iter()
                    .filter(|(from, _)| from == at)
                    .all(|(_, to)| self.sat(to, f))
            }
            Formula::Dyn(DynOp::Trans(t), f) => self.apply(t).sat(at, f),
            Formula::Dyn(DynOp::Gddl(_), _) => {
                unreachable!("the reference generator does not emit action structures")
            }
            Formula::Sugar(_) => self.sat(at, &defl::syntax::expand(phi)),
        }
    }

    fn run(&self, prog: &Program) -> BTreeSet<(Point, Point)> {
        match prog {
            Program::K => self.k.clone(),
            Program::F => self.f.clone(),
            Program::A => {
                let mut out = BTreeSet::new();
                for w in &self.worlds {
                    for a in &self.agents {
                        for b in &self.agents {
                            out.insert((
                                Point {
                                    world: w.clone(),
                                    agent: a.clone(),
                                },
                                Point {
                                    world: w.clone(),
                                    agent: b.clone(),
                                },
                            ));
                        }
                    }
                }
                out
            }
            Program::D => self.d.clone().expect("reference models carry d"),
            Program::Internal(_) => unreachable!("no action structures here"),
            Program::Test(f) => self.truth(f).into_iter().map(|p| (p.clone(), p)).collect(),
            Program::Seq(a, b) => {
                let (ra, rb) = (self.run(a), self.run(b));
                let mut out = BTreeSet::new();
                for (from, mid) in &ra {
                    for (mid2, to) in &rb {
                        if mid == mid2 {
                            out.insert((from.clone(), to.clone()));
                        }
                    }
                }
                out
            }
            Program::Union(a, b) => self.run(a).union(&self.run(b)).cloned().collect(),
            Program::Star(p) => {
                let base = self.run(p);
                let mut out: BTreeSet<(Point, Point)> =
                    self.points().into_iter().map(|p| (p.clone(), p)).collect();
                out.extend(base.iter().cloned());
                loop {
                    let mut grown = out.clone();
                    for (from, mid) in &out {
                        for (mid2, to) in &base {
                            if mid == mid2 {
                                grown.insert((from.clone(), to.clone()));
                            }
                        }
                    }
                    if grown == out {
                        return out;
                    }
                    out = grown;
                }
            }
        }
    }

    /// Structural application: all right-hand sides read the old model.
    fn apply(&self, t: &PdlTransformation) -> Flat {
        let mut next = self.clone();
        for (target, rhs) in t.assignments() {
            match (target, rhs) {
                (AssignTarget::K, AssignRhs::Program(p)) => next.k = self.run(p),
                (AssignTarget::F, AssignRhs::Program(p)) => next.f = self.run(p),
                (AssignTarget::D, AssignRhs::Program(p)) => next.d = Some(self.run(p)),
                (AssignTarget::Prop(tok), AssignRhs::Formula(f)) => {
                    next.val.insert(tok.clone(), self.truth(f));
                }
                (AssignTarget::Nominal(tok), AssignRhs::Formula(f)) => {
                    let truth = self.truth(f);
                    let named = self
                        .agents
                        .iter()
                        .find(|a| {
                            self.worlds.iter().all(|w| {
                                truth.contains(&Point {
                                    world: w.clone(),
                                    agent: (*a).clone(),
                                })
                            }) && truth.len() == self.worlds.len()
                        })
                        .expect("generator only reassigns nominals rigidly");
                    next.g.insert(tok.clone(), named.clone());
                }
                _ => unreachable!(),
            }
        }
        next
    }
}

mod generators {
    use super::*;
    use rand::Rng;

    pub fn random_model(rng: &mut impl Rng) -> EflModel {
        let n_worlds = rng.random_range(1..=3);
        let n_agents = rng.random_range(1..=3usize);
        let all = ["a", "b", "c"];
        let agents = &all[..n_agents];
        let worlds: Vec<String> = (0..n_worlds).map(|i| format!("w{i}")).collect();
        let mut b = EflModel::builder()
            .worlds(worlds.iter().map(|w| w.as_str()))
            .agents(agents.iter().copied())
            .with_want_relation();
        for agent in agents {
            b = b.name(agent, agent);
            for u in 0..n_worlds {
                for v in u + 1..n_worlds {
                    if rng.random_bool(0.4) {
                        b = b.k(agent, &worlds[u], &worlds[v]);
                    }
                }
            }
        }
        for w in &worlds {
            for i in 0..n_agents {
                for j in 0..n_agents {
                    if i < j && rng.random_bool(0.4) {
                        b = b.f(w, agents[i], agents[j]);
                    }
                    if i != j && rng.random_bool(0.3) {
                        b = b.want(w, agents[i], agents[j]);
                    }
                }
            }
        }
        for prop in ["p", "q"] {
            for w in &worlds {
                for agent in agents {
                    if rng.random_bool(0.5) {
                        b = b.fact(prop, w, agent);
                    }
                }
            }
        }
        b.build().unwrap()
    }

    /// Which base relations a generated program may step through. `K` is
    /// agent-preserving; `F`/`A`/`D` are world-preserving; assignments must
    /// stay within one dimension or the engine (rightly) rejects them.
    #[derive(Clone, Copy, PartialEq)]
    pub enum Dim {
        Agent,
        World,
        Any,
    }

    pub fn random_formula(
        rng: &mut impl Rng,
        agents: &[&AgentId],
        allow_x: bool,
        depth: usize,
    ) -> Formula {
        if depth == 0 {
            return match rng.random_range(0..5) {
                0 => Formula::prop("p"),
                1 => Formula::prop("q"),
                2 => Formula::top(),
                3 => Formula::nom(agents[rng.random_range(0..agents.len())].as_str()),
                _ if allow_x => Formula::nom("x"),
                _ => Formula::prop("p"),
            };
        }
        let sub = |rng: &mut _| random_formula(rng, agents, allow_x, depth - 1);
        match rng.random_range(0..14) {
            0 => sub(rng).not(),
            1 => sub(rng).and(sub(rng)),
            2 => sub(rng).or(sub(rng)),
            3 => sub(rng).box_k(),
            4 => sub(rng).box_f(),
            5 => sub(rng).box_a(),
            6 => sub(rng).box_d(),
            7 => Formula::at(agents[rng.random_range(0..agents.len())].as_str(), sub(rng)),
            8 => Formula::down("x", random_formula(rng, agents, true, depth - 1)),
            9 => Formula::prog_box(
                random_program(rng, agents, allow_x, Dim::Any, depth - 1),
                sub(rng),
            ),
            10 => Formula::dyn_op(random_trans(rng, agents, allow_x, depth - 1), sub(rng)),
            11 => sub(rng).dia_k(),
            _ => sub(rng),
        }
    }

    pub fn random_program(
        rng: &mut impl Rng,
        agents: &[&AgentId],
        allow_x: bool,
        dim: Dim,
        depth: usize,
    ) -> Program {
        if depth == 0 {
            return match dim {
                Dim::Agent => Program::K,
                Dim::World => match rng.random_range(0..3) {
                    0 => Program::F,
                    1 => Program::A,
                    _ => Program::D,
                },
                Dim::Any => match rng.random_range(0..4) {
                    0 => Program::K,
                    1 => Program::F,
                    2 => Program::A,
                    _ => Program::D,
                },
            };
        }
        match rng.random_range(0..6) {
            0 => Program::test(random_formula(rng, agents, allow_x, depth - 1)),
            1 => random_program(rng, agents, allow_x, dim, depth - 1).seq(random_program(
                rng,
                agents,
                allow_x,
                dim,
                depth - 1,
            )),
            2 => random_program(rng, agents, allow_x, dim, depth - 1).union(random_program(
                rng,
                agents,
                allow_x,
                dim,
                depth - 1,
            )),
            3 => random_program(rng, agents, allow_x, dim, depth - 1).star(),
            _ => random_program(rng, agents, allow_x, dim, 0),
        }
    }

    pub fn random_trans(
        rng: &mut impl Rng,
        agents: &[&AgentId],
        allow_x: bool,
        depth: usize,
    ) -> PdlTransformation {
        let mut t = PdlTransformation::identity();
        if rng.random_bool(0.7) {
            t = t.assign_k(random_program(rng, agents, allow_x, Dim::Agent, depth));
        }
        if rng.random_bool(0.4) {
            t = t.assign_f(random_program(rng, agents, allow_x, Dim::World, depth));
        }
        if rng.random_bool(0.3) {
            t = t.assign_d(random_program(rng, agents, allow_x, Dim::World, depth));
        }
        if rng.random_bool(0.4) {
            t = t.assign_prop("p", random_formula(rng, agents, allow_x, depth));
        }
        t
    }
}

#[test]
fn engine_agrees_with_the_reference_evaluator() {
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    let mut rng = StdRng::seed_from_u64(0x5EED);
    for round in 0..2500 {
        let model = generators::random_model(&mut rng);
        let agents: Vec<&AgentId> = model.agents().iter().collect();
        let phi = Formula::down("x", generators::random_formula(&mut rng, &agents, true, 3));
        let flat = Flat::of(&model);
        let expected = flat.truth(&phi);
        let got = defl::eval(&model, &phi).unwrap();
        let got_points: BTreeSet<Point> = got.points().clone();
        assert_eq!(
            got_points,
            expected,
            "round {round}: engine and reference disagree on {phi} over\n{}",
            defl::io::model_to_string(&model, None)
        );
    }
}

#[test]
fn denotations_agree_with_the_reference() {
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    let mut rng = StdRng::seed_from_u64(0xACE5);
    for round in 0..1500 {
        let model = generators::random_model(&mut rng);
        let agents: Vec<&AgentId> = model.agents().iter().collect();
        let prog = generators::random_program(&mut rng, &agents, false, generators::Dim::Any, 3);
        let flat = Flat::of(&model);
        let expected = flat.run(&prog);
        let got = defl::denote(&model, &prog).unwrap();
        let got_pairs: BTreeSet<(Point, Point)> = got.iter().cloned().collect();
        assert_eq!(
            got_pairs, expected,
            "round {round}: denotations disagree on {prog}"
        );
    }
}
