//! Worked scenario models and their documented facts.
//!
//! Four models ship with the crate: `fig1` (a minimal two-agent model),
//! `fig2` (its named-agent variant used to demonstrate transformations),
//! `spy` (a three-agent network in which a spy's friends come into danger),
//! and `gossip` (an infidelity story where friendship itself is uncertain).
//! Each carries a designated actual point and a list of formulas with their
//! expected truth values there; [`golden_suite`] adds the model-surgery
//! checks that go beyond single facts.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dynamics::{apply_gddl, apply_trans, cut_k};
use crate::engine::satisfies;
use crate::model::{AgentId, EflModel, Point, PointedModel, WorldId};
use crate::social;
use crate::syntax::{parse_formula, Formula, GddlOperator, ParseError, PdlTransformation};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}` (known: fig1, fig2, spy, gossip)")]
    Unknown(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// One documented fact: a formula and its expected value at the scenario's
/// actual point.
#[derive(Debug, Clone)]
pub struct Fact {
    pub text: String,
    pub formula: Formula,
    pub expected: bool,
}

/// A shipped model with its designated point and fact list.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model: EflModel,
    pub actual: Point,
    pub facts: Vec<Fact>,
}

impl Scenario {
    /// Evaluates every fact; returns the failures (empty = all reproduced).
    pub fn check_facts(&self) -> Vec<String> {
        let mut failures = Vec::new();
        for fact in &self.facts {
            let pm = PointedModel::new(self.model.clone(), self.actual.clone())
                .expect("scenario points are valid");
            match satisfies(&pm, &fact.formula) {
                Ok(v) if v == fact.expected => {}
                Ok(v) => failures.push(format!(
                    "{}: expected {} but evaluated {v}",
                    fact.text, fact.expected
                )),
                Err(e) => failures.push(format!("{}: {e}", fact.text)),
            }
        }
        failures
    }
}

/// Loads a scenario by name: `fig1`, `fig2`, `spy` or `gossip`.
pub fn load(name: &str) -> Result<Scenario, ScenarioError> {
    match name {
        "fig1" => Ok(fig1()),
        "fig2" => Ok(fig2()),
        "spy" => Ok(spy()),
        "gossip" => Ok(gossip()),
        other => Err(ScenarioError::Unknown(other.to_string())),
    }
}

pub const SCENARIO_NAMES: &[&str] = &["fig1", "fig2", "spy", "gossip"];

fn noms(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn facts(nominals: &[&str], entries: &[(&str, bool)]) -> Vec<Fact> {
    let sig = noms(nominals);
    entries
        .iter()
        .map(|(text, expected)| Fact {
            text: text.to_string(),
            formula: parse_formula(text, &sig).expect("scenario facts parse"),
            expected: *expected,
        })
        .collect()
}

/// Two agents, two indistinguishable worlds, constant friendship, one prop
/// true of `a` at `u0`; only `a` is named (by `n`).
pub fn fig1() -> Scenario {
    let model = EflModel::builder()
        .worlds(["u0", "u1"])
        .agents(["a", "b"])
        .k("a", "u0", "u1")
        .k("b", "u0", "u1")
        .f("u0", "a", "b")
        .f("u1", "a", "b")
        .name("n", "a")
        .fact("p", "u0", "a")
        .build()
        .expect("fig1 model");
    let actual = model.point("u0", "a").unwrap();
    Scenario {
        name: "fig1".into(),
        model,
        actual,
        facts: facts(
            &["n"],
            &[
                ("p", true),
                ("n", true),
                ("K p", false),
                ("<K> p", true),
                ("<F> p", false),
                ("A (n -> p)", true),
            ],
        ),
    }
}

/// The named-agent variant of `fig1`, evaluated at `(u0, b)`: before the
/// revealing transformation `b` cannot rule out having a `p`-friend, after it
/// she knows she has one.
pub fn fig2() -> Scenario {
    let model = EflModel::builder()
        .worlds(["u0", "u1"])
        .agents(["a", "b"])
        .k("a", "u0", "u1")
        .k("b", "u0", "u1")
        .f("u0", "a", "b")
        .f("u1", "a", "b")
        .name("a", "a")
        .name("b", "b")
        .fact("p", "u0", "a")
        .build()
        .expect("fig2 model");
    let actual = model.point("u0", "b").unwrap();
    Scenario {
        name: "fig2".into(),
        model,
        actual,
        facts: facts(
            &["a", "b"],
            &[
                ("(K ~p & ~K <F> p)", true),
                ("[K := (a? ; K) | true?] K <F> p", true),
            ],
        ),
    }
}

/// The model `fig2`'s transformation produces: `k_a` untouched, `k_b`
/// collapsed to the identity.
pub fn fig2_expected_after() -> EflModel {
    EflModel::builder()
        .worlds(["u0", "u1"])
        .agents(["a", "b"])
        .k("a", "u0", "u1")
        .f("u0", "a", "b")
        .f("u1", "a", "b")
        .name("a", "a")
        .name("b", "b")
        .fact("p", "u0", "a")
        .build()
        .expect("fig2 expected model")
}

/// The spy network: Bella (b) is friends with Charlie (c) and Erik (e), who
/// are not friends with each other. At the actual world `u0` Erik is the spy;
/// at `u1` nobody is; at `u2` Bella is. Spies know who the spies are, so `e`
/// tells `u0` apart from the rest; Bella knows she is no spy, so she excludes
/// `u2`; Charlie cannot tell any of the worlds apart. Danger (`d`) is being a
/// spy or having one as a friend, and is stored as a materialized valuation.
pub fn spy() -> Scenario {
    let model = spy_model();
    let actual = model.point("u0", "b").unwrap();
    Scenario {
        name: "spy".into(),
        model,
        actual,
        facts: facts(
            &["b", "c", "e"],
            &[
                ("@b (K ~s & ~K <F> s)", true),
                ("@b (d & ~K d)", true),
                ("@b K @c ~d", true),
                // d really is "spy or friend of a spy".
                ("A (d <-> (s | <F> s))", true),
                ("@e K s", true),
                ("@c ~K @e s", true),
                // After the revelation Bella knows her danger and Charlie his
                // safety.
                ("[K := cutK(d)] (@b K d & @c K ~d)", true),
                // Asking also works: Erik can tell Charlie he is safe.
                ("[c ? @c d : e] @c K ~d", true),
            ],
        ),
    }
}

fn spy_model() -> EflModel {
    let mut b = EflModel::builder()
        .worlds(["u0", "u1", "u2"])
        .agents(["b", "c", "e"])
        .k("b", "u0", "u1")
        .k("c", "u0", "u1")
        .k("c", "u1", "u2")
        .k("e", "u1", "u2")
        .name("b", "b")
        .name("c", "c")
        .name("e", "e")
        .fact("s", "u0", "e")
        .fact("s", "u2", "b");
    for w in ["u0", "u1", "u2"] {
        b = b.f(w, "b", "c").f(w, "b", "e");
    }
    // d = (s ∨ ⟨F⟩s), materialized pointwise.
    for (w, a) in [
        ("u0", "e"),
        ("u0", "b"),
        ("u2", "b"),
        ("u2", "c"),
        ("u2", "e"),
    ] {
        b = b.fact("d", w, a);
    }
    b.build().expect("spy model")
}

/// The spy network after danger is revealed: exactly the `k_b` link `u0—u1`,
/// the `k_c` glue to `u2`, and the `k_e` link `u1—u2` are gone.
pub fn spy_expected_after_cut() -> EflModel {
    let mut b = EflModel::builder()
        .worlds(["u0", "u1", "u2"])
        .agents(["b", "c", "e"])
        .k("c", "u0", "u1")
        .name("b", "b")
        .name("c", "c")
        .name("e", "e")
        .fact("s", "u0", "e")
        .fact("s", "u2", "b");
    for w in ["u0", "u1", "u2"] {
        b = b.f(w, "b", "c").f(w, "b", "e");
    }
    for (w, a) in [
        ("u0", "e"),
        ("u0", "b"),
        ("u2", "b"),
        ("u2", "c"),
        ("u2", "e"),
    ] {
        b = b.fact("d", w, a);
    }
    b.build().expect("post-revelation spy model")
}

/// The gossip network: Peggy (p) knows Roger (r) is cheating (c) on Mona (m),
/// Roger knows she knows, Mona knows nothing, and Roger does not know whether
/// Peggy and Mona are friends (they are). Worlds are the four combinations of
/// cheating × friendship, with `u` (cheating, friends) actual; marriage makes
/// `r` and `m` friends everywhere.
pub fn gossip() -> Scenario {
    let model = gossip_model();
    let actual = model.point("u", "r").unwrap();
    Scenario {
        name: "gossip".into(),
        model,
        actual,
        facts: facts(
            &["p", "r", "m"],
            &[
                // The five facts about Roger.
                ("c", true),
                ("down n . K (@p K @n c & @m ~K @n c)", true),
                ("down n . @p K @n K @p K @n c", true),
                ("(~K @m <F> p & ~K @m ~<F> p)", true),
                ("down n . @p K @n ~K @m <F> p", true),
                // Roger can compute what gossip would do, and cannot rule out
                // that Mona will learn of his affair.
                ("down n . [p <! @n c : <F> p] @m K @n c", true),
                ("down n . ~K [p <! @n c : <F> p] @m K @n c", true),
            ],
        ),
    }
}

fn gossip_model() -> EflModel {
    let mut b = EflModel::builder()
        .worlds(["u", "v", "w", "z"])
        .agents(["p", "r", "m"])
        // Roger knows about the cheating, not about the friendship.
        .k("r", "u", "v")
        .k("r", "w", "z")
        // Mona knows her friendships, nothing about the cheating.
        .k("m", "u", "w")
        .k("m", "v", "z")
        .name("p", "p")
        .name("r", "r")
        .name("m", "m")
        .fact("c", "u", "r")
        .fact("c", "v", "r");
    for w in ["u", "v", "w", "z"] {
        b = b.f(w, "r", "m");
    }
    for w in ["u", "w"] {
        b = b.f(w, "p", "m");
    }
    b.build().expect("gossip model")
}

/// The gossip network after Peggy's tale to her friends: Mona's `u—w` link is
/// cut, everything else is untouched.
pub fn gossip_expected_after_gossip() -> EflModel {
    let mut b = EflModel::builder()
        .worlds(["u", "v", "w", "z"])
        .agents(["p", "r", "m"])
        .k("r", "u", "v")
        .k("r", "w", "z")
        .k("m", "v", "z")
        .name("p", "p")
        .name("r", "r")
        .name("m", "m")
        .fact("c", "u", "r")
        .fact("c", "v", "r");
    for w in ["u", "v", "w", "z"] {
        b = b.f(w, "r", "m");
    }
    for w in ["u", "w"] {
        b = b.f(w, "p", "m");
    }
    b.build().expect("post-gossip model")
}

/// Peggy's semi-private announcement to her friends that Roger cheats, as a
/// model transformation: `send_{⟨F⟩p}(@_r c)`.
pub fn gossip_send() -> PdlTransformation {
    social::send(
        &Formula::nom("p").dia_f(),
        &Formula::at("r", Formula::prop("c")),
    )
}

/// Peggy telling Roger privately that she and Mona are friends, as an action
/// structure over the post-gossip model.
pub fn gossip_private_tell() -> GddlOperator {
    social::private_send(
        &Formula::nom("r"),
        &Formula::at("p", Formula::nom("m").dia_f()),
    )
}

/// Identity maps for comparing same-carrier models.
fn identity_maps(
    m: &EflModel,
) -> (
    std::collections::BTreeMap<WorldId, WorldId>,
    std::collections::BTreeMap<AgentId, AgentId>,
) {
    (
        m.worlds().iter().map(|w| (w.clone(), w.clone())).collect(),
        m.agents().iter().map(|a| (a.clone(), a.clone())).collect(),
    )
}

type Golden = (&'static str, fn() -> Result<(), String>);

/// The executable golden checks: every documented claim that goes beyond a
/// single fact at a scenario's actual point.
pub fn golden_suite() -> Vec<Golden> {
    vec![
        ("fig1 facts", || run_facts("fig1")),
        ("fig2 facts", || run_facts("fig2")),
        ("spy facts", || run_facts("spy")),
        ("gossip facts", || run_facts("gossip")),
        ("fig2 transformed model", fig2_transformation_golden),
        (
            "private reveal keeps the excluded agent in the dark",
            private_reveal_golden,
        ),
        (
            "spy revelation cuts exactly the stated links",
            spy_cut_golden,
        ),
        ("send to Bella's friends", send_to_friends_golden),
        ("gossip cuts one of Mona's links", gossip_send_golden),
        ("private tell prepares Roger", private_tell_golden),
        (
            "private question matches the private tell",
            private_question_golden,
        ),
        ("unfriending protects Roger", unfriend_golden),
        ("common knowledge among Erik's friends", spy_ck_golden),
    ]
}

fn run_facts(name: &str) -> Result<(), String> {
    let sc = load(name).map_err(|e| e.to_string())?;
    if !sc.model.validate().is_empty() {
        return Err(format!("{name}: model fails validation"));
    }
    let failures = sc.check_facts();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}

fn fig2_transformation_golden() -> Result<(), String> {
    let sc = fig2();
    let trans = crate::syntax::parse_transformation("K := (a? ; K) | true?", &noms(&["a", "b"]))
        .map_err(|e| e.to_string())?;
    let result = apply_trans(&sc.model, &trans).map_err(|e| e.to_string())?;
    let expected = fig2_expected_after();
    let (wm, am) = identity_maps(&result.model);
    if !result
        .model
        .equal_modulo_iso(&expected, &wm, &am)
        .map_err(|e| e.to_string())?
    {
        return Err("transformed fig2 model differs from the expected one".into());
    }
    Ok(())
}

fn private_reveal_golden() -> Result<(), String> {
    // The action structure that reveals everything to everyone except `a`,
    // with even its occurrence hidden from `a`.
    let sc = fig2();
    let reveal = PdlTransformation::identity().assign_k(
        crate::syntax::parse_program("(a? ; K) | true?", &noms(&["a", "b"]))
            .map_err(|e| e.to_string())?,
    );
    let internal = [(
        "K".to_string(),
        [
            ("d0".to_string(), "d1".to_string()),
            ("d1".to_string(), "d0".to_string()),
        ]
        .into_iter()
        .collect(),
    )]
    .into_iter()
    .collect();
    let integrate = PdlTransformation::identity().assign_k(
        crate::syntax::parse_program("(K | (a? ; K'))*", &noms(&["a", "b"]))
            .map_err(|e| e.to_string())?,
    );
    let op = GddlOperator::new(
        vec![
            ("d0".to_string(), reveal),
            ("d1".to_string(), PdlTransformation::identity()),
        ],
        "d0",
        internal,
        integrate,
    )
    .map_err(|e| e.to_string())?;
    let result = apply_gddl(&sc.model, &op).map_err(|e| e.to_string())?;
    let out = &result.model;
    if !out.validate().is_empty() {
        return Err("product model fails validation".into());
    }
    // a is k-related across the slabs at every world; k_b is the identity on
    // the revealing slab and untouched on the silent one.
    for w in ["u0", "u1"] {
        if !out.k_related(
            &AgentId::new("a"),
            &WorldId::new(format!("{w}@d0")),
            &WorldId::new(format!("{w}@d1")),
        ) {
            return Err(format!("a distinguishes the copies of {w}"));
        }
    }
    if out.k_related(&AgentId::new("b"), &"u0@d0".into(), &"u1@d0".into()) {
        return Err("b still confuses worlds on the revealing slab".into());
    }
    if !out.k_related(&AgentId::new("b"), &"u0@d1".into(), &"u1@d1".into()) {
        return Err("b should stay ignorant on the silent slab".into());
    }
    if out.k_related(&AgentId::new("b"), &"u0@d0".into(), &"u0@d1".into()) {
        return Err("b should know the action happened".into());
    }
    Ok(())
}

fn spy_cut_golden() -> Result<(), String> {
    let sc = spy();
    let trans = PdlTransformation::identity().assign_k(cut_k(Formula::prop("d")));
    let result = apply_trans(&sc.model, &trans).map_err(|e| e.to_string())?;
    let expected = spy_expected_after_cut();
    let (wm, am) = identity_maps(&result.model);
    if !result
        .model
        .equal_modulo_iso(&expected, &wm, &am)
        .map_err(|e| e.to_string())?
    {
        return Err("revealed spy model differs from the expected one".into());
    }
    // And the stated knowledge facts hold afterwards.
    let sig = noms(&["b", "c", "e"]);
    for text in ["@b K d", "@c K ~d"] {
        let f = parse_formula(text, &sig).map_err(|e| e.to_string())?;
        let pm = PointedModel::new(result.model.clone(), result.model.point("u0", "b").unwrap())
            .unwrap();
        if !satisfies(&pm, &f).map_err(|e| e.to_string())? {
            return Err(format!("{text} fails after the revelation"));
        }
    }
    Ok(())
}

fn send_to_friends_golden() -> Result<(), String> {
    let sc = spy();
    let send = social::send(&Formula::nom("b").dia_f(), &Formula::prop("d"));
    let result = apply_trans(&sc.model, &send).map_err(|e| e.to_string())?;
    // Only k_c and k_e change.
    if result.model.k_pairs(&AgentId::new("b")) != sc.model.k_pairs(&AgentId::new("b")) {
        return Err("k_b changed although Bella is not her own friend".into());
    }
    for agent in ["c", "e"] {
        if result.model.k_pairs(&AgentId::new(agent)) == sc.model.k_pairs(&AgentId::new(agent)) {
            return Err(format!("k_{agent} should have changed"));
        }
    }
    // Bella learns that Charlie knows he is safe.
    let f = parse_formula("K @c K ~d", &noms(&["b", "c", "e"])).map_err(|e| e.to_string())?;
    let pm =
        PointedModel::new(result.model.clone(), result.model.point("u0", "b").unwrap()).unwrap();
    if !satisfies(&pm, &f).map_err(|e| e.to_string())? {
        return Err("Bella should know Charlie knows he is not in danger".into());
    }
    Ok(())
}

fn gossip_send_golden() -> Result<(), String> {
    let sc = gossip();
    let result = apply_trans(&sc.model, &gossip_send()).map_err(|e| e.to_string())?;
    let expected = gossip_expected_after_gossip();
    let (wm, am) = identity_maps(&result.model);
    if !result
        .model
        .equal_modulo_iso(&expected, &wm, &am)
        .map_err(|e| e.to_string())?
    {
        return Err("post-gossip model differs from the expected one".into());
    }
    Ok(())
}

fn private_tell_golden() -> Result<(), String> {
    // Peggy tells Roger privately, starting from the post-gossip model.
    let after_gossip = gossip_expected_after_gossip();
    let result = apply_gddl(&after_gossip, &gossip_private_tell()).map_err(|e| e.to_string())?;
    let mapped = result
        .map_point(&after_gossip.point("u", "r").unwrap())
        .ok_or("missing point map entry")?
        .clone();
    let pm = PointedModel::new(result.model.clone(), mapped).unwrap();
    let sig = noms(&["p", "r", "m"]);
    let f = parse_formula("(@r K @m K @r c & ~@m K @r K @m K @r c)", &sig)
        .map_err(|e| e.to_string())?;
    if !satisfies(&pm, &f).map_err(|e| e.to_string())? {
        return Err("Roger should know Mona knows, without Mona knowing that".into());
    }
    Ok(())
}

fn private_question_golden() -> Result<(), String> {
    // Roger privately asking Peggy whether she and Mona are friends comes to
    // the same as Peggy's private announcement: only the "yes" branch has a
    // true precondition.
    let after_gossip = gossip_expected_after_gossip();
    let sig = noms(&["p", "r", "m"]);
    let target = parse_formula("(@r K @m K @r c & ~@m K @r K @m K @r c)", &sig)
        .map_err(|e| e.to_string())?;
    let asked = parse_formula(
        "[r ?? <F> m : p] (@r K @m K @r c & ~@m K @r K @m K @r c)",
        &sig,
    )
    .map_err(|e| e.to_string())?;
    let pm =
        PointedModel::new(after_gossip.clone(), after_gossip.point("u", "r").unwrap()).unwrap();
    if !satisfies(&pm, &asked).map_err(|e| e.to_string())? {
        return Err("the private question should leave Roger prepared".into());
    }
    // Cross-check against the direct application of the announcement.
    let direct = apply_gddl(&after_gossip, &gossip_private_tell()).map_err(|e| e.to_string())?;
    let mapped = direct
        .map_point(&after_gossip.point("u", "r").unwrap())
        .ok_or("missing point map entry")?
        .clone();
    let pm = PointedModel::new(direct.model.clone(), mapped).unwrap();
    if !satisfies(&pm, &target).map_err(|e| e.to_string())? {
        return Err("direct application disagrees with the question".into());
    }
    Ok(())
}

fn unfriend_golden() -> Result<(), String> {
    // After Roger's smear campaign separates Peggy and Mona, Peggy's gossip
    // reaches nobody.
    let sc = gossip();
    let sig = noms(&["p", "r", "m"]);
    let f = parse_formula("[delF m p] down n . [p <! @n c : <F> p] @m ~K @n c", &sig)
        .map_err(|e| e.to_string())?;
    let pm = PointedModel::new(sc.model.clone(), sc.actual.clone()).unwrap();
    if !satisfies(&pm, &f).map_err(|e| e.to_string())? {
        return Err("Mona should stay ignorant once unfriended".into());
    }
    // One directed cut removes exactly one ordered pair of the friendship
    // denotation, at every world.
    let rel =
        crate::engine::denote(&sc.model, &social::cut_f("m", "p")).map_err(|e| e.to_string())?;
    let full =
        crate::engine::denote(&sc.model, &crate::syntax::Program::F).map_err(|e| e.to_string())?;
    for pair in full.iter() {
        let dropped = pair.0.agent.as_str() == "m" && pair.1.agent.as_str() == "p";
        if rel.contains(&pair.0, &pair.1) == dropped {
            return Err(format!("cutF mishandles {} -> {}", pair.0, pair.1));
        }
    }
    // Gossip over the unfriended network changes nothing: nobody receives.
    let unfriended = gossip_unfriended_model();
    let after = apply_trans(&unfriended, &gossip_send()).map_err(|e| e.to_string())?;
    if !after
        .model
        .equal_under_identity(&unfriended)
        .map_err(|e| e.to_string())?
    {
        return Err("gossip to an empty friend set should change nothing".into());
    }
    Ok(())
}

/// The gossip network with the Peggy–Mona friendship severed everywhere.
fn gossip_unfriended_model() -> EflModel {
    let mut b = EflModel::builder()
        .worlds(["u", "v", "w", "z"])
        .agents(["p", "r", "m"])
        .k("r", "u", "v")
        .k("r", "w", "z")
        .k("m", "u", "w")
        .k("m", "v", "z")
        .name("p", "p")
        .name("r", "r")
        .name("m", "m")
        .fact("c", "u", "r")
        .fact("c", "v", "r");
    for w in ["u", "v", "w", "z"] {
        b = b.f(w, "r", "m");
    }
    b.build().expect("unfriended gossip model")
}

fn spy_ck_golden() -> Result<(), String> {
    // After the revelation, danger is common knowledge among Erik's friends,
    // and the unfolded chain goes through.
    let sc = spy();
    let trans = PdlTransformation::identity().assign_k(cut_k(Formula::prop("d")));
    let revealed = apply_trans(&sc.model, &trans).map_err(|e| e.to_string())?;
    let sig = noms(&["b", "c", "e"]);
    let texts = ["[CK <F> e] d", "@e F K d", "@e F K @e F K d"];
    for text in texts {
        let f = parse_formula(text, &sig).map_err(|e| e.to_string())?;
        let pm = PointedModel::new(
            revealed.model.clone(),
            revealed.model.point("u0", "b").unwrap(),
        )
        .unwrap();
        if !satisfies(&pm, &f).map_err(|e| e.to_string())? {
            return Err(format!("{text} fails on the revealed spy model"));
        }
    }
    Ok(())
}
