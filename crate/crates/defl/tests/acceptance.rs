//! Acceptance suite: every documented claim the crate is built around, one
//! test per criterion, each printing a pass line (run with `--nocapture` to
//! see them).

use std::collections::BTreeSet;

use defl::dynamics::{apply_gddl, apply_trans, cut_k};
use defl::engine::{denote, eval, satisfies};
use defl::model::{AgentId, EflModel, Point, PointedModel, WorldId};
use defl::scenarios;
use defl::social;
use defl::syntax::{parse_formula, parse_transformation, Formula, PdlTransformation, Program};
use defl::validity::{
    check_common_knowledge_equiv, check_valid, enumerate, model_count, Signature, Verdict,
};

fn noms(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn parse(text: &str, nominals: &[&str]) -> Formula {
    parse_formula(text, &noms(nominals)).expect("acceptance formulas parse")
}

fn holds(model: &EflModel, world: &str, agent: &str, phi: &Formula) -> bool {
    let pm = PointedModel::new(model.clone(), model.point(world, agent).unwrap()).unwrap();
    satisfies(&pm, phi).expect("acceptance evaluation succeeds")
}

fn assert_valid(text: &str, nominals: &[&str], sig: &Signature) {
    let phi = parse(text, nominals);
    let verdict = check_valid(&phi, sig).expect("bounded check runs");
    if let Verdict::Countermodel(model, point) = &verdict {
        panic!(
            "expected `{text}` to be valid up to {sig}, countermodel at {point}:\n{}",
            defl::io::model_to_string(model, Some(point))
        );
    }
}

/// Checks a countermodel verdict and re-verifies it independently through
/// `satisfies`.
fn assert_countermodel(text: &str, nominals: &[&str], sig: &Signature) -> (EflModel, Point) {
    let phi = parse(text, nominals);
    let verdict = check_valid(&phi, sig).expect("bounded check runs");
    let (model, point) = verdict
        .countermodel()
        .unwrap_or_else(|| panic!("expected a countermodel for `{text}` within {sig}"));
    assert_eq!(model.validate(), vec![], "countermodel is a proper model");
    let pm = PointedModel::new(model.clone(), point.clone()).unwrap();
    assert!(
        !satisfies(&pm, &phi).unwrap(),
        "countermodel for `{text}` fails to falsify it"
    );
    (model.clone(), point.clone())
}

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

#[test]
fn criterion_01_figure_two_reproduction() {
    let sc = scenarios::load("fig2").unwrap();
    let sig = &["a", "b"];
    assert!(holds(
        &sc.model,
        "u0",
        "b",
        &parse("(K ~p & ~K <F> p)", sig)
    ));
    assert!(holds(
        &sc.model,
        "u0",
        "b",
        &parse("[K := (a? ; K) | true?] K <F> p", sig)
    ));
    let trans = parse_transformation("K := (a? ; K) | true?", &noms(sig)).unwrap();
    let result = apply_trans(&sc.model, &trans).unwrap();
    let expected = scenarios::fig2_expected_after();
    let (wm, am) = identity_maps(&result.model);
    assert!(result.model.equal_modulo_iso(&expected, &wm, &am).unwrap());
    println!("criterion  1 (fig2 scenario reproduction): PASS");
}

#[test]
fn criterion_02_spy_network_suite() {
    let sc = scenarios::load("spy").unwrap();
    let sig = &["b", "c", "e"];
    for text in ["@b (K ~s & ~K <F> s)", "@b (d & ~K d)", "@b K @c ~d"] {
        assert!(holds(&sc.model, "u0", "b", &parse(text, sig)), "{text}");
    }
    let result = apply_trans(
        &sc.model,
        &PdlTransformation::identity().assign_k(cut_k(Formula::prop("d"))),
    )
    .unwrap();
    let expected = scenarios::spy_expected_after_cut();
    let (wm, am) = identity_maps(&result.model);
    assert!(
        result.model.equal_modulo_iso(&expected, &wm, &am).unwrap(),
        "the revelation removes exactly the three stated links"
    );
    assert!(holds(&result.model, "u0", "b", &parse("@b K d", sig)));
    assert!(holds(&result.model, "u0", "b", &parse("@c K ~d", sig)));
    println!("criterion  2 (spy network suite): PASS");
}

#[test]
fn criterion_03_revelation_schema() {
    let sig = Signature::new(3, &["a", "b", "c"], &["p"], false).unwrap();
    assert_valid("[K := cutK(p)] A (K p | K ~p)", &["a", "b", "c"], &sig);
    println!("criterion  3 (revelation schema valid up to 3 worlds, 3 agents, 1 prop): PASS");
}

#[test]
fn criterion_04_figure_five_send() {
    let sc = scenarios::load("spy").unwrap();
    let send = social::send(&Formula::nom("b").dia_f(), &Formula::prop("d"));
    let result = apply_trans(&sc.model, &send).unwrap();
    // Only k_c and k_e change.
    let expected = {
        let mut b = EflModel::builder()
            .worlds(["u0", "u1", "u2"])
            .agents(["b", "c", "e"])
            .k("b", "u0", "u1")
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
        b.build().unwrap()
    };
    let (wm, am) = identity_maps(&result.model);
    assert!(result.model.equal_modulo_iso(&expected, &wm, &am).unwrap());
    assert_eq!(
        result.model.k_pairs(&AgentId::new("b")),
        sc.model.k_pairs(&AgentId::new("b"))
    );
    assert!(holds(
        &sc.model,
        "u0",
        "b",
        &parse(
            "[K := (<F> b? ; cutK(d)) | (~<F> b? ; K)] K @c K ~d",
            &["b", "c", "e"]
        )
    ));
    println!("criterion  4 (send to Bella's friends): PASS");
}

#[test]
fn criterion_05_announcement_validities() {
    let sig = Signature::new(2, &["a", "b", "e"], &["s"], false).unwrap();
    assert_valid("[e <! s : true] A K @e s", &["a", "b", "e"], &sig);
    assert_valid(
        "(~(b | K @e s) -> [e <! s : b] ~K @e s)",
        &["a", "b", "e"],
        &sig,
    );
    let sig = Signature::new(2, &["a", "b", "c"], &["s"], false).unwrap();
    assert_valid("[b <! ~s : <F> b] @b F K @b ~s", &["a", "b", "c"], &sig);
    let sig = Signature::new(2, &["a", "b", "c"], &["d"], false).unwrap();
    assert_valid("down n . [n !> d : true] A K d", &["a", "b", "c"], &sig);
    assert_valid(
        "down n . [n !> <F> n : <F> n] F K <F> n",
        &["a", "b", "c"],
        &sig,
    );
    println!("criterion  5 (announcement validities at 2 worlds, 3 agents, 1 prop): PASS");
}

#[test]
fn criterion_06_symmetry_laws() {
    // Single-receiver symmetry, both directions.
    let sig = Signature::new(2, &["n", "m"], &["p"], false).unwrap();
    assert_valid(
        "([n !> p : m] @m K p <-> [n <! @m p : m] @m K p)",
        &["n", "m"],
        &sig,
    );
    assert_valid(
        "([n <! p : m] @m K @n p <-> [n !> @n p : m] @m K @n p)",
        &["n", "m"],
        &sig,
    );
    // With at least one receiver, sender- and receiver-indexical
    // announcements to the same (rigid) group coincide.
    let sig = Signature::new(2, &["a", "c", "n"], &["d"], false).unwrap();
    assert_valid(
        "(~A ~(a | c) -> ([n <! d : (a | c)] @a K @n d <-> [n !> @n d : (a | c)] @a K @n d))",
        &["a", "c", "n"],
        &sig,
    );
    // Announcing "you are in danger" to my friends differs from announcing
    // "all my friends are in danger" once friends are uncertain about each
    // other.
    let sig = Signature::new(2, &["a", "c", "n"], &["d"], false).unwrap();
    assert_countermodel(
        "([n !> d : <F> n] @a K @c d <-> [n <! @n F d : <F> n] @a K @c d)",
        &["a", "c", "n"],
        &sig,
    );
    println!("criterion  6 (symmetry laws and the group countermodel): PASS");
}

#[test]
fn criterion_07_privacy_contrast() {
    let sig = Signature::new(2, &["a", "b", "m"], &["d"], false).unwrap();
    assert_valid(
        "down n . [n <! d : m] A K ((@n K d) -> (@m K @n d))",
        &["a", "b", "m"],
        &sig,
    );
    assert_countermodel(
        "down n . [n <!! d : m] A K ((@n K d) -> (@m K @n d))",
        &["a", "b", "m"],
        &sig,
    );
    println!("criterion  7 (semi-private leak vs private announcement): PASS");
}

#[test]
fn criterion_08_gossip_suite() {
    let sc = scenarios::load("gossip").unwrap();
    let sig = &["p", "r", "m"];
    // The five facts about Roger.
    let table = [
        "c",
        "down n . K (@p K @n c & @m ~K @n c)",
        "down n . @p K @n K @p K @n c",
        "(~K @m <F> p & ~K @m ~<F> p)",
        "down n . @p K @n ~K @m <F> p",
    ];
    for text in table {
        assert!(holds(&sc.model, "u", "r", &parse(text, sig)), "{text}");
    }
    // Peggy's gossip produces the expected model: one of Mona's links gone.
    let after = apply_trans(&sc.model, &scenarios::gossip_send()).unwrap();
    let expected = scenarios::gossip_expected_after_gossip();
    let (wm, am) = identity_maps(&after.model);
    assert!(after.model.equal_modulo_iso(&expected, &wm, &am).unwrap());
    assert_eq!(
        expected.k_pairs(&AgentId::new("m")).len(),
        sc.model.k_pairs(&AgentId::new("m")).len() - 2,
        "exactly one undirected k_m link is removed"
    );
    // The private tell: Roger ends up prepared, Mona none the wiser.
    let private = apply_gddl(&expected, &scenarios::gossip_private_tell()).unwrap();
    let mapped = private
        .map_point(&expected.point("u", "r").unwrap())
        .unwrap()
        .clone();
    let pm = PointedModel::new(private.model.clone(), mapped).unwrap();
    let crucial = parse("(@r K @m K @r c & ~@m K @r K @m K @r c)", sig);
    assert!(satisfies(&pm, &crucial).unwrap());
    println!("criterion  8 (gossip suite): PASS");
}

#[test]
fn criterion_09_question_validities() {
    let sig = Signature::new(2, &["n", "m"], &["p"], false).unwrap();
    assert_valid("(@m K @n p -> [n ? @n p : m] @n K p)", &["n", "m"], &sig);
    assert_valid("(@m K @n ~p -> [n ? @n p : m] @n K ~p)", &["n", "m"], &sig);
    assert_valid(
        "(@m ~(K @n p | K @n ~p) -> [n ? @n p : m] @n K @m ~(K @n p | K @n ~p))",
        &["n", "m"],
        &sig,
    );
    // Totality: the three answer branches never contradict each other.
    assert_valid("[n ? p : m] true", &["n", "m"], &sig);
    assert_valid("[n ? @n p : m] true", &["n", "m"], &sig);
    println!("criterion  9 (question validities at 2 worlds, 2 agents, 1 prop): PASS");
}

#[test]
fn criterion_10_network_change() {
    // Deleting a friendship removes exactly the two directed edges, on every
    // model over 2 worlds and 3 agents.
    let sig = Signature::new(2, &["a", "b", "c"], &[], false).unwrap();
    let agents = ["a", "b", "c"];
    let mut checked = 0u64;
    for model in enumerate(&sig) {
        for n in agents {
            for m in agents {
                if n == m {
                    continue;
                }
                // One directed cut: the denotation drops exactly (n, m).
                let cut = denote(&model, &social::cut_f(n, m)).unwrap();
                let full = denote(&model, &Program::F).unwrap();
                for (from, to) in full.iter() {
                    let dropped = from.agent.as_str() == n && to.agent.as_str() == m;
                    assert_eq!(
                        cut.contains(from, to),
                        !dropped,
                        "cutF({n},{m}) at {from}->{to}"
                    );
                }
                // Both directions: evaluate friendship through the deletion.
                for x in agents {
                    for y in agents {
                        if x == y {
                            continue;
                        }
                        let phi = parse(&format!("[delF {n} {m}] @{x} <F> {y}"), &agents);
                        let mask = eval(&model, &phi).unwrap();
                        for w in model.worlds() {
                            let expected = model.friends(w, &AgentId::new(x), &AgentId::new(y))
                                && !(x == n && y == m)
                                && !(x == m && y == n);
                            let point = Point::new(w.as_str(), "a");
                            assert_eq!(mask.contains(&point), expected);
                        }
                    }
                }
            }
        }
        checked += 1;
    }
    assert_eq!(checked, model_count(&sig));

    // Roger's unfriending manoeuvre.
    let sc = scenarios::load("gossip").unwrap();
    assert!(holds(
        &sc.model,
        "u",
        "r",
        &parse(
            "[delF m p] down n . [p <! @n c : <F> p] @m ~K @n c",
            &["p", "r", "m"]
        )
    ));

    // The friend-request law.
    let sig = Signature::new(2, &["a", "m"], &[], true).unwrap();
    assert_valid(
        "down n . ((~<F> m & ~K @m <D> n) -> [request m] ((K @m K <D> n & <F> m) | (K @m ~K <D> n & ~<F> m)))",
        &["a", "m"],
        &sig,
    );
    println!("criterion 10 (network change: cuts, unfriending, friend requests): PASS");
}

#[test]
fn criterion_11_common_knowledge() {
    // The program reading coincides with the classic closure operator.
    let sig = Signature::new(3, &["b", "c", "e"], &["s"], false).unwrap();
    let theta = parse("(b | c)", &["b", "c", "e"]);
    let phi = parse("@c ~s", &["b", "c", "e"]);
    let verdict = check_common_knowledge_equiv(&theta, &["b", "c"], &phi, &sig).unwrap();
    assert!(verdict.is_valid(), "got {verdict}");
    // The fixed-point unfolding of the common-knowledge box, as a
    // formula-level equivalence through the general checker.
    let small = Signature::new(2, &["b", "c"], &["s"], false).unwrap();
    let unfold = parse(
        "([CK (b | c)] @c ~s <-> (@c ~s & ([KB b] [CK (b | c)] @c ~s & [KB c] [CK (b | c)] @c ~s)))",
        &["b", "c"],
    );
    assert!(check_valid(&unfold, &small).unwrap().is_valid());

    // On the revealed spy network, danger is common knowledge among the
    // spy's friends, with the unfolded chain.
    let sc = scenarios::load("spy").unwrap();
    let revealed = apply_trans(
        &sc.model,
        &PdlTransformation::identity().assign_k(cut_k(Formula::prop("d"))),
    )
    .unwrap();
    let sig_t = &["b", "c", "e"];
    for agent in ["b", "c", "e"] {
        assert!(holds(
            &revealed.model,
            "u0",
            agent,
            &parse("[CK <F> e] d", sig_t)
        ));
    }
    assert!(holds(&revealed.model, "u0", "b", &parse("@e F K d", sig_t)));
    assert!(holds(
        &revealed.model,
        "u0",
        "b",
        &parse("@e F K @e F K d", sig_t)
    ));
    // Common knowledge over the empty group holds trivially.
    let sig = Signature::new(2, &["a", "b"], &["p"], false).unwrap();
    assert_valid("[CK false] false", &["a", "b"], &sig);
    println!("criterion 11 (common knowledge: classic equivalence and applications): PASS");
}

#[test]
fn criterion_12_enumerator_counts() {
    fn bell(n: usize) -> u64 {
        let mut row = vec![1u64];
        for _ in 1..=n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        row[0]
    }
    for worlds in 1..=2usize {
        for agents in 1..=2usize {
            for props in 0..=1usize {
                for include_d in [false, true] {
                    let agent_names: Vec<String> = (0..agents).map(|i| format!("a{i}")).collect();
                    let agent_refs: Vec<&str> = agent_names.iter().map(|s| s.as_str()).collect();
                    let prop_names: Vec<String> = (0..props).map(|i| format!("p{i}")).collect();
                    let prop_refs: Vec<&str> = prop_names.iter().map(|s| s.as_str()).collect();
                    let sig = Signature::new(worlds, &agent_refs, &prop_refs, include_d).unwrap();
                    let pairs = agents * (agents - 1) / 2;
                    let mut expected = bell(worlds).pow(agents as u32)
                        * 2u64.pow((pairs * worlds) as u32)
                        * 2u64.pow((worlds * agents * props) as u32);
                    if include_d {
                        expected *= 2u64.pow((agents * agents * worlds) as u32);
                    }
                    assert_eq!(enumerate(&sig).count() as u64, expected, "{sig}");
                }
            }
        }
    }
    println!("criterion 12a (enumerator counts match combinatorics): PASS");
}

#[test]
fn criterion_12_transforms_validate() {
    // Every surgery result is re-validated internally; spot-check a sweep.
    let sig = Signature::new(2, &["a", "b"], &["p"], false).unwrap();
    let trans = PdlTransformation::identity().assign_k(cut_k(Formula::prop("p")));
    for model in enumerate(&sig) {
        let result = apply_trans(&model, &trans).unwrap();
        assert_eq!(result.model.validate(), vec![]);
    }
    println!("criterion 12b (transform results pass validation): PASS");
}

#[test]
fn criterion_12_down_equivalence_on_random_models() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let mut rng = StdRng::seed_from_u64(0xDEF1);
    let all_agents = ["a", "b", "c"];
    for round in 0..1000 {
        let n_worlds = rng.random_range(1..=3);
        let n_agents = rng.random_range(1..=3usize);
        let agents = &all_agents[..n_agents];
        let worlds: Vec<String> = (0..n_worlds).map(|i| format!("w{i}")).collect();
        let mut b = EflModel::builder()
            .worlds(worlds.iter().map(|w| w.as_str()))
            .agents(agents.iter().copied());
        for agent in agents {
            b = b.name(agent, agent);
            for u in 0..n_worlds {
                for v in u + 1..n_worlds {
                    if rng.random_bool(0.5) {
                        b = b.k(agent, &worlds[u], &worlds[v]);
                    }
                }
            }
        }
        for w in &worlds {
            for i in 0..n_agents {
                for j in i + 1..n_agents {
                    if rng.random_bool(0.5) {
                        b = b.f(w, agents[i], agents[j]);
                    }
                }
            }
        }
        for w in &worlds {
            for agent in agents {
                if rng.random_bool(0.5) {
                    b = b.fact("p", w, agent);
                }
            }
        }
        let model = b.build().unwrap();
        assert_eq!(model.validate(), vec![]);

        let body = random_core_formula(&mut rng, agents, 3);
        let direct = Formula::down("x", body.clone());
        let nominal_tokens = model.nominal_tokens();
        let expanded = defl::syntax::down_as_disjunction("x", &body, &nominal_tokens);
        let lhs = eval(&model, &direct).unwrap();
        let rhs = eval(&model, &expanded).unwrap();
        assert_eq!(lhs, rhs, "round {round}: {direct} vs disjunction");
    }
    println!("criterion 12c (down-binder equivalence on 1000 random named models): PASS");
}

/// A random dynamics-free formula over the given agents and `p`, mentioning
/// the binder token `x`.
fn random_core_formula(rng: &mut impl rand::Rng, agents: &[&str], depth: usize) -> Formula {
    let leaf = |rng: &mut dyn FnMut(u32) -> u32| match rng(5) {
        0 => Formula::prop("p"),
        1 => Formula::nom("x"),
        2 => Formula::top(),
        _ => Formula::nom(agents[0]),
    };
    let mut pick = |n: u32| rng.random_range(0..n);
    if depth == 0 {
        return leaf(&mut pick);
    }
    match pick(12) {
        0 => random_core_formula(rng, agents, depth - 1).not(),
        1 => random_core_formula(rng, agents, depth - 1).and(random_core_formula(
            rng,
            agents,
            depth - 1,
        )),
        2 => random_core_formula(rng, agents, depth - 1).box_k(),
        3 => random_core_formula(rng, agents, depth - 1).box_f(),
        4 => random_core_formula(rng, agents, depth - 1).box_a(),
        5 => random_core_formula(rng, agents, depth - 1).dia_f(),
        6 => Formula::at(
            agents[rng.random_range(0..agents.len())],
            random_core_formula(rng, agents, depth - 1),
        ),
        7 => Formula::at("x", random_core_formula(rng, agents, depth - 1)),
        8 => Formula::prog_box(
            Program::A.seq(Program::test(Formula::nom("x")).seq(Program::K)),
            random_core_formula(rng, agents, depth - 1),
        ),
        9 => Formula::down(
            "y",
            random_core_formula(rng, agents, depth - 1).and(Formula::nom("y")),
        ),
        _ => {
            let mut pick = |n: u32| rng.random_range(0..n);
            leaf(&mut pick)
        }
    }
}

mod roundtrip {
    use super::*;
    use defl::syntax::{AssignTarget, GddlOperator, PdlTransformation, Program, SugarForm};
    use proptest::prelude::*;

    const PROPS: &[&str] = &["p", "q", "s"];
    const NOMS: &[&str] = &["a", "b", "n", "m"];

    fn leaf() -> impl Strategy<Value = Formula> {
        prop_oneof![
            Just(Formula::top()),
            Just(Formula::bot()),
            proptest::sample::select(PROPS).prop_map(Formula::prop),
            proptest::sample::select(NOMS).prop_map(Formula::nom),
        ]
    }

    fn program(
        formula: impl Strategy<Value = Formula> + Clone + 'static,
    ) -> BoxedStrategy<Program> {
        let base = prop_oneof![
            Just(Program::K),
            Just(Program::F),
            Just(Program::A),
            Just(Program::D),
            Just(Program::Internal("K".into())),
            formula.clone().prop_map(Program::test),
        ];
        base.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.seq(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.union(b)),
                inner.prop_map(Program::star),
            ]
        })
        .boxed()
    }

    fn transformation(
        formula: impl Strategy<Value = Formula> + Clone + 'static,
    ) -> BoxedStrategy<PdlTransformation> {
        let assignment = prop_oneof![
            program(formula.clone()).prop_map(|p| (AssignTarget::K, p)),
            program(formula.clone()).prop_map(|p| (AssignTarget::F, p)),
            program(formula.clone()).prop_map(|p| (AssignTarget::D, p)),
        ];
        let prop_assign = (proptest::sample::select(PROPS), formula.clone());
        let nom_assign = (proptest::sample::select(NOMS), formula);
        (
            proptest::collection::vec(assignment, 0..2),
            proptest::option::of(prop_assign),
            proptest::option::of(nom_assign),
        )
            .prop_map(|(rels, prop, nom)| {
                let mut t = PdlTransformation::identity();
                for (target, p) in rels {
                    t = match target {
                        AssignTarget::K => t.assign_k(p),
                        AssignTarget::F => t.assign_f(p),
                        _ => t.assign_d(p),
                    };
                }
                if let Some((tok, f)) = prop {
                    t = t.assign_prop(tok, f);
                }
                if let Some((tok, f)) = nom {
                    t = t.assign_nominal(tok, f);
                }
                t
            })
            .boxed()
    }

    /// Per-action transformations may only touch the relations.
    fn relational_transformation(
        formula: impl Strategy<Value = Formula> + Clone + 'static,
    ) -> BoxedStrategy<PdlTransformation> {
        let assignment = prop_oneof![
            program(formula.clone()).prop_map(|p| (AssignTarget::K, p)),
            program(formula.clone()).prop_map(|p| (AssignTarget::F, p)),
            program(formula).prop_map(|p| (AssignTarget::D, p)),
        ];
        proptest::collection::vec(assignment, 0..3)
            .prop_map(|rels| {
                let mut t = PdlTransformation::identity();
                for (target, p) in rels {
                    t = match target {
                        AssignTarget::K => t.assign_k(p),
                        AssignTarget::F => t.assign_f(p),
                        _ => t.assign_d(p),
                    };
                }
                t
            })
            .boxed()
    }

    fn gddl(
        formula: impl Strategy<Value = Formula> + Clone + 'static,
    ) -> BoxedStrategy<GddlOperator> {
        (
            relational_transformation(formula.clone()),
            relational_transformation(formula.clone()),
            transformation(formula),
            proptest::bool::ANY,
        )
            .prop_map(|(t0, t1, integrate, link_back)| {
                let mut pairs: BTreeSet<(String, String)> =
                    [("d0".to_string(), "d1".to_string())].into_iter().collect();
                if link_back {
                    pairs.insert(("d1".to_string(), "d0".to_string()));
                }
                GddlOperator::new(
                    vec![("d0".to_string(), t0), ("d1".to_string(), t1)],
                    "d0",
                    [("K".to_string(), pairs)].into_iter().collect(),
                    integrate,
                )
                .expect("generated action structures are well-formed")
            })
            .boxed()
    }

    fn sugar(
        formula: impl Strategy<Value = Formula> + Clone + 'static,
    ) -> BoxedStrategy<SugarForm> {
        let nominal = || proptest::sample::select(NOMS).prop_map(str::to_string);
        prop_oneof![
            (
                nominal(),
                formula.clone(),
                formula.clone(),
                any::<bool>(),
                any::<bool>(),
                formula.clone()
            )
                .prop_map(|(sender, message, group, receiver, private, cont)| {
                    if receiver {
                        SugarForm::ReceiverAnnounce {
                            sender,
                            message,
                            group,
                            private,
                            cont,
                        }
                    } else {
                        SugarForm::SenderAnnounce {
                            sender,
                            message,
                            group,
                            private,
                            cont,
                        }
                    }
                }),
            (
                nominal(),
                formula.clone(),
                nominal(),
                any::<bool>(),
                formula.clone()
            )
                .prop_map(|(asker, question, target, private, cont)| SugarForm::Ask {
                    asker,
                    question,
                    target,
                    private,
                    cont
                }),
            (nominal(), nominal(), formula.clone(), any::<bool>()).prop_map(
                |(left, right, cont, del)| if del {
                    SugarForm::DelFriend { left, right, cont }
                } else {
                    SugarForm::AddFriend { left, right, cont }
                }
            ),
            (nominal(), formula.clone())
                .prop_map(|(target, cont)| SugarForm::FriendRequest { target, cont }),
            (formula.clone(), formula.clone())
                .prop_map(|(group, cont)| SugarForm::CommonKnow { group, cont }),
            (nominal(), formula).prop_map(|(agent, cont)| SugarForm::KBar { agent, cont }),
        ]
        .boxed()
    }

    fn formula() -> impl Strategy<Value = Formula> {
        leaf().prop_recursive(5, 48, 3, |inner| {
            prop_oneof![
                4 => inner.clone().prop_map(Formula::not),
                2 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a.implies(b)),
                1 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a.iff(b)),
                3 => inner.clone().prop_map(Formula::box_k),
                2 => inner.clone().prop_map(Formula::box_f),
                1 => inner.clone().prop_map(Formula::box_a),
                1 => inner.clone().prop_map(Formula::box_d),
                1 => inner.clone().prop_map(Formula::dia_k),
                1 => inner.clone().prop_map(Formula::dia_f),
                2 => (proptest::sample::select(NOMS), inner.clone())
                    .prop_map(|(n, f)| Formula::at(n, f)),
                1 => (proptest::sample::select(NOMS), inner.clone())
                    .prop_map(|(n, f)| Formula::down(n, f)),
                2 => (program(inner.clone()), inner.clone())
                    .prop_map(|(p, f)| Formula::prog_box(p, f)),
                1 => (transformation(inner.clone()), inner.clone())
                    .prop_map(|(t, f)| Formula::dyn_op(t, f)),
                1 => (gddl(inner.clone()), inner.clone())
                    .prop_map(|(g, f)| Formula::dyn_op(g, f)),
                1 => sugar(inner).prop_map(Formula::sugar),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig {
            cases: 10_000,
            failure_persistence: None,
            ..ProptestConfig::default()
        })]

        /// Criterion 12: canonical printing round-trips through the parser.
        #[test]
        fn criterion_12_parser_roundtrip(ast in formula()) {
            let printed = ast.to_string();
            let nominals: BTreeSet<String> = NOMS.iter().map(|s| s.to_string()).collect();
            let reparsed = parse_formula(&printed, &nominals)
                .unwrap_or_else(|e| panic!("`{printed}` fails to reparse: {e}"));
            prop_assert_eq!(&reparsed, &ast, "printed as `{}`", printed);
        }
    }

    #[test]
    fn criterion_12_roundtrip_line() {
        println!("criterion 12d (parser round-trip on 10000 fuzzed ASTs): PASS (see criterion_12_parser_roundtrip)");
    }
}
