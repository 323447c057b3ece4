//! Builders for the social operators: group communication, announcements in
//! their sender-/receiver-indexical and private variants, questions,
//! friendship changes, friend requests and the common-knowledge programs.
//!
//! Each builder returns the defining core formula or transformation; the
//! parser's sugar forms expand through these, so the sugared and hand-built
//! routes always agree.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamics::cut_k;
use crate::engine::{Dense, EvalError, PointSet, Rel};
use crate::model::EflModel;
use crate::syntax::parser::is_reserved;
use crate::syntax::{Formula, GddlOperator, PdlTransformation, Program};

/// The anonymous communication `send_θ(ψ)`: reveals the truth value of `ψ`
/// (pointwise) to exactly the agents satisfying `θ` and leaves everyone
/// else's knowledge alone:
/// `[K := (θ? ; cut_K(ψ)) ∪ (¬θ? ; K)]`.
pub fn send(group: &Formula, message: &Formula) -> PdlTransformation {
    PdlTransformation::identity().assign_k(
        Program::test(group.clone())
            .seq(cut_k(message.clone()))
            .union(Program::test(group.clone().not()).seq(Program::K)),
    )
}

/// The action structure that makes `send_θ(ψ)` private: one action performs
/// the send, the other nothing, and only agents outside `θ` cannot tell which
/// happened. The star in the integration restores transitivity.
pub fn private_send(group: &Formula, message: &Formula) -> GddlOperator {
    let internal: BTreeMap<String, BTreeSet<(String, String)>> = [(
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
        Program::K
            .union(Program::test(group.clone().not()).seq(Program::Internal("K".into())))
            .star(),
    );
    GddlOperator::new(
        vec![
            ("d0".to_string(), send(group, message)),
            ("d1".to_string(), PdlTransformation::identity()),
        ],
        "d0",
        internal,
        integrate,
    )
    .expect("the private-send structure is well-formed by construction")
}

/// `[n ◁ ψ! : θ]φ`: agent `n` announces the sender-indexical message `ψ` to
/// the group `θ`, assuming the sender knows what she announces:
/// `(@_n Kψ → [send_θ(@_n ψ)]φ)`.
pub fn sender_announce(sender: &str, message: &Formula, group: &Formula, cont: Formula) -> Formula {
    let pre = Formula::at(sender, message.clone().box_k());
    let sent = Formula::at(sender, message.clone());
    pre.implies(Formula::dyn_op(send(group, &sent), cont))
}

/// Private variant of [`sender_announce`]: same precondition, but the send is
/// wrapped in the action structure of [`private_send`], so agents outside the
/// group cannot tell whether the communication happened.
pub fn sender_announce_private(
    sender: &str,
    message: &Formula,
    group: &Formula,
    cont: Formula,
) -> Formula {
    let pre = Formula::at(sender, message.clone().box_k());
    let sent = Formula::at(sender, message.clone());
    pre.implies(Formula::dyn_op(private_send(group, &sent), cont))
}

/// `[n : ψ! ▷ θ]φ`: agent `n` announces the receiver-indexical message `ψ`
/// (about the receivers) to the group `θ`:
/// `(@_n K A(θ → ψ) → [send_θ(ψ)]φ)`.
pub fn receiver_announce(
    sender: &str,
    message: &Formula,
    group: &Formula,
    cont: Formula,
) -> Formula {
    let pre = Formula::at(
        sender,
        group.clone().implies(message.clone()).box_a().box_k(),
    );
    pre.implies(Formula::dyn_op(send(group, message), cont))
}

/// Variant of [`receiver_announce`] whose precondition drops the sender's
/// knowledge: `(@_n A(θ → ψ) → [send_θ(ψ)]φ)`. Kept for comparison; the
/// symmetry laws need the knowing form.
pub fn receiver_announce_plain(
    sender: &str,
    message: &Formula,
    group: &Formula,
    cont: Formula,
) -> Formula {
    let pre = Formula::at(sender, group.clone().implies(message.clone()).box_a());
    pre.implies(Formula::dyn_op(send(group, message), cont))
}

/// Private variant of [`receiver_announce`].
pub fn receiver_announce_private(
    sender: &str,
    message: &Formula,
    group: &Formula,
    cont: Formula,
) -> Formula {
    let pre = Formula::at(
        sender,
        group.clone().implies(message.clone()).box_a().box_k(),
    );
    pre.implies(Formula::dyn_op(private_send(group, message), cont))
}

/// `[n ◁ ψ? : m]φ`: agent `n` asks agent `m` whether `ψ`. The answerer is
/// sincere and cooperative, so the question reduces to the three possible
/// answers, each a sender-indexical announcement by `m` to `n`: "yes" (`ψ`),
/// "no" (`¬ψ`), and "I don't know" (`¬(Kψ ∨ K¬ψ)`).
pub fn ask(asker: &str, question: &Formula, target: &str, cont: Formula) -> Formula {
    ask_branches(asker, question, target, cont, sender_announce)
}

/// Private variant of [`ask`]: all three answers are announced privately.
pub fn ask_private(asker: &str, question: &Formula, target: &str, cont: Formula) -> Formula {
    ask_branches(asker, question, target, cont, sender_announce_private)
}

fn ask_branches(
    asker: &str,
    question: &Formula,
    target: &str,
    cont: Formula,
    announce: fn(&str, &Formula, &Formula, Formula) -> Formula,
) -> Formula {
    let to_asker = Formula::nom(asker);
    let yes = announce(target, question, &to_asker, cont.clone());
    let no = announce(target, &question.clone().not(), &to_asker, cont.clone());
    let ignorance = question
        .clone()
        .box_k()
        .or(question.clone().not().box_k())
        .not();
    let dunno = announce(target, &ignorance, &to_asker, cont);
    yes.and(no.and(dunno))
}

/// `cut_F(n, m) = (¬n? ; F) ∪ (F ; ¬m?)`: drops exactly the directed
/// friendship edge from `n` to `m` at every world.
pub fn cut_f(n: &str, m: &str) -> Program {
    Program::test(Formula::nom(n).not())
        .seq(Program::F)
        .union(Program::F.seq(Program::test(Formula::nom(m).not())))
}

/// The two transformations whose composition deletes the friendship link
/// between `n` and `m` in both directions.
pub fn delete_friend_steps(n: &str, m: &str) -> [PdlTransformation; 2] {
    [
        PdlTransformation::identity().assign_f(cut_f(n, m)),
        PdlTransformation::identity().assign_f(cut_f(m, n)),
    ]
}

/// `[−F_{n,m}]φ`: the friendship link is cut in both directions.
pub fn delete_friend(n: &str, m: &str, cont: Formula) -> Formula {
    let [first, second] = delete_friend_steps(n, m);
    Formula::dyn_op(first, Formula::dyn_op(second, cont))
}

/// `[+F_{n,m}] = [F := F ∪ (n? ; A ; m?)]`: adds the friendship edge from
/// `n` to `m` at every world.
pub fn add_friend(n: &str, m: &str) -> PdlTransformation {
    PdlTransformation::identity().assign_f(
        Program::F.union(
            Program::test(Formula::nom(n)).seq(Program::A.seq(Program::test(Formula::nom(m)))),
        ),
    )
}

/// `[+F_{n,m}]φ`.
pub fn add_friend_formula(n: &str, m: &str, cont: Formula) -> Formula {
    Formula::dyn_op(add_friend(n, m), cont)
}

/// `[add(m)]φ`: a friend request. The requester asks `m` whether she wants to
/// be friends; on a known "yes" the link is added, otherwise the network is
/// unchanged (though the requester may have learned something):
/// `↓n [n ◁ ⟨D⟩n? : m]((K @_m ⟨D⟩n ∧ [+F_{n,m}]φ) ∨ (¬K @_m ⟨D⟩n ∧ φ))`
/// with `n` fresh.
pub fn friend_request(target: &str, cont: Formula) -> Formula {
    friend_request_impl(target, cont, false)
}

/// Variant of [`friend_request`] that asks the question privately.
pub fn friend_request_private(target: &str, cont: Formula) -> Formula {
    friend_request_impl(target, cont, true)
}

fn friend_request_impl(target: &str, cont: Formula, private: bool) -> Formula {
    let mut used = cont.tokens();
    used.insert(target.to_string());
    let n = fresh_token(&used);
    let wants_me = Formula::at(target, Formula::nom(&n).dia_d());
    let yes = wants_me
        .clone()
        .box_k()
        .and(add_friend_formula(&n, target, cont.clone()));
    let no = wants_me.box_k().not().and(cont);
    let body = yes.or(no);
    let question = Formula::nom(&n).dia_d();
    let asked = if private {
        ask_private(&n, &question, target, body)
    } else {
        ask(&n, &question, target, body)
    };
    Formula::down(&n, asked)
}

/// A nominal token distinct from everything in `used`.
pub(crate) fn fresh_token(used: &BTreeSet<String>) -> String {
    let mut i = 0usize;
    loop {
        let cand = format!("n{i}");
        if !used.contains(&cand) && !is_reserved(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// `K̄_a = (A ; a? ; K)`: "agent `a` knows", usable from any evaluation
/// point.
pub fn kbar(agent: &str) -> Program {
    Program::A.seq(Program::test(Formula::nom(agent)).seq(Program::K))
}

/// The generalized common-knowledge program
/// `c_θ = (A ; θ? ; K)* ; A ; θ?` for a described (possibly indexical) group.
/// The final `A ; θ?` lands on group members, so that indexical content is
/// read as being about them.
pub fn ck(group: &Formula) -> Program {
    let test = || Program::test(group.clone());
    Program::A
        .seq(test().seq(Program::K))
        .star()
        .seq(Program::A.seq(test()))
}

/// `[c_θ]φ`.
pub fn common_knowledge(group: &Formula, cont: Formula) -> Formula {
    Formula::prog_box(ck(group), cont)
}

/// The classic common-knowledge operator `C_G φ` for an enumerated group of
/// agents: true at `(w, a)` when `φ` holds at `(v, a)` for every world `v`
/// reachable from `w` through the reflexive-transitive closure of the union
/// of the members' indistinguishability relations.
///
/// Computed directly from that clause, independently of the program
/// machinery, so it can serve as an oracle for `c_θ`.
pub fn classic_common_knowledge(
    model: &EflModel,
    members: &[&str],
    phi: &Formula,
) -> Result<PointSet, EvalError> {
    let dense = Dense::from_model(model)?;
    let idxs = members
        .iter()
        .map(|m| {
            dense
                .agent_names
                .iter()
                .position(|a| a == m)
                .ok_or_else(|| EvalError::UnknownNominal(m.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let phi_mask = dense.eval(phi, true)?;
    let mask = classic_ck_mask(&dense, &idxs, phi_mask);
    Ok(dense.mask_to_points(mask))
}

/// Shared dense kernel for the classic clause (also used by the bounded
/// equivalence checker).
pub(crate) fn classic_ck_mask(dense: &Dense<'_>, members: &[usize], phi_mask: u64) -> u64 {
    let nw = dense.n_worlds;
    let na = dense.n_agents;
    // World-level union of the members' relations.
    let mut world_rel = Rel::empty(nw);
    for &a in members {
        for u in 0..nw {
            let row = dense.k.rows[u * na + a];
            for v in 0..nw {
                if row >> (v * na + a) & 1 == 1 {
                    world_rel.set(u, v);
                }
            }
        }
    }
    let closure = world_rel.star();
    let mut out = 0u64;
    for w in 0..nw {
        for a in 0..na {
            let ok = (0..nw)
                .filter(|&v| closure.contains(w, v))
                .all(|v| phi_mask >> (v * na + a) & 1 == 1);
            if ok {
                out |= 1u64 << (w * na + a);
            }
        }
    }
    out
}
