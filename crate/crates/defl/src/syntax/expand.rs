//! Elimination of sugar forms, and the definitional expansion of the `down`
//! binder used as a test oracle.

use std::collections::BTreeSet;

use super::ast::*;
use crate::social;

/// Replaces every sugar node by its defining core form. `At`, `Down` and
/// program boxes stay primitive. Idempotent; the result contains no
/// [`Formula::Sugar`] nodes.
pub fn expand(phi: &Formula) -> Formula {
    match phi {
        Formula::Bool(_) | Formula::Prop(_) | Formula::Nom(_) => phi.clone(),
        Formula::Not(f) => expand(f).not(),
        Formula::And(a, b) => expand(a).and(expand(b)),
        Formula::BoxK(f) => expand(f).box_k(),
        Formula::BoxF(f) => expand(f).box_f(),
        Formula::BoxA(f) => expand(f).box_a(),
        Formula::BoxD(f) => expand(f).box_d(),
        Formula::At(n, f) => Formula::at(n, expand(f)),
        Formula::Down(n, f) => Formula::down(n, expand(f)),
        Formula::ProgBox(p, f) => Formula::prog_box(expand_program(p), expand(f)),
        Formula::Dyn(op, f) => Formula::Dyn(expand_op(op), Box::new(expand(f))),
        Formula::Sugar(s) => expand_sugar(s),
    }
}

fn expand_sugar(s: &SugarForm) -> Formula {
    match s {
        SugarForm::SenderAnnounce {
            sender,
            message,
            group,
            private,
            cont,
        } => {
            let message = expand(message);
            let group = expand(group);
            let cont = expand(cont);
            if *private {
                social::sender_announce_private(sender, &message, &group, cont)
            } else {
                social::sender_announce(sender, &message, &group, cont)
            }
        }
        SugarForm::ReceiverAnnounce {
            sender,
            message,
            group,
            private,
            cont,
        } => {
            let message = expand(message);
            let group = expand(group);
            let cont = expand(cont);
            if *private {
                social::receiver_announce_private(sender, &message, &group, cont)
            } else {
                social::receiver_announce(sender, &message, &group, cont)
            }
        }
        SugarForm::Ask {
            asker,
            question,
            target,
            private,
            cont,
        } => {
            let question = expand(question);
            let cont = expand(cont);
            if *private {
                social::ask_private(asker, &question, target, cont)
            } else {
                social::ask(asker, &question, target, cont)
            }
        }
        SugarForm::DelFriend { left, right, cont } => {
            social::delete_friend(left, right, expand(cont))
        }
        SugarForm::AddFriend { left, right, cont } => {
            social::add_friend_formula(left, right, expand(cont))
        }
        SugarForm::FriendRequest { target, cont } => social::friend_request(target, expand(cont)),
        SugarForm::CommonKnow { group, cont } => {
            social::common_knowledge(&expand(group), expand(cont))
        }
        SugarForm::KBar { agent, cont } => Formula::prog_box(social::kbar(agent), expand(cont)),
    }
}

fn expand_program(p: &Program) -> Program {
    match p {
        Program::K | Program::F | Program::A | Program::D | Program::Internal(_) => p.clone(),
        Program::Test(f) => Program::test(expand(f)),
        Program::Seq(a, b) => expand_program(a).seq(expand_program(b)),
        Program::Union(a, b) => expand_program(a).union(expand_program(b)),
        Program::Star(inner) => expand_program(inner).star(),
    }
}

fn expand_op(op: &DynOp) -> DynOp {
    match op {
        DynOp::Trans(t) => DynOp::Trans(expand_trans(t)),
        DynOp::Gddl(g) => {
            let actions = g
                .actions()
                .iter()
                .map(|(id, t)| (id.clone(), expand_trans(t)))
                .collect();
            DynOp::Gddl(
                GddlOperator::new(
                    actions,
                    g.actual(),
                    g.internal().clone(),
                    expand_trans(g.integrate()),
                )
                .expect("expansion preserves well-formedness"),
            )
        }
    }
}

fn expand_trans(t: &PdlTransformation) -> PdlTransformation {
    let mut out = PdlTransformation::identity();
    for (target, rhs) in t.assignments() {
        out = match (target, rhs) {
            (AssignTarget::K, AssignRhs::Program(p)) => out.assign_k(expand_program(p)),
            (AssignTarget::F, AssignRhs::Program(p)) => out.assign_f(expand_program(p)),
            (AssignTarget::D, AssignRhs::Program(p)) => out.assign_d(expand_program(p)),
            (AssignTarget::Prop(tok), AssignRhs::Formula(f)) => out.assign_prop(tok, expand(f)),
            (AssignTarget::Nominal(tok), AssignRhs::Formula(f)) => {
                out.assign_nominal(tok, expand(f))
            }
            _ => unreachable!("mismatched assignment"),
        };
    }
    out
}

/// The definitional reading of `↓n φ` on named-agent models: the disjunction
/// over all nominals `m` of `(m ∧ φ[m/n])`. Exponential in general, so the
/// evaluator uses renaming instead; this form serves as an independent
/// oracle.
pub fn down_as_disjunction(n: &str, body: &Formula, nominals: &BTreeSet<String>) -> Formula {
    let mut disjuncts = nominals
        .iter()
        .map(|m| Formula::nom(m).and(substitute_nominal(body, n, m)));
    let first = disjuncts
        .next()
        .expect("named-agent models have at least one nominal");
    disjuncts.fold(first, |acc, d| acc.or(d))
}

/// `φ[to/from]`: replaces every free occurrence of the nominal `from` by
/// `to`. A `down` binder for `from` shadows it. No capture avoidance is
/// attempted beyond shadowing; callers pick `to` fresh when that matters.
pub fn substitute_nominal(phi: &Formula, from: &str, to: &str) -> Formula {
    let sub = |f: &Formula| substitute_nominal(f, from, to);
    match phi {
        Formula::Bool(_) | Formula::Prop(_) => phi.clone(),
        Formula::Nom(t) => {
            if t == from {
                Formula::nom(to)
            } else {
                phi.clone()
            }
        }
        Formula::Not(f) => sub(f).not(),
        Formula::And(a, b) => sub(a).and(sub(b)),
        Formula::BoxK(f) => sub(f).box_k(),
        Formula::BoxF(f) => sub(f).box_f(),
        Formula::BoxA(f) => sub(f).box_a(),
        Formula::BoxD(f) => sub(f).box_d(),
        Formula::At(t, f) => Formula::at(if t == from { to } else { t }, sub(f)),
        Formula::Down(t, f) => {
            if t == from {
                phi.clone()
            } else {
                Formula::down(t, sub(f))
            }
        }
        Formula::ProgBox(p, f) => Formula::prog_box(substitute_in_program(p, from, to), sub(f)),
        Formula::Dyn(op, f) => Formula::Dyn(substitute_in_op(op, from, to), Box::new(sub(f))),
        Formula::Sugar(_) => substitute_nominal(&expand(phi), from, to),
    }
}

fn substitute_in_program(p: &Program, from: &str, to: &str) -> Program {
    match p {
        Program::K | Program::F | Program::A | Program::D | Program::Internal(_) => p.clone(),
        Program::Test(f) => Program::test(substitute_nominal(f, from, to)),
        Program::Seq(a, b) => {
            substitute_in_program(a, from, to).seq(substitute_in_program(b, from, to))
        }
        Program::Union(a, b) => {
            substitute_in_program(a, from, to).union(substitute_in_program(b, from, to))
        }
        Program::Star(inner) => substitute_in_program(inner, from, to).star(),
    }
}

fn substitute_in_op(op: &DynOp, from: &str, to: &str) -> DynOp {
    let sub_trans = |t: &PdlTransformation| {
        let mut out = PdlTransformation::identity();
        for (target, rhs) in t.assignments() {
            out = match (target, rhs) {
                (AssignTarget::K, AssignRhs::Program(p)) => {
                    out.assign_k(substitute_in_program(p, from, to))
                }
                (AssignTarget::F, AssignRhs::Program(p)) => {
                    out.assign_f(substitute_in_program(p, from, to))
                }
                (AssignTarget::D, AssignRhs::Program(p)) => {
                    out.assign_d(substitute_in_program(p, from, to))
                }
                (AssignTarget::Prop(tok), AssignRhs::Formula(f)) => {
                    out.assign_prop(tok, substitute_nominal(f, from, to))
                }
                (AssignTarget::Nominal(tok), AssignRhs::Formula(f)) => {
                    let tok = if tok == from { to } else { tok };
                    out.assign_nominal(tok, substitute_nominal(f, from, to))
                }
                _ => unreachable!("mismatched assignment"),
            };
        }
        out
    };
    match op {
        DynOp::Trans(t) => DynOp::Trans(sub_trans(t)),
        DynOp::Gddl(g) => {
            let actions = g
                .actions()
                .iter()
                .map(|(id, t)| (id.clone(), sub_trans(t)))
                .collect();
            DynOp::Gddl(
                GddlOperator::new(
                    actions,
                    g.actual(),
                    g.internal().clone(),
                    sub_trans(g.integrate()),
                )
                .expect("substitution preserves well-formedness"),
            )
        }
    }
}

/// Free nominal occurrences of a formula: tokens used as nominals that are
/// not bound by an enclosing `down`.
pub fn free_nominals(phi: &Formula) -> BTreeSet<String> {
    fn walk(phi: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match phi {
            Formula::Bool(_) | Formula::Prop(_) => {}
            Formula::Nom(t) => {
                if !bound.iter().any(|b| b == t) {
                    out.insert(t.clone());
                }
            }
            Formula::Not(f)
            | Formula::BoxK(f)
            | Formula::BoxF(f)
            | Formula::BoxA(f)
            | Formula::BoxD(f) => walk(f, bound, out),
            Formula::And(a, b) => {
                walk(a, bound, out);
                walk(b, bound, out);
            }
            Formula::At(n, f) => {
                if !bound.iter().any(|b| b == n) {
                    out.insert(n.clone());
                }
                walk(f, bound, out);
            }
            Formula::Down(n, f) => {
                bound.push(n.clone());
                walk(f, bound, out);
                bound.pop();
            }
            Formula::ProgBox(p, f) => {
                walk_program(p, bound, out);
                walk(f, bound, out);
            }
            Formula::Dyn(op, f) => {
                let trans_list: Vec<&PdlTransformation> = match op {
                    DynOp::Trans(t) => vec![t],
                    DynOp::Gddl(g) => {
                        let mut v: Vec<&PdlTransformation> =
                            g.actions().iter().map(|(_, t)| t).collect();
                        v.push(g.integrate());
                        v
                    }
                };
                for t in trans_list {
                    for (target, rhs) in t.assignments() {
                        if let AssignTarget::Nominal(tok) = target {
                            if !bound.iter().any(|b| b == tok) {
                                out.insert(tok.clone());
                            }
                        }
                        match rhs {
                            AssignRhs::Program(p) => walk_program(p, bound, out),
                            AssignRhs::Formula(f) => walk(f, bound, out),
                        }
                    }
                }
                walk(f, bound, out);
            }
            Formula::Sugar(_) => walk(&expand(phi), bound, out),
        }
    }
    fn walk_program(p: &Program, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match p {
            Program::K | Program::F | Program::A | Program::D | Program::Internal(_) => {}
            Program::Test(f) => walk(f, bound, out),
            Program::Seq(a, b) | Program::Union(a, b) => {
                walk_program(a, bound, out);
                walk_program(b, bound, out);
            }
            Program::Star(inner) => walk_program(inner, bound, out),
        }
    }
    let mut out = BTreeSet::new();
    walk(phi, &mut Vec::new(), &mut out);
    out
}
