//! Canonical printing. `parse(print(x))` returns `x` for every AST; the
//! printer recognises the stored core forms of the derived connectives
//! (disjunction, implication, diamonds) and prints them in their short
//! syntax.

use std::fmt;

use super::ast::*;

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

pub fn print_program(p: &Program) -> String {
    p.to_string()
}

impl fmt::Display for Formula {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Not(inner) => match &**inner {
                Formula::BoxK(f) if matches!(&**f, Formula::Not(_)) => {
                    let Formula::Not(body) = &**f else {
                        unreachable!()
                    };
                    write!(w, "<K> {body}")
                }
                Formula::BoxF(f) if matches!(&**f, Formula::Not(_)) => {
                    let Formula::Not(body) = &**f else {
                        unreachable!()
                    };
                    write!(w, "<F> {body}")
                }
                Formula::BoxA(f) if matches!(&**f, Formula::Not(_)) => {
                    let Formula::Not(body) = &**f else {
                        unreachable!()
                    };
                    write!(w, "<A> {body}")
                }
                Formula::BoxD(f) if matches!(&**f, Formula::Not(_)) => {
                    let Formula::Not(body) = &**f else {
                        unreachable!()
                    };
                    write!(w, "<D> {body}")
                }
                Formula::ProgBox(p, f) if matches!(&**f, Formula::Not(_)) => {
                    let Formula::Not(body) = &**f else {
                        unreachable!()
                    };
                    write!(w, "<{p}> {body}")
                }
                Formula::And(a, b)
                    if matches!(&**a, Formula::Not(_)) && matches!(&**b, Formula::Not(_)) =>
                {
                    let (Formula::Not(x), Formula::Not(y)) = (&**a, &**b) else {
                        unreachable!()
                    };
                    write!(w, "({x} | {y})")
                }
                Formula::And(a, b) if matches!(&**b, Formula::Not(_)) => {
                    let Formula::Not(y) = &**b else {
                        unreachable!()
                    };
                    write!(w, "({a} -> {y})")
                }
                _ => write!(w, "~{inner}"),
            },
            Formula::Bool(true) => w.write_str("true"),
            Formula::Bool(false) => w.write_str("false"),
            Formula::Prop(t) | Formula::Nom(t) => w.write_str(t),
            Formula::And(a, b) => write!(w, "({a} & {b})"),
            Formula::BoxK(f) => write!(w, "K {f}"),
            Formula::BoxF(f) => write!(w, "F {f}"),
            Formula::BoxA(f) => write!(w, "A {f}"),
            Formula::BoxD(f) => write!(w, "D {f}"),
            Formula::At(n, f) => write!(w, "@{n} {f}"),
            Formula::Down(n, f) => write!(w, "down {n} . {f}"),
            Formula::ProgBox(p, f) => write!(w, "[{p}] {f}"),
            Formula::Dyn(DynOp::Trans(t), f) => write!(w, "[{t}] {f}"),
            Formula::Dyn(DynOp::Gddl(g), f) => write!(w, "[{g}] {f}"),
            Formula::Sugar(s) => s.fmt(w),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::K => w.write_str("K"),
            Program::F => w.write_str("F"),
            Program::A => w.write_str("A"),
            Program::D => w.write_str("D"),
            Program::Internal(t) => write!(w, "{t}'"),
            Program::Test(f) => write!(w, "{f}?"),
            Program::Seq(a, b) => {
                // Flatten the right spine: Seq(a, Seq(b, c)) prints as one
                // chain, matching the right-associative parse.
                write!(w, "({a}")?;
                let mut rest = b;
                loop {
                    match &**rest {
                        Program::Seq(x, y) => {
                            write!(w, " ; {x}")?;
                            rest = y;
                        }
                        other => {
                            write!(w, " ; {other}")?;
                            break;
                        }
                    }
                }
                w.write_str(")")
            }
            Program::Union(a, b) => {
                write!(w, "({a}")?;
                let mut rest = b;
                loop {
                    match &**rest {
                        Program::Union(x, y) => {
                            write!(w, " | {x}")?;
                            rest = y;
                        }
                        other => {
                            write!(w, " | {other}")?;
                            break;
                        }
                    }
                }
                w.write_str(")")
            }
            Program::Star(p) => write!(w, "{p}*"),
        }
    }
}

impl fmt::Display for AssignTarget {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignTarget::K => w.write_str("K"),
            AssignTarget::F => w.write_str("F"),
            AssignTarget::D => w.write_str("D"),
            AssignTarget::Prop(t) | AssignTarget::Nominal(t) => w.write_str(t),
        }
    }
}

impl fmt::Display for PdlTransformation {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return w.write_str("I");
        }
        let mut first = true;
        for (target, rhs) in self.assignments() {
            if !first {
                w.write_str(", ")?;
            }
            first = false;
            match rhs {
                AssignRhs::Program(p) => write!(w, "{target} := {p}")?,
                AssignRhs::Formula(f) => write!(w, "{target} := {f}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for GddlOperator {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        w.write_str("gddl ")?;
        let mut first = true;
        for (id, trans) in self.actions() {
            if !first {
                w.write_str(", ")?;
            }
            first = false;
            if id == self.actual() {
                w.write_str("*")?;
            }
            if trans.is_identity() {
                write!(w, "{id}:I")?;
            } else {
                write!(w, "{id}:({trans})")?;
            }
        }
        w.write_str(" |")?;
        let mut first = true;
        for (name, pairs) in self.internal() {
            if first {
                w.write_str(" ")?;
            } else {
                w.write_str(" ; ")?;
            }
            first = false;
            write!(w, "{name}'{{")?;
            let mut inner_first = true;
            for (a, b) in pairs {
                if !inner_first {
                    w.write_str(",")?;
                }
                inner_first = false;
                write!(w, "({a},{b})")?;
            }
            w.write_str("}")?;
        }
        write!(w, " | {}", self.integrate())
    }
}

impl fmt::Display for SugarForm {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SugarForm::SenderAnnounce {
                sender,
                message,
                group,
                private,
                cont,
            } => {
                let arrow = if *private { "<!!" } else { "<!" };
                write!(w, "[{sender} {arrow} {message} : {group}] {cont}")
            }
            SugarForm::ReceiverAnnounce {
                sender,
                message,
                group,
                private,
                cont,
            } => {
                let arrow = if *private { "!!>" } else { "!>" };
                write!(w, "[{sender} {arrow} {message} : {group}] {cont}")
            }
            SugarForm::Ask {
                asker,
                question,
                target,
                private,
                cont,
            } => {
                let q = if *private { "??" } else { "?" };
                write!(w, "[{asker} {q} {question} : {target}] {cont}")
            }
            SugarForm::DelFriend { left, right, cont } => {
                write!(w, "[delF {left} {right}] {cont}")
            }
            SugarForm::AddFriend { left, right, cont } => {
                write!(w, "[addF {left} {right}] {cont}")
            }
            SugarForm::FriendRequest { target, cont } => write!(w, "[request {target}] {cont}"),
            SugarForm::CommonKnow { group, cont } => write!(w, "[CK {group}] {cont}"),
            SugarForm::KBar { agent, cont } => write!(w, "[KB {agent}] {cont}"),
        }
    }
}
