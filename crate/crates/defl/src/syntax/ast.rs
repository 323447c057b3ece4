//! Abstract syntax for formulas, program terms, model transformations and
//! the sugar forms of the social operators.

use std::collections::{BTreeMap, BTreeSet};

/// A formula of dynamic epistemic friendship logic.
///
/// The core connectives are negation and conjunction; disjunction,
/// implication, biconditional and the diamonds are parser-level abbreviations
/// stored in core form. `At` and `Down` are primitive nodes with their usual
/// abbreviation semantics. `Sugar` nodes are eliminable through
/// [`crate::syntax::expand`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `true` / `false`.
    Bool(bool),
    /// A propositional variable, read indexically ("I am ...").
    Prop(String),
    /// An agent nominal ("I am n").
    Nom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// "I know that".
    BoxK(Box<Formula>),
    /// "All my friends".
    BoxF(Box<Formula>),
    /// "Every agent".
    BoxA(Box<Formula>),
    /// "Everyone I want to befriend".
    BoxD(Box<Formula>),
    /// `@_n φ`: shift the agent index to the referent of `n`.
    At(String, Box<Formula>),
    /// `↓n φ`: rebind `n` to the current agent.
    Down(String, Box<Formula>),
    /// `[π] φ`: box over an arbitrary program term.
    ProgBox(Program, Box<Formula>),
    /// `[Δ] φ`: evaluate `φ` after transforming the model.
    Dyn(DynOp, Box<Formula>),
    Sugar(Box<SugarForm>),
}

impl Formula {
    pub fn top() -> Formula {
        Formula::Bool(true)
    }

    pub fn bot() -> Formula {
        Formula::Bool(false)
    }

    pub fn prop(token: &str) -> Formula {
        Formula::Prop(token.to_string())
    }

    pub fn nom(token: &str) -> Formula {
        Formula::Nom(token.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    /// `(φ ∨ ψ)`, stored as `¬(¬φ ∧ ¬ψ)`.
    pub fn or(self, other: Formula) -> Formula {
        self.not().and(other.not()).not()
    }

    /// `(φ → ψ)`, stored as `¬(φ ∧ ¬ψ)`.
    pub fn implies(self, other: Formula) -> Formula {
        self.and(other.not()).not()
    }

    /// `(φ ↔ ψ)`, stored as the conjunction of both implications.
    pub fn iff(self, other: Formula) -> Formula {
        self.clone().implies(other.clone()).and(other.implies(self))
    }

    pub fn box_k(self) -> Formula {
        Formula::BoxK(Box::new(self))
    }

    pub fn box_f(self) -> Formula {
        Formula::BoxF(Box::new(self))
    }

    pub fn box_a(self) -> Formula {
        Formula::BoxA(Box::new(self))
    }

    pub fn box_d(self) -> Formula {
        Formula::BoxD(Box::new(self))
    }

    /// `⟨K⟩φ = ¬K¬φ`.
    pub fn dia_k(self) -> Formula {
        self.not().box_k().not()
    }

    /// `⟨F⟩φ = ¬F¬φ`: "I have a friend who".
    pub fn dia_f(self) -> Formula {
        self.not().box_f().not()
    }

    /// `⟨A⟩φ = ¬A¬φ`: "there is someone who".
    pub fn dia_a(self) -> Formula {
        self.not().box_a().not()
    }

    pub fn dia_d(self) -> Formula {
        self.not().box_d().not()
    }

    pub fn at(nominal: &str, body: Formula) -> Formula {
        Formula::At(nominal.to_string(), Box::new(body))
    }

    pub fn down(nominal: &str, body: Formula) -> Formula {
        Formula::Down(nominal.to_string(), Box::new(body))
    }

    pub fn prog_box(program: Program, body: Formula) -> Formula {
        Formula::ProgBox(program, Box::new(body))
    }

    /// `⟨π⟩φ = ¬[π]¬φ`.
    pub fn prog_dia(program: Program, body: Formula) -> Formula {
        Formula::ProgBox(program, Box::new(body.not())).not()
    }

    pub fn dyn_op(op: impl Into<DynOp>, body: Formula) -> Formula {
        Formula::Dyn(op.into(), Box::new(body))
    }

    pub fn sugar(form: SugarForm) -> Formula {
        Formula::Sugar(Box::new(form))
    }

    /// All identifier tokens occurring in the formula (props, nominals,
    /// binders, transformation targets). Used for fresh-name generation.
    pub fn tokens(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_tokens(&mut out);
        out
    }

    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bool(_) => {}
            Formula::Prop(t) | Formula::Nom(t) => {
                out.insert(t.clone());
            }
            Formula::Not(f) => f.collect_tokens(out),
            Formula::And(a, b) => {
                a.collect_tokens(out);
                b.collect_tokens(out);
            }
            Formula::BoxK(f) | Formula::BoxF(f) | Formula::BoxA(f) | Formula::BoxD(f) => {
                f.collect_tokens(out)
            }
            Formula::At(n, f) | Formula::Down(n, f) => {
                out.insert(n.clone());
                f.collect_tokens(out);
            }
            Formula::ProgBox(p, f) => {
                p.collect_tokens(out);
                f.collect_tokens(out);
            }
            Formula::Dyn(op, f) => {
                op.collect_tokens(out);
                f.collect_tokens(out);
            }
            Formula::Sugar(s) => s.collect_tokens(out),
        }
    }
}

/// A program term of the embedded propositional dynamic logic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Program {
    /// The knowledge relation: same agent, `k_a`-related worlds.
    K,
    /// The friendship relation: same world, `f_w`-related agents.
    F,
    /// The universal agent relation: same world, any two agents.
    A,
    /// The want relation: same world, `d_w`-related agents.
    D,
    /// An internal relation of an action structure, e.g. `K'`. Only bound
    /// inside the integrating transformation of a [`GddlOperator`].
    Internal(String),
    /// `φ?`: the identity on points satisfying `φ`.
    Test(Box<Formula>),
    Seq(Box<Program>, Box<Program>),
    Union(Box<Program>, Box<Program>),
    /// Reflexive-transitive closure.
    Star(Box<Program>),
}

impl Program {
    pub fn test(f: Formula) -> Program {
        Program::Test(Box::new(f))
    }

    pub fn seq(self, other: Program) -> Program {
        Program::Seq(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Program) -> Program {
        Program::Union(Box::new(self), Box::new(other))
    }

    pub fn star(self) -> Program {
        Program::Star(Box::new(self))
    }

    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        match self {
            Program::K | Program::F | Program::A | Program::D => {}
            Program::Internal(t) => {
                out.insert(t.clone());
            }
            Program::Test(f) => f.collect_tokens(out),
            Program::Seq(a, b) | Program::Union(a, b) => {
                a.collect_tokens(out);
                b.collect_tokens(out);
            }
            Program::Star(p) => p.collect_tokens(out),
        }
    }
}

/// Target of one assignment inside a [`PdlTransformation`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssignTarget {
    K,
    F,
    D,
    Prop(String),
    Nominal(String),
}

/// Right-hand side of one assignment: a program for relation targets, a
/// formula for propositional and nominal targets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AssignRhs {
    Program(Program),
    Formula(Formula),
}

/// A simultaneous reinterpretation of basic relations, propositional
/// variables and nominals. Every right-hand side is denoted in the model
/// being transformed, so assignments commute.
///
/// The empty transformation is the identity `I`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PdlTransformation {
    assignments: BTreeMap<AssignTarget, AssignRhs>,
}

impl PdlTransformation {
    /// The identity transformation.
    pub fn identity() -> Self {
        PdlTransformation::default()
    }

    pub fn is_identity(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn assign_k(mut self, program: Program) -> Self {
        self.assignments
            .insert(AssignTarget::K, AssignRhs::Program(program));
        self
    }

    pub fn assign_f(mut self, program: Program) -> Self {
        self.assignments
            .insert(AssignTarget::F, AssignRhs::Program(program));
        self
    }

    pub fn assign_d(mut self, program: Program) -> Self {
        self.assignments
            .insert(AssignTarget::D, AssignRhs::Program(program));
        self
    }

    pub fn assign_prop(mut self, token: &str, formula: Formula) -> Self {
        self.assignments.insert(
            AssignTarget::Prop(token.to_string()),
            AssignRhs::Formula(formula),
        );
        self
    }

    /// Reassigns a nominal. The formula must denote exactly one agent
    /// uniformly across worlds when the transformation is applied.
    pub fn assign_nominal(mut self, token: &str, formula: Formula) -> Self {
        self.assignments.insert(
            AssignTarget::Nominal(token.to_string()),
            AssignRhs::Formula(formula),
        );
        self
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&AssignTarget, &AssignRhs)> {
        self.assignments.iter()
    }

    pub fn get(&self, target: &AssignTarget) -> Option<&AssignRhs> {
        self.assignments.get(target)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        for (target, rhs) in &self.assignments {
            match target {
                AssignTarget::Prop(t) | AssignTarget::Nominal(t) => {
                    out.insert(t.clone());
                }
                _ => {}
            }
            match rhs {
                AssignRhs::Program(p) => p.collect_tokens(out),
                AssignRhs::Formula(f) => f.collect_tokens(out),
            }
        }
    }
}

/// Errors raised when assembling an action structure.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GddlError {
    #[error("duplicate action id `{0}`")]
    DuplicateAction(String),
    #[error("actual action `{0}` is not in the action set")]
    UnknownActual(String),
    #[error("internal relation `{0}'` mentions unknown action `{1}`")]
    UnknownActionInInternal(String, String),
    #[error("action `{0}` reinterprets `{1}`, which only the integrating transformation may do")]
    NonRelationalActionTarget(String, String),
    #[error("an action structure needs at least one action")]
    NoActions,
}

/// A finite action structure: a set of actions each carrying a model
/// transformation, internal relations between actions, a designated actual
/// action, and an integrating transformation that may mention the internal
/// relations.
///
/// Applying the operator forms the product of the model with the action set
/// (one transformed copy of the model per action), lifts the internal
/// relations pointwise, and then applies the integrating transformation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GddlOperator {
    actions: Vec<(String, PdlTransformation)>,
    actual: String,
    internal: BTreeMap<String, BTreeSet<(String, String)>>,
    integrate: PdlTransformation,
}

impl GddlOperator {
    pub fn new(
        actions: Vec<(String, PdlTransformation)>,
        actual: &str,
        internal: BTreeMap<String, BTreeSet<(String, String)>>,
        integrate: PdlTransformation,
    ) -> Result<Self, GddlError> {
        if actions.is_empty() {
            return Err(GddlError::NoActions);
        }
        let mut ids = BTreeSet::new();
        for (id, trans) in &actions {
            if !ids.insert(id.clone()) {
                return Err(GddlError::DuplicateAction(id.clone()));
            }
            // Per-action transformations may only touch the relations; the
            // valuation and the naming map are copied to every slab of the
            // product unchanged.
            for (target, _) in trans.assignments() {
                match target {
                    AssignTarget::Prop(t) | AssignTarget::Nominal(t) => {
                        return Err(GddlError::NonRelationalActionTarget(id.clone(), t.clone()));
                    }
                    _ => {}
                }
            }
        }
        if !ids.contains(actual) {
            return Err(GddlError::UnknownActual(actual.to_string()));
        }
        for (name, pairs) in &internal {
            for (a, b) in pairs {
                if !ids.contains(a) {
                    return Err(GddlError::UnknownActionInInternal(name.clone(), a.clone()));
                }
                if !ids.contains(b) {
                    return Err(GddlError::UnknownActionInInternal(name.clone(), b.clone()));
                }
            }
        }
        Ok(GddlOperator {
            actions,
            actual: actual.to_string(),
            internal,
            integrate,
        })
    }

    pub fn actions(&self) -> &[(String, PdlTransformation)] {
        &self.actions
    }

    pub fn actual(&self) -> &str {
        &self.actual
    }

    pub fn actual_index(&self) -> usize {
        self.actions
            .iter()
            .position(|(id, _)| id == &self.actual)
            .expect("validated at construction")
    }

    pub fn internal(&self) -> &BTreeMap<String, BTreeSet<(String, String)>> {
        &self.internal
    }

    pub fn integrate(&self) -> &PdlTransformation {
        &self.integrate
    }

    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        for (id, trans) in &self.actions {
            out.insert(id.clone());
            trans.collect_tokens(out);
        }
        for name in self.internal.keys() {
            out.insert(name.clone());
        }
        self.integrate.collect_tokens(out);
    }
}

/// A dynamic operator attached to a [`Formula::Dyn`] node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DynOp {
    Trans(PdlTransformation),
    Gddl(GddlOperator),
}

impl DynOp {
    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        match self {
            DynOp::Trans(t) => t.collect_tokens(out),
            DynOp::Gddl(g) => g.collect_tokens(out),
        }
    }
}

impl From<PdlTransformation> for DynOp {
    fn from(t: PdlTransformation) -> Self {
        DynOp::Trans(t)
    }
}

impl From<GddlOperator> for DynOp {
    fn from(g: GddlOperator) -> Self {
        DynOp::Gddl(g)
    }
}

/// Sugar forms for the social operators. Each wraps the continuation formula
/// that holds after the operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SugarForm {
    /// `[n ◁ ψ! : θ]φ`: agent `n` announces the sender-indexical message `ψ`
    /// to the agents satisfying `θ`.
    SenderAnnounce {
        sender: String,
        message: Formula,
        group: Formula,
        private: bool,
        cont: Formula,
    },
    /// `[n : ψ! ▷ θ]φ`: agent `n` announces the receiver-indexical message
    /// `ψ` to the agents satisfying `θ`.
    ReceiverAnnounce {
        sender: String,
        message: Formula,
        group: Formula,
        private: bool,
        cont: Formula,
    },
    /// `[n ◁ ψ? : m]φ`: agent `n` asks agent `m` whether `ψ`.
    Ask {
        asker: String,
        question: Formula,
        target: String,
        private: bool,
        cont: Formula,
    },
    /// `[−F_{n,m}]φ`: delete the friendship link in both directions.
    DelFriend {
        left: String,
        right: String,
        cont: Formula,
    },
    /// `[+F_{n,m}]φ`: add the friendship link.
    AddFriend {
        left: String,
        right: String,
        cont: Formula,
    },
    /// `[add(m)]φ`: send `m` a friend request.
    FriendRequest { target: String, cont: Formula },
    /// `[c_θ]φ`: common knowledge among the agents satisfying `θ`.
    CommonKnow { group: Formula, cont: Formula },
    /// `[K̄_n]φ`: agent `n` knows `φ`, from any evaluation point.
    KBar { agent: String, cont: Formula },
}

impl SugarForm {
    pub(crate) fn collect_tokens(&self, out: &mut BTreeSet<String>) {
        match self {
            SugarForm::SenderAnnounce {
                sender,
                message,
                group,
                cont,
                ..
            }
            | SugarForm::ReceiverAnnounce {
                sender,
                message,
                group,
                cont,
                ..
            } => {
                out.insert(sender.clone());
                message.collect_tokens(out);
                group.collect_tokens(out);
                cont.collect_tokens(out);
            }
            SugarForm::Ask {
                asker,
                question,
                target,
                cont,
                ..
            } => {
                out.insert(asker.clone());
                out.insert(target.clone());
                question.collect_tokens(out);
                cont.collect_tokens(out);
            }
            SugarForm::DelFriend { left, right, cont }
            | SugarForm::AddFriend { left, right, cont } => {
                out.insert(left.clone());
                out.insert(right.clone());
                cont.collect_tokens(out);
            }
            SugarForm::FriendRequest { target, cont } => {
                out.insert(target.clone());
                cont.collect_tokens(out);
            }
            SugarForm::CommonKnow { group, cont } => {
                group.collect_tokens(out);
                cont.collect_tokens(out);
            }
            SugarForm::KBar { agent, cont } => {
                out.insert(agent.clone());
                cont.collect_tokens(out);
            }
        }
    }
}
