//! A model checker and bounded validity engine for epistemic friendship
//! logic and its dynamic extension.
//!
//! Formulas are evaluated at (world, agent) points of finite two-dimensional
//! Kripke models, so indexical statements like "I am in danger" or "all my
//! friends know they are friends with me" are first-class. Model change is
//! expressed through program-term transformations and finite action
//! structures, which cover announcements (public, directed, and private),
//! questions, friendship changes, friend requests, and generalized common
//! knowledge.
//!
//! Start with [`model::EflModel`] and [`engine::eval`], or parse formulas
//! with [`syntax::parse_formula`]. The `validity` module enumerates all
//! small models over a signature to test validity schemas and hunt for
//! countermodels; `scenarios` ships worked examples.

pub mod cli;
pub mod dynamics;
pub mod engine;
pub mod io;
pub mod model;
pub mod scenarios;
pub mod social;
pub mod syntax;
pub mod validity;

pub use dynamics::{apply_gddl, apply_trans, cut_k, TransformResult};
pub use engine::{
    denote, eval, eval_with, satisfies, satisfies_with, EvalError, EvalOptions, PointRelation,
    PointSet,
};
pub use model::{
    AgentId, EflModel, ModelBuilder, ModelError, Point, PointedModel, Violation, WorldId,
};
pub use syntax::{
    expand, parse_formula, parse_operator, parse_program, parse_transformation, print_formula,
    print_program, DynOp, Formula, GddlOperator, ParseError, PdlTransformation, Program, SugarForm,
};
pub use validity::{check_equiv, check_valid, enumerate, Signature, ValidityError, Verdict};
