//! Formula and program syntax: ASTs, parser, canonical printer, and sugar
//! expansion.

mod ast;
mod expand;
mod lexer;
pub(crate) mod parser;
mod print;

pub use ast::{
    AssignRhs, AssignTarget, DynOp, Formula, GddlError, GddlOperator, PdlTransformation, Program,
    SugarForm,
};
pub use expand::{down_as_disjunction, expand, free_nominals, substitute_nominal};
pub use parser::{
    is_reserved, parse_formula, parse_operator, parse_program, parse_transformation, RESERVED,
};
pub use print::{print_formula, print_program};

use thiserror::Error;

/// A syntax error with its location and what would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub found: String,
    pub expected: Vec<String>,
}
