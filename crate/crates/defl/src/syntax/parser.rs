//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Identifier tokens are split into nominals and propositional variables by a
//! declared signature (the set of nominal tokens), plus any names bound by
//! `down` in scope. Binary connectives require explicit parentheses; unary
//! operators bind tighter.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::lexer::{lex, Pos, Tok};
use super::ParseError;
use crate::dynamics::cut_k;
use crate::social::cut_f;

/// Words with fixed meanings, unusable as proposition or nominal tokens.
pub const RESERVED: &[&str] = &[
    "K", "F", "A", "D", "down", "true", "false", "I", "gddl", "delF", "addF", "request", "CK",
    "KB", "cutK", "cutF",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Parses a formula. `nominals` lists the tokens to read as agent nominals;
/// every other identifier is a propositional variable.
pub fn parse_formula(text: &str, nominals: &BTreeSet<String>) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, nominals)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parses a program term.
pub fn parse_program(text: &str, nominals: &BTreeSet<String>) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, nominals)?;
    let prog = p.program()?;
    p.expect_eof()?;
    Ok(prog)
}

/// Parses a bare transformation, e.g. `K := cutK(d)`, or `I` for the
/// identity.
pub fn parse_transformation(
    text: &str,
    nominals: &BTreeSet<String>,
) -> Result<PdlTransformation, ParseError> {
    let mut p = Parser::new(text, nominals)?;
    let t = p.transformation()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a dynamic operator: either a transformation or a `gddl` action
/// structure.
pub fn parse_operator(text: &str, nominals: &BTreeSet<String>) -> Result<DynOp, ParseError> {
    let mut p = Parser::new(text, nominals)?;
    let op = if p.peek_ident() == Some("gddl") {
        DynOp::Gddl(p.gddl()?)
    } else {
        DynOp::Trans(p.transformation()?)
    };
    p.expect_eof()?;
    Ok(op)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    pos: usize,
    nominals: BTreeSet<String>,
    /// Nominals bound by enclosing `down` binders.
    scopes: Vec<String>,
}

impl Parser {
    fn new(text: &str, nominals: &BTreeSet<String>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            nominals: nominals.clone(),
            scopes: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&[&tok.to_string()]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.err(&["end of input"]))
        }
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        let pos = self.here();
        ParseError {
            line: pos.line,
            col: pos.col,
            found: self.peek().to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Runs `f`, restoring the parser state if it fails.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T, ParseError>) -> Option<T> {
        let pos = self.pos;
        let depth = self.scopes.len();
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = pos;
                self.scopes.truncate(depth);
                None
            }
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(&[what])),
        }
    }

    fn is_nominal(&self, token: &str) -> bool {
        self.nominals.contains(token) || self.scopes.iter().any(|s| s == token)
    }

    // ---- formulas ----

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(self.formula()?.not())
            }
            Tok::Ident(word) => match word.as_str() {
                "true" => {
                    self.bump();
                    Ok(Formula::top())
                }
                "false" => {
                    self.bump();
                    Ok(Formula::bot())
                }
                "K" => {
                    self.bump();
                    Ok(self.formula()?.box_k())
                }
                "F" => {
                    self.bump();
                    Ok(self.formula()?.box_f())
                }
                "A" => {
                    self.bump();
                    Ok(self.formula()?.box_a())
                }
                "D" => {
                    self.bump();
                    Ok(self.formula()?.box_d())
                }
                "down" => {
                    self.bump();
                    let n = self.ident("a nominal")?;
                    self.expect(Tok::Dot)?;
                    self.scopes.push(n.clone());
                    let body = self.formula();
                    self.scopes.pop();
                    Ok(Formula::down(&n, body?))
                }
                _ if is_reserved(&word) => Err(self.err(&["a formula"])),
                _ => {
                    self.bump();
                    if self.is_nominal(&word) {
                        Ok(Formula::Nom(word))
                    } else {
                        Ok(Formula::Prop(word))
                    }
                }
            },
            Tok::AtSign => {
                self.bump();
                let n = self.ident("a nominal")?;
                Ok(Formula::at(&n, self.formula()?))
            }
            Tok::Lt => {
                self.bump();
                let prog = self.program()?;
                self.expect(Tok::Gt)?;
                let body = self.formula()?;
                Ok(match prog {
                    Program::K => body.dia_k(),
                    Program::F => body.dia_f(),
                    Program::A => body.dia_a(),
                    Program::D => body.dia_d(),
                    p => Formula::prog_dia(p, body),
                })
            }
            Tok::LParen => {
                self.bump();
                let lhs = self.formula()?;
                // Redundant parentheses around a single formula are accepted.
                if self.eat(&Tok::RParen) {
                    return Ok(lhs);
                }
                let op = self.bump();
                let rhs = self.formula()?;
                self.expect(Tok::RParen)?;
                match op {
                    Tok::Amp => Ok(lhs.and(rhs)),
                    Tok::Pipe => Ok(lhs.or(rhs)),
                    Tok::Arrow => Ok(lhs.implies(rhs)),
                    Tok::DArrow => Ok(lhs.iff(rhs)),
                    _ => Err(self.err(&["`&`", "`|`", "`->`", "`<->`"])),
                }
            }
            Tok::LBrack => {
                self.bump();
                self.bracket()
            }
            _ => Err(self.err(&["a formula"])),
        }
    }

    /// Everything that can follow `[`: sugar forms, transformations, action
    /// structures and plain program boxes, each followed by `]` and the
    /// continuation formula.
    fn bracket(&mut self) -> Result<Formula, ParseError> {
        match self.peek_ident() {
            Some("gddl") => {
                let op = self.gddl()?;
                self.expect(Tok::RBrack)?;
                return Ok(Formula::dyn_op(op, self.formula()?));
            }
            Some("delF") => {
                self.bump();
                let left = self.ident("a nominal")?;
                let right = self.ident("a nominal")?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                return Ok(Formula::sugar(SugarForm::DelFriend { left, right, cont }));
            }
            Some("addF") => {
                self.bump();
                let left = self.ident("a nominal")?;
                let right = self.ident("a nominal")?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                return Ok(Formula::sugar(SugarForm::AddFriend { left, right, cont }));
            }
            Some("request") => {
                self.bump();
                let target = self.ident("a nominal")?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                return Ok(Formula::sugar(SugarForm::FriendRequest { target, cont }));
            }
            Some("CK") => {
                self.bump();
                let group = self.formula()?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                return Ok(Formula::sugar(SugarForm::CommonKnow { group, cont }));
            }
            Some("KB") => {
                self.bump();
                let agent = self.ident("a nominal")?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                return Ok(Formula::sugar(SugarForm::KBar { agent, cont }));
            }
            _ => {}
        }

        // Announcements: `[n <! m : g]` and friends. The head identifier
        // followed by a send arrow is unambiguous.
        if let (Tok::Ident(sender), arrow) = (self.peek().clone(), self.peek_at(1).clone()) {
            let (receiver_indexical, private) = match arrow {
                Tok::SendToL => (false, false),
                Tok::SendToLL => (false, true),
                Tok::SendToR => (true, false),
                Tok::SendToRR => (true, true),
                _ => (false, false),
            };
            if matches!(
                arrow,
                Tok::SendToL | Tok::SendToLL | Tok::SendToR | Tok::SendToRR
            ) {
                if is_reserved(&sender) {
                    return Err(self.err(&["a nominal"]));
                }
                self.bump();
                self.bump();
                let message = self.formula()?;
                self.expect(Tok::Colon)?;
                let group = self.formula()?;
                self.expect(Tok::RBrack)?;
                let cont = self.formula()?;
                let form = if receiver_indexical {
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
                };
                return Ok(Formula::sugar(form));
            }

            // Questions: `[n ? m : p]`. A `?` here may also begin a program
            // test (`[d? ; K]`), so commit only if the whole question shape
            // parses.
            if matches!(arrow, Tok::Question | Tok::DQuestion) && !is_reserved(&sender) {
                let private = arrow == Tok::DQuestion;
                if let Some(form) = self.attempt(|p| {
                    p.bump();
                    p.bump();
                    let question = p.formula()?;
                    p.expect(Tok::Colon)?;
                    let target = p.ident("a nominal")?;
                    p.expect(Tok::RBrack)?;
                    let cont = p.formula()?;
                    Ok(SugarForm::Ask {
                        asker: sender.clone(),
                        question,
                        target,
                        private,
                        cont,
                    })
                }) {
                    return Ok(Formula::sugar(form));
                }
            }
        }

        // Transformations: a target followed by `:=`, or a bare `I`.
        let is_trans = matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Assign
            || self.peek_ident() == Some("I") && self.peek_at(1) == &Tok::RBrack;
        if is_trans {
            let t = self.transformation()?;
            self.expect(Tok::RBrack)?;
            return Ok(Formula::dyn_op(t, self.formula()?));
        }

        // Otherwise a program box.
        let prog = self.program()?;
        self.expect(Tok::RBrack)?;
        Ok(Formula::prog_box(prog, self.formula()?))
    }

    // ---- programs ----

    fn program(&mut self) -> Result<Program, ParseError> {
        // Union binds loosest; chains are right-associative.
        let first = self.program_seq()?;
        if self.eat(&Tok::Pipe) {
            let rest = self.program()?;
            Ok(first.union(rest))
        } else {
            Ok(first)
        }
    }

    fn program_seq(&mut self) -> Result<Program, ParseError> {
        let first = self.program_postfix()?;
        if self.eat(&Tok::Semi) {
            let rest = self.program_seq()?;
            Ok(first.seq(rest))
        } else {
            Ok(first)
        }
    }

    fn program_postfix(&mut self) -> Result<Program, ParseError> {
        let mut p = self.program_primary()?;
        while self.eat(&Tok::Star) {
            p = p.star();
        }
        Ok(p)
    }

    fn program_primary(&mut self) -> Result<Program, ParseError> {
        // A formula followed by `?` is a test; try that shape first.
        if let Some(test) = self.attempt(|p| {
            let f = p.formula()?;
            p.expect(Tok::Question)?;
            Ok(Program::test(f))
        }) {
            return Ok(test);
        }
        match self.peek().clone() {
            Tok::Ident(word) => match word.as_str() {
                "K" | "F" | "A" | "D" => {
                    self.bump();
                    let base = match word.as_str() {
                        "K" => Program::K,
                        "F" => Program::F,
                        "A" => Program::A,
                        _ => Program::D,
                    };
                    if self.eat(&Tok::Apostrophe) {
                        Ok(Program::Internal(word))
                    } else {
                        Ok(base)
                    }
                }
                "cutK" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(cut_k(f))
                }
                "cutF" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let n = self.ident("a nominal")?;
                    self.expect(Tok::Comma)?;
                    let m = self.ident("a nominal")?;
                    self.expect(Tok::RParen)?;
                    Ok(cut_f(&n, &m))
                }
                _ if is_reserved(&word) => Err(self.err(&["a program"])),
                _ => {
                    self.bump();
                    self.expect(Tok::Apostrophe)?;
                    Ok(Program::Internal(word))
                }
            },
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            _ => Err(self.err(&["a program"])),
        }
    }

    // ---- transformations and action structures ----

    fn transformation(&mut self) -> Result<PdlTransformation, ParseError> {
        if self.peek_ident() == Some("I") && !matches!(self.peek_at(1), Tok::Assign | Tok::Comma) {
            self.bump();
            return Ok(PdlTransformation::identity());
        }
        let mut t = PdlTransformation::identity();
        loop {
            let target = match self.peek_ident() {
                Some("K") => {
                    self.bump();
                    AssignTarget::K
                }
                Some("F") => {
                    self.bump();
                    AssignTarget::F
                }
                Some("D") => {
                    self.bump();
                    AssignTarget::D
                }
                Some("A") => return Err(self.err(&["an assignable target (not `A`)"])),
                Some(word) if !is_reserved(word) => {
                    let word = word.to_string();
                    self.bump();
                    if self.is_nominal(&word) {
                        AssignTarget::Nominal(word)
                    } else {
                        AssignTarget::Prop(word)
                    }
                }
                _ => return Err(self.err(&["an assignment target"])),
            };
            self.expect(Tok::Assign)?;
            t = match target {
                AssignTarget::K => t.assign_k(self.program()?),
                AssignTarget::F => t.assign_f(self.program()?),
                AssignTarget::D => t.assign_d(self.program()?),
                AssignTarget::Prop(p) => {
                    let f = self.formula()?;
                    t.assign_prop(&p, f)
                }
                AssignTarget::Nominal(n) => {
                    let f = self.formula()?;
                    t.assign_nominal(&n, f)
                }
            };
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(t)
    }

    /// `gddl *d0:(K := ...), d1:I | K'{(d0,d1)} | K := ...`
    fn gddl(&mut self) -> Result<GddlOperator, ParseError> {
        self.bump(); // gddl
        let mut actions = Vec::new();
        let mut actual = None;
        loop {
            let marked = self.eat(&Tok::Star);
            let id = self.ident("an action id")?;
            if marked {
                actual = Some(id.clone());
            }
            self.expect(Tok::Colon)?;
            let trans = if self.peek_ident() == Some("I") {
                self.bump();
                PdlTransformation::identity()
            } else {
                self.expect(Tok::LParen)?;
                let t = self.transformation()?;
                self.expect(Tok::RParen)?;
                t
            };
            actions.push((id, trans));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Pipe)?;
        let mut internal: BTreeMap<String, BTreeSet<(String, String)>> = BTreeMap::new();
        while self.peek() != &Tok::Pipe {
            let name = match self.peek().clone() {
                Tok::Ident(w) => {
                    self.bump();
                    w
                }
                _ => return Err(self.err(&["an internal relation name"])),
            };
            self.expect(Tok::Apostrophe)?;
            self.expect(Tok::LBrace)?;
            let entry = internal.entry(name).or_default();
            while self.peek() != &Tok::RBrace {
                self.expect(Tok::LParen)?;
                let a = self.ident("an action id")?;
                self.expect(Tok::Comma)?;
                let b = self.ident("an action id")?;
                self.expect(Tok::RParen)?;
                entry.insert((a, b));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        self.expect(Tok::Pipe)?;
        let integrate = self.transformation()?;
        let actual = match actual {
            Some(a) => a,
            None => return Err(self.err(&["an action marked `*` as actual"])),
        };
        GddlOperator::new(actions, &actual, internal, integrate).map_err(|e| {
            let pos = self.here();
            ParseError {
                line: pos.line,
                col: pos.col,
                found: e.to_string(),
                expected: vec!["a well-formed action structure".to_string()],
            }
        })
    }
}
