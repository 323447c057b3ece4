//! Tokenizer for the concrete formula and program syntax.

use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Tilde,
    Amp,
    Pipe,
    Arrow,  // ->
    DArrow, // <->
    AtSign,
    Dot,
    Question,  // ?
    DQuestion, // ??
    SendToL,   // <!
    SendToLL,  // <!!
    SendToR,   // !>
    SendToRR,  // !!>
    Colon,
    Assign, // :=
    Semi,
    Star,
    Comma,
    Apostrophe,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(id) => return write!(f, "`{id}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Tilde => "`~`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::DArrow => "`<->`",
            Tok::AtSign => "`@`",
            Tok::Dot => "`.`",
            Tok::Question => "`?`",
            Tok::DQuestion => "`??`",
            Tok::SendToL => "`<!`",
            Tok::SendToLL => "`<!!`",
            Tok::SendToR => "`!>`",
            Tok::SendToRR => "`!!>`",
            Tok::Colon => "`:`",
            Tok::Assign => "`:=`",
            Tok::Semi => "`;`",
            Tok::Star => "`*`",
            Tok::Comma => "`,`",
            Tok::Apostrophe => "`'`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Longest-match-first symbol table.
const SYMBOLS: &[(&str, Tok)] = &[
    ("<->", Tok::DArrow),
    ("<!!", Tok::SendToLL),
    ("!!>", Tok::SendToRR),
    ("<!", Tok::SendToL),
    ("!>", Tok::SendToR),
    (":=", Tok::Assign),
    ("->", Tok::Arrow),
    ("??", Tok::DQuestion),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("[", Tok::LBrack),
    ("]", Tok::RBrack),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("~", Tok::Tilde),
    ("&", Tok::Amp),
    ("|", Tok::Pipe),
    ("@", Tok::AtSign),
    (".", Tok::Dot),
    ("?", Tok::Question),
    (":", Tok::Colon),
    (";", Tok::Semi),
    ("*", Tok::Star),
    (",", Tok::Comma),
    ("'", Tok::Apostrophe),
];

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut rest = text;
    'outer: while !rest.is_empty() {
        let c = rest.chars().next().unwrap();
        if c == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            rest = &rest[c.len_utf8()..];
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            let (ident, tail) = rest.split_at(end);
            out.push((Tok::Ident(ident.to_string()), Pos { line, col }));
            col += end as u32;
            rest = tail;
            continue;
        }
        for (sym, tok) in SYMBOLS {
            if let Some(tail) = rest.strip_prefix(sym) {
                out.push((tok.clone(), Pos { line, col }));
                col += sym.len() as u32;
                rest = tail;
                continue 'outer;
            }
        }
        return Err(ParseError {
            line,
            col,
            found: format!("`{c}`"),
            expected: vec!["a token".to_string()],
        });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
