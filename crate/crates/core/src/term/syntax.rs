//! Lexer and recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := arith (REL arith)?            REL in { =, !=, <, <=, dvd } (> and >= flip)
//! arith  := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := "-" factor | atom
//! atom   := IDENT | NUM ":" TYPE | "cast" "(" [TYPE "->"] TYPE "," expr ")"
//!         | IDENT "(" expr ("," expr)* ")" | "(" expr ")" | "?" IDENT [":" TYPE]
//! TYPE   := IDENT | "'" IDENT
//! ```
//!
//! The parser produces an untyped [`Ast`]; elaboration into [`crate::term::Expr`]
//! or [`crate::rules::Pattern`] happens separately.

use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigUint),
    Meta(String),
    TyMeta(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Plus,
    Minus,
    Star,
    Arrow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Dvd,
    Cast,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Meta(s) => write!(f, "`?{s}`"),
            Tok::TyMeta(s) => write!(f, "`'{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Dvd => f.write_str("`dvd`"),
            Tok::Cast => f.write_str("`cast`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Tokenizes one logical line (or fragment). `origin` is the position of
/// the first character, so diagnostics point into the enclosing file.
/// A `#` starts a comment running to the end of the line.
pub fn lex(src: &str, origin: Pos) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = origin.line;
    let mut line_start: isize = -(origin.col as isize - 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col: (i as isize - line_start + 1) as usize };
        if c == '\n' {
            line += 1;
            line_start = i as isize + 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let take_ident = |start: usize| {
            let mut j = start;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            (chars[start..j].iter().collect::<String>(), j)
        };
        let two = |next: char| chars.get(i + 1) == Some(&next);
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            ':' => (Tok::Colon, 1),
            ';' => (Tok::Semi, 1),
            '+' => (Tok::Plus, 1),
            '*' => (Tok::Star, 1),
            '-' if two('>') => (Tok::Arrow, 2),
            '-' => (Tok::Minus, 1),
            '=' => (Tok::Eq, 1),
            '!' if two('=') => (Tok::Ne, 2),
            '<' if two('=') => (Tok::Le, 2),
            '<' => (Tok::Lt, 1),
            '>' if two('=') => (Tok::Ge, 2),
            '>' => (Tok::Gt, 1),
            '?' | '\'' => {
                if !chars.get(i + 1).copied().is_some_and(is_ident_start) {
                    return Err(ParseError::new(pos, format!("expected a name after `{c}`")));
                }
                let (name, end) = take_ident(i + 1);
                let tok = if c == '?' { Tok::Meta(name) } else { Tok::TyMeta(name) };
                (tok, end - i)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                let value = digits.parse::<BigUint>().expect("decimal digits");
                (Tok::Num(value), j - i)
            }
            c if is_ident_start(c) => {
                let (name, end) = take_ident(i);
                let tok = match name.as_str() {
                    "cast" => Tok::Cast,
                    "dvd" => Tok::Dvd,
                    _ => Tok::Ident(name),
                };
                (tok, end - i)
            }
            other => return Err(ParseError::new(pos, format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
        i += len;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TyAnn {
    Named(String),
    Meta(String),
}

impl fmt::Display for TyAnn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TyAnn::Named(n) => f.write_str(n),
            TyAnn::Meta(n) => write!(f, "'{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Dvd,
}

/// Untyped syntax tree with source positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ast {
    Ident(String, Pos),
    Meta(String, Option<TyAnn>, Pos),
    Num(BigUint, TyAnn, Pos),
    Call(String, Vec<Ast>, Pos),
    Cast { src: Option<TyAnn>, dst: TyAnn, body: Box<Ast>, pos: Pos },
    Neg(Box<Ast>, Pos),
    Bin(BinOp, Box<Ast>, Box<Ast>, Pos),
}

impl Ast {
    pub fn pos(&self) -> Pos {
        match self {
            Ast::Ident(_, p)
            | Ast::Meta(_, _, p)
            | Ast::Num(_, _, p)
            | Ast::Call(_, _, p)
            | Ast::Neg(_, p)
            | Ast::Bin(_, _, _, p) => *p,
            Ast::Cast { pos, .. } => *pos,
        }
    }
}

/// A cursor over a token stream.
pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    end: Pos,
}

impl Parser {
    pub fn new(src: &str, origin: Pos) -> Result<Self, ParseError> {
        let toks = lex(src, origin)?;
        let end = match toks.last() {
            Some((_, p)) => Pos { line: p.line, col: p.col + 1 },
            None => origin,
        };
        Ok(Parser { toks, idx: 0, end })
    }

    pub fn from_tokens(toks: Vec<(Tok, Pos)>, end: Pos) -> Self {
        Parser { toks, idx: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.idx + k).map(|(t, _)| t)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<Pos, ParseError> {
        let pos = self.pos();
        if self.eat(tok) {
            Ok(pos)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(self.pos(), format!("expected {wanted}, found {t}")),
            None => ParseError::new(self.pos(), format!("expected {wanted}, found end of input")),
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), pos)) => Ok((name, pos)),
            Some(_) => {
                self.idx -= 1;
                Err(self.unexpected("an identifier"))
            }
            None => Err(self.unexpected("an identifier")),
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of expression"))
        }
    }

    fn ty_ann(&mut self) -> Result<TyAnn, ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), _)) => Ok(TyAnn::Named(name)),
            Some((Tok::TyMeta(name), _)) => Ok(TyAnn::Meta(name)),
            Some(_) => {
                self.idx -= 1;
                Err(self.unexpected("a type"))
            }
            None => Err(self.unexpected("a type")),
        }
    }

    pub fn expr(&mut self) -> Result<Ast, ParseError> {
        let lhs = self.arith()?;
        let pos = self.pos();
        let (op, flip) = match self.peek() {
            Some(Tok::Eq) => (BinOp::Eq, false),
            Some(Tok::Ne) => (BinOp::Ne, false),
            Some(Tok::Lt) => (BinOp::Lt, false),
            Some(Tok::Le) => (BinOp::Le, false),
            Some(Tok::Gt) => (BinOp::Lt, true),
            Some(Tok::Ge) => (BinOp::Le, true),
            Some(Tok::Dvd) => (BinOp::Dvd, false),
            _ => return Ok(lhs),
        };
        self.idx += 1;
        let rhs = self.arith()?;
        let (l, r) = if flip { (rhs, lhs) } else { (lhs, rhs) };
        Ok(Ast::Bin(op, Box::new(l), Box::new(r), pos))
    }

    fn arith(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.idx += 1;
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            let pos = self.pos();
            self.idx += 1;
            let rhs = self.factor()?;
            lhs = Ast::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs), pos);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        let pos = self.pos();
        if self.eat(&Tok::Minus) {
            let body = self.factor()?;
            return Ok(Ast::Neg(Box::new(body), pos));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some((Tok::Ident(name), _)) => {
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.expr()?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(&Tok::RParen)?;
                    Ok(Ast::Call(name, args, pos))
                } else {
                    Ok(Ast::Ident(name, pos))
                }
            }
            Some((Tok::Num(value), _)) => {
                self.expect(&Tok::Colon)?;
                let ty = self.ty_ann()?;
                Ok(Ast::Num(value, ty, pos))
            }
            Some((Tok::Meta(name), _)) => {
                let ty = if self.eat(&Tok::Colon) { Some(self.ty_ann()?) } else { None };
                Ok(Ast::Meta(name, ty, pos))
            }
            Some((Tok::Cast, _)) => {
                self.expect(&Tok::LParen)?;
                let first = self.ty_ann()?;
                let (src, dst) = if self.eat(&Tok::Arrow) {
                    (Some(first), self.ty_ann()?)
                } else {
                    (None, first)
                };
                self.expect(&Tok::Comma)?;
                let body = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Ast::Cast { src, dst, body: Box::new(body), pos })
            }
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(_) => {
                self.idx -= 1;
                Err(self.unexpected("an expression"))
            }
            None => Err(self.unexpected("an expression")),
        }
    }
}

/// Parses a complete expression.
pub fn parse_ast(src: &str, origin: Pos) -> Result<Ast, ParseError> {
    let mut p = Parser::new(src, origin)?;
    let ast = p.expr()?;
    p.expect_end()?;
    Ok(ast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start() -> Pos {
        Pos { line: 1, col: 1 }
    }

    #[test]
    fn precedence() {
        let ast = parse_ast("a + b * c < d", start()).unwrap();
        let Ast::Bin(BinOp::Lt, lhs, _, _) = ast else { panic!("expected <") };
        let Ast::Bin(BinOp::Add, _, mul, _) = *lhs else { panic!("expected +") };
        assert!(matches!(*mul, Ast::Bin(BinOp::Mul, ..)));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let ast = parse_ast("a - b - c", start()).unwrap();
        let Ast::Bin(BinOp::Sub, lhs, rhs, _) = ast else { panic!() };
        assert!(matches!(*lhs, Ast::Bin(BinOp::Sub, ..)));
        assert!(matches!(*rhs, Ast::Ident(..)));
    }

    #[test]
    fn greater_than_flips() {
        let ast = parse_ast("?b > ?a", start()).unwrap();
        let Ast::Bin(BinOp::Lt, l, _, _) = ast else { panic!() };
        assert!(matches!(*l, Ast::Meta(ref n, None, _) if n == "a"));
    }

    #[test]
    fn cast_forms() {
        let ast = parse_ast("cast(nat -> 'T, ?a)", start()).unwrap();
        assert!(matches!(ast, Ast::Cast { src: Some(TyAnn::Named(_)), dst: TyAnn::Meta(_), .. }));
        let ast = parse_ast("cast(int, m)", start()).unwrap();
        assert!(matches!(ast, Ast::Cast { src: None, .. }));
    }

    #[test]
    fn positions_are_reported() {
        let err = parse_ast("m +\n  * n", Pos { line: 4, col: 3 }).unwrap_err();
        assert_eq!(err.pos, Pos { line: 5, col: 3 });
        let err = parse_ast("m + 5", start()).unwrap_err();
        assert!(err.msg.contains("`:`"), "{err}");
        let err = parse_ast("m $ n", Pos { line: 2, col: 10 }).unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 12 });
    }

    #[test]
    fn relations_do_not_chain() {
        assert!(parse_ast("a < b < c", start()).is_err());
    }
}
