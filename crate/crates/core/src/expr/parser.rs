//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := factor (("*" | "/") factor)*
//! factor   := "-" factor | power
//! power    := atom ("^" factor)?
//! atom     := number | variable | func "(" expr ")" | "(" expr ")"
//! variable := "x" digit+
//! func     := "sin" | "cos" | "exp" | "log" | "sqrt" | "tanh"
//! ```

use super::{BinOp, Func, Node};
use crate::error::ParseError;

const ATOM_START: &[&str] = &["number", "variable", "function", "(", "-"];
const FUNCTIONS: &[&str] = &["sin", "cos", "exp", "log", "sqrt", "tanh"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Func(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Var(i) => format!("variable x{i}"),
            Tok::Func(f) => format!("function {}", f.name()),
            Tok::Plus => "\"+\"".into(),
            Tok::Minus => "\"-\"".into(),
            Tok::Star => "\"*\"".into(),
            Tok::Slash => "\"/\"".into(),
            Tok::Caret => "\"^\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(offset: usize, expected: &[&'static str], found: impl Into<String>) -> ParseError {
        ParseError {
            offset,
            expected: expected.to_vec(),
            found: found.into(),
        }
    }

    fn tokenize(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (at, tok) = lx.next_token()?;
            out.push((at, tok));
            if tok == Tok::End {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<(usize, Tok), ParseError> {
        while let Some(b) = self.peek_byte() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((start, Tok::End));
        };
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((start, tok));
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            return self.identifier(start);
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Self::err(start, ATOM_START, format!("unexpected character {ch:?}")))
    }

    fn eat_digits(&mut self) -> usize {
        let from = self.pos;
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - from
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), ParseError> {
        let mut digits = self.eat_digits();
        if self.peek_byte() == Some(b'.') {
            self.pos += 1;
            digits += self.eat_digits();
        }
        if digits == 0 {
            return Err(Self::err(start, &["digit"], "\".\" without digits"));
        }
        if matches!(self.peek_byte(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek_byte(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.eat_digits() == 0 {
                return Err(Self::err(self.pos, &["digit"], "incomplete exponent"));
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((start, Tok::Num(v))),
            _ => Err(Self::err(start, &["finite number"], format!("literal {text} out of range"))),
        }
    }

    fn identifier(&mut self, start: usize) -> Result<(usize, Tok), ParseError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        let word = &self.src[start..self.pos];
        if let Some(idx) = word.strip_prefix('x') {
            if !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                return match idx.parse::<usize>() {
                    Ok(0) => Err(Self::err(start, &["variable index >= 1"], "variable index 0")),
                    Ok(i) => Ok((start, Tok::Var(i))),
                    Err(_) => Err(Self::err(start, &["variable"], format!("variable {word} out of range"))),
                };
            }
        }
        match Func::from_name(word) {
            Some(f) => Ok((start, Tok::Func(f))),
            None => Err(Self::err(start, FUNCTIONS, format!("unknown function {word:?}"))),
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    max_var: usize,
}

impl Parser {
    fn peek(&self) -> Tok {
        self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1;
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Tok::Num(v) => {
                self.bump();
                Ok(Node::Const(v))
            }
            Tok::Var(i) => {
                self.bump();
                self.max_var = self.max_var.max(i);
                Ok(Node::Var(i))
            }
            Tok::Func(f) => {
                self.bump();
                self.expect(Tok::LParen, "(")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(Node::Call(f, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            _ => Err(self.fail(ATOM_START)),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(&[name]))
        }
    }
}

/// Parses `src`, returning the tree and the highest variable index seen.
pub(super) fn parse_tree(src: &str) -> Result<(Node, usize), ParseError> {
    let toks = Lexer::tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        max_var: 0,
    };
    let root = p.expr()?;
    if p.peek() != Tok::End {
        return Err(p.fail(&["+", "-", "*", "/", "end of input"]));
    }
    Ok((root, p.max_var))
}
