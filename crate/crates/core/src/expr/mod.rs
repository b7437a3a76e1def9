//! Scalar expressions in positional variables `x1, x2, ...`.
//!
//! An [`Expression`] is immutable once built. Its [`Display`](fmt::Display)
//! output is fully parenthesized and parses back to the identical tree.

pub(crate) mod batch;
mod parser;
pub(crate) mod tape;

use std::fmt;

use crate::error::{DomainError, Error, ParseError, Result};
use tape::{Failure, Instr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Non-negative finite literal; negation is always an explicit [`Node::Neg`].
    Const(f64),
    /// One-based variable index.
    Var(usize),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Debug formatting is the shortest representation that reads back exactly.
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

/// A parsed scalar function `f(x1, .., xn)`.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    arity: usize,
    tape: Vec<Instr>,
    batch: batch::Program,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

pub fn parse(source: &str) -> Result<Expression, ParseError> {
    let (root, arity) = parser::parse_tree(source)?;
    Ok(Expression::compiled(root, arity))
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expression {
    /// Builds an expression from a hand-made tree.
    ///
    /// Rejects variable index 0 and constants that are negative or not finite,
    /// since neither can come out of the parser.
    pub fn from_node(root: Node) -> Result<Expression> {
        fn check(node: &Node, arity: &mut usize) -> Result<()> {
            match node {
                Node::Const(c) if !c.is_finite() || c.is_sign_negative() => Err(Error::InvalidArgument(
                    format!("constant {c} must be finite and non-negative"),
                )),
                Node::Const(_) => Ok(()),
                Node::Var(0) => Err(Error::InvalidArgument("variable index 0".into())),
                Node::Var(i) => {
                    *arity = (*arity).max(*i);
                    Ok(())
                }
                Node::Neg(a) | Node::Call(_, a) => check(a, arity),
                Node::Binary(_, a, b) => {
                    check(a, arity)?;
                    check(b, arity)
                }
            }
        }
        let mut arity = 0;
        check(&root, &mut arity)?;
        Ok(Expression::compiled(root, arity))
    }

    fn compiled(root: Node, arity: usize) -> Expression {
        let tape = tape::compile(&root);
        let batch = batch::Program::compile(&tape);
        Expression {
            root,
            arity,
            tape,
            batch,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Highest variable index referenced (0 for constant expressions).
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates `f(point)`. Coordinates past the arity are ignored.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.check_len(point.len())?;
        let mut slots = Vec::with_capacity(self.tape.len());
        self.evaluate_into(point, &mut slots)
            .map_err(Error::Domain)
    }

    /// Evaluation with caller-owned scratch space, for hot loops.
    /// `point` must already have been checked against the arity.
    pub(crate) fn evaluate_into(&self, point: &[f64], slots: &mut Vec<f64>) -> Result<f64, DomainError> {
        match tape::run(&self.tape, point, slots) {
            Ok(v) => Ok(v),
            Err(Failure::Domain(e)) => Err(e),
            Err(Failure::NonFinitePartial) => unreachable!("f64 has no partials"),
        }
    }

    /// Lane-parallel evaluator; see [`batch::Batch::eval`].
    pub(crate) fn batch(&self) -> batch::Batch<'_> {
        batch::Batch::new(&self.batch)
    }

    pub(crate) fn run<T: tape::Scalar>(&self, point: &[T], slots: &mut Vec<T>) -> Result<T> {
        self.check_len(point.len())?;
        tape::run(&self.tape, point, slots).map_err(|e| match e {
            Failure::Domain(d) => Error::Domain(d),
            Failure::NonFinitePartial => Error::NonFinite,
        })
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len < self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                actual: len,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
