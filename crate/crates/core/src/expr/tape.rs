//! Flat post-order instruction list shared by plain and derivative evaluation.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{BinOp, Func, Node};
use crate::error::{DomainError, DomainKind};

/// Number type the tape can be evaluated over: `f64` for plain values,
/// dual and hyper-dual numbers for derivatives.
pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    /// Real part.
    fn value(&self) -> f64;
    /// True when every component is finite.
    fn all_finite(&self) -> bool;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn powi(self, k: i32) -> Self;
    /// `self^exponent` for `self.value() > 0`.
    fn powf(self, exponent: Self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(c: f64) -> Self {
        c
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    #[inline]
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    #[inline]
    fn powf(self, exponent: Self) -> Self {
        f64::powf(self, exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Instr {
    Const(f64),
    /// Zero-based coordinate.
    Var(usize),
    Neg(usize),
    Call(Func, usize),
    Bin(BinOp, usize, usize),
    /// Power with an integer literal exponent; the base may be negative.
    PowI(usize, i32),
}

/// Evaluation failure before it is attached to a caller-level error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Failure {
    Domain(DomainError),
    /// The value is finite but some derivative component is not.
    NonFinitePartial,
}

fn integer_exponent(node: &Node) -> Option<i32> {
    let (c, sign) = match node {
        Node::Const(c) => (*c, 1.0),
        Node::Neg(inner) => match inner.as_ref() {
            Node::Const(c) => (*c, -1.0),
            _ => return None,
        },
        _ => return None,
    };
    if c.fract() == 0.0 && c <= i32::MAX as f64 {
        Some((sign * c) as i32)
    } else {
        None
    }
}

pub(crate) fn compile(root: &Node) -> Vec<Instr> {
    fn emit(node: &Node, out: &mut Vec<Instr>) -> usize {
        let instr = match node {
            Node::Const(c) => Instr::Const(*c),
            Node::Var(i) => Instr::Var(i - 1),
            Node::Neg(a) => Instr::Neg(emit(a, out)),
            Node::Call(f, a) => Instr::Call(*f, emit(a, out)),
            Node::Binary(BinOp::Pow, a, b) => match integer_exponent(b) {
                Some(k) => Instr::PowI(emit(a, out), k),
                None => {
                    let a = emit(a, out);
                    let b = emit(b, out);
                    Instr::Bin(BinOp::Pow, a, b)
                }
            },
            Node::Binary(op, a, b) => {
                let a = emit(a, out);
                let b = emit(b, out);
                Instr::Bin(*op, a, b)
            }
        };
        out.push(instr);
        out.len() - 1
    }
    let mut out = Vec::new();
    emit(root, &mut out);
    out
}

#[inline]
fn domain(kind: DomainKind, operand: f64) -> Failure {
    Failure::Domain(DomainError { kind, operand })
}

/// Runs `tape` at `point`; `slots` is scratch space reused across calls.
/// The caller guarantees `point` covers every referenced coordinate.
pub(crate) fn run<T: Scalar>(tape: &[Instr], point: &[T], slots: &mut Vec<T>) -> Result<T, Failure> {
    slots.clear();
    for instr in tape {
        let out = match *instr {
            Instr::Const(c) => T::constant(c),
            Instr::Var(i) => point[i],
            Instr::Neg(a) => -slots[a],
            Instr::Call(f, a) => {
                let x = slots[a];
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Tanh => x.tanh(),
                    Func::Log => {
                        if x.value() <= 0.0 {
                            return Err(domain(DomainKind::LogNonPositive, x.value()));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(domain(DomainKind::SqrtNegative, x.value()));
                        }
                        x.sqrt()
                    }
                }
            }
            Instr::PowI(a, k) => {
                let x = slots[a];
                if k < 0 && x.value() == 0.0 {
                    return Err(domain(DomainKind::DivisionByZero, 0.0));
                }
                x.powi(k)
            }
            Instr::Bin(op, a, b) => {
                let (x, y) = (slots[a], slots[b]);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(domain(DomainKind::DivisionByZero, x.value()));
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        if x.value() <= 0.0 {
                            return Err(domain(DomainKind::PowNonPositiveBase, x.value()));
                        }
                        x.powf(y)
                    }
                }
            }
        };
        if !out.value().is_finite() {
            return Err(domain(DomainKind::NonFinite, out.value()));
        }
        if !out.all_finite() {
            return Err(Failure::NonFinitePartial);
        }
        slots.push(out);
    }
    Ok(*slots.last().expect("tape is never empty"))
}
