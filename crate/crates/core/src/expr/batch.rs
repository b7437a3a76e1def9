//! Lane-parallel evaluation of a tape over [`LANES`] points at a time.
//!
//! Constants and variables are folded into operands and registers are reused
//! once their value is dead, so a long sum of products touches only a few
//! registers. A batch in which any lane would fail is rejected as a whole;
//! the caller re-runs it point by point to get the exact scalar error.

use super::tape::Instr;
use super::{BinOp, Func};

pub(crate) const LANES: usize = 64;

pub(crate) type Lanes = [f64; LANES];

#[derive(Debug, Clone, Copy)]
enum Operand {
    Reg(usize),
    Var(usize),
    Const(f64),
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Copy(Operand),
    Neg(Operand),
    Call(Func, Operand),
    PowI(Operand, i32),
    Bin(BinOp, Operand, Operand),
}

#[derive(Debug, Clone, Copy)]
struct Op {
    dst: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    ops: Vec<Op>,
    registers: usize,
    result: usize,
    vars: Vec<usize>,
}

impl Program {
    pub(crate) fn compile(tape: &[Instr]) -> Program {
        let mut last_use = vec![0; tape.len()];
        for (k, instr) in tape.iter().enumerate() {
            match *instr {
                Instr::Neg(a) | Instr::Call(_, a) | Instr::PowI(a, _) => last_use[a] = k,
                Instr::Bin(_, a, b) => {
                    last_use[a] = k;
                    last_use[b] = k;
                }
                Instr::Const(_) | Instr::Var(_) => {}
            }
        }
        let mut operand = Vec::with_capacity(tape.len());
        let mut free: Vec<usize> = Vec::new();
        let mut registers = 0;
        let mut ops = Vec::new();
        let mut vars = Vec::new();
        let mut emit = |kind: Kind, free: &mut Vec<usize>, ops: &mut Vec<Op>| {
            let dst = free.pop().unwrap_or_else(|| {
                registers += 1;
                registers - 1
            });
            ops.push(Op { dst, kind });
            dst
        };
        for (k, instr) in tape.iter().enumerate() {
            let get = |i: usize| -> Operand { operand[i] };
            let (kind, inputs) = match *instr {
                Instr::Const(c) => {
                    operand.push(Operand::Const(c));
                    continue;
                }
                Instr::Var(v) => {
                    if !vars.contains(&v) {
                        vars.push(v);
                    }
                    operand.push(Operand::Var(v));
                    continue;
                }
                Instr::Neg(a) => (Kind::Neg(get(a)), [Some(a), None]),
                Instr::Call(f, a) => (Kind::Call(f, get(a)), [Some(a), None]),
                Instr::PowI(a, p) => (Kind::PowI(get(a), p), [Some(a), None]),
                Instr::Bin(op, a, b) => (Kind::Bin(op, get(a), get(b)), [Some(a), Some(b)]),
            };
            let dst = emit(kind, &mut free, &mut ops);
            for i in inputs.into_iter().flatten() {
                if let Operand::Reg(r) = operand[i] {
                    if last_use[i] == k && !free.contains(&r) {
                        free.push(r);
                    }
                }
            }
            operand.push(Operand::Reg(dst));
        }
        let result = match *operand.last().expect("tape is never empty") {
            Operand::Reg(r) => r,
            leaf => emit(Kind::Copy(leaf), &mut free, &mut ops),
        };
        Program {
            ops,
            registers,
            result,
            vars,
        }
    }
}

#[derive(Clone, Copy)]
enum Src<'a> {
    Lanes(&'a Lanes),
    Splat(f64),
}

#[inline(always)]
fn all(x: Src, len: usize, pred: impl Fn(f64) -> bool) -> bool {
    match x {
        Src::Lanes(a) => a[..len].iter().fold(true, |ok, &v| ok & pred(v)),
        Src::Splat(c) => pred(c),
    }
}

#[inline(always)]
fn map1(x: Src, len: usize, out: &mut Lanes, f: impl Fn(f64) -> f64) {
    match x {
        Src::Lanes(a) => {
            for (o, &v) in out[..len].iter_mut().zip(&a[..len]) {
                *o = f(v);
            }
        }
        Src::Splat(c) => out[..len].fill(f(c)),
    }
}

#[inline(always)]
fn map2(x: Src, y: Src, len: usize, out: &mut Lanes, f: impl Fn(f64, f64) -> f64) {
    match (x, y) {
        (Src::Lanes(a), Src::Lanes(b)) => {
            for ((o, &u), &v) in out[..len].iter_mut().zip(&a[..len]).zip(&b[..len]) {
                *o = f(u, v);
            }
        }
        (Src::Lanes(a), Src::Splat(c)) => {
            for (o, &u) in out[..len].iter_mut().zip(&a[..len]) {
                *o = f(u, c);
            }
        }
        (Src::Splat(c), Src::Lanes(b)) => {
            for (o, &v) in out[..len].iter_mut().zip(&b[..len]) {
                *o = f(c, v);
            }
        }
        (Src::Splat(c), Src::Splat(d)) => out[..len].fill(f(c, d)),
    }
}

/// Register file for one [`Program`]; reuse it across batches.
pub(crate) struct Batch<'p> {
    program: &'p Program,
    // boxed so the output buffer can be swapped in without copying
    #[allow(clippy::vec_box)]
    regs: Vec<Box<Lanes>>,
    /// Output buffer, swapped with the destination register after each op.
    spare: Box<Lanes>,
}

impl<'p> Batch<'p> {
    pub(crate) fn new(program: &'p Program) -> Batch<'p> {
        Batch {
            program,
            regs: vec![Box::new([0.0; LANES]); program.registers],
            spare: Box::new([0.0; LANES]),
        }
    }

    /// Evaluates lanes `0..len`, where `vars[i]` holds coordinate `i` of every
    /// point. Returns `None` if any lane hits a domain violation or a
    /// non-finite value anywhere on the tape.
    pub(crate) fn eval(&mut self, vars: &[Lanes], len: usize) -> Option<&Lanes> {
        debug_assert!(len <= LANES);
        for &v in &self.program.vars {
            if !all(Src::Lanes(&vars[v]), len, f64::is_finite) {
                return None;
            }
        }
        for op in &self.program.ops {
            let regs = &self.regs;
            let out = &mut *self.spare;
            let src = |o: Operand| match o {
                Operand::Reg(r) => Src::Lanes(&regs[r]),
                Operand::Var(v) => Src::Lanes(&vars[v]),
                Operand::Const(c) => Src::Splat(c),
            };
            let ok = match op.kind {
                Kind::Copy(a) => {
                    map1(src(a), len, out, |x| x);
                    true
                }
                Kind::Neg(a) => {
                    map1(src(a), len, out, |x| -x);
                    true
                }
                Kind::Call(f, a) => {
                    let a = src(a);
                    match f {
                        Func::Sin => map1(a, len, out, f64::sin),
                        Func::Cos => map1(a, len, out, f64::cos),
                        Func::Exp => map1(a, len, out, f64::exp),
                        Func::Tanh => map1(a, len, out, f64::tanh),
                        Func::Log => map1(a, len, out, f64::ln),
                        Func::Sqrt => map1(a, len, out, f64::sqrt),
                    }
                    match f {
                        Func::Log => all(a, len, |x| x > 0.0),
                        Func::Sqrt => all(a, len, |x| x >= 0.0),
                        _ => true,
                    }
                }
                Kind::PowI(a, k) => {
                    let a = src(a);
                    map1(a, len, out, |x| x.powi(k));
                    k >= 0 || all(a, len, |x| x != 0.0)
                }
                Kind::Bin(bop, a, b) => {
                    let (a, b) = (src(a), src(b));
                    match bop {
                        BinOp::Add => map2(a, b, len, out, |x, y| x + y),
                        BinOp::Sub => map2(a, b, len, out, |x, y| x - y),
                        BinOp::Mul => map2(a, b, len, out, |x, y| x * y),
                        BinOp::Div => map2(a, b, len, out, |x, y| x / y),
                        BinOp::Pow => map2(a, b, len, out, f64::powf),
                    }
                    match bop {
                        BinOp::Div => all(b, len, |y| y != 0.0),
                        BinOp::Pow => all(a, len, |x| x > 0.0),
                        _ => true,
                    }
                }
            };
            if !ok || !all(Src::Lanes(out), len, f64::is_finite) {
                return None;
            }
            std::mem::swap(&mut self.spare, &mut self.regs[op.dst]);
        }
        Some(&*self.regs[self.program.result])
    }
}
