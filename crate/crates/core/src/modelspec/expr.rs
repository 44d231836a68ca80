//! Expression trees, evaluation and a compact stack-machine form used by the simulator.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => a.powf(b),
        }
    }
}

/// Built-in functions. `pow(x, y)` is the only one; it is kept distinct from `x ^ y`
/// so that printing reproduces the source form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Pow,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "pow" => Some(Func::Pow),
            _ => None,
        }
    }
}

/// Expression tree. Literals produced by the parser are non-negative; a leading minus
/// is represented by [`Expr::Neg`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Sym(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("non-finite result while evaluating `{0}`")]
    NonFiniteResult(String),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Symbol names in order of first occurrence.
    pub fn symbols(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.walk_symbols(&mut |s| {
            if !out.contains(&s) {
                out.push(s);
            }
        });
        out
    }

    fn walk_symbols<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => f(s),
            Expr::Neg(a) => a.walk_symbols(f),
            Expr::Bin(_, a, b) => {
                a.walk_symbols(f);
                b.walk_symbols(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk_symbols(f)),
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.walk_symbols(&mut |s| found |= s == name);
        found
    }

    /// Evaluates with symbols looked up through `lookup`.
    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Sym(s) => lookup(s).ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?,
            Expr::Neg(a) => -a.eval_with(lookup)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_with(lookup)?;
                let y = b.eval_with(lookup)?;
                op.apply(x, y)
            }
            Expr::Call(Func::Pow, args) => {
                let x = args[0].eval_with(lookup)?;
                let y = args[1].eval_with(lookup)?;
                x.powf(y)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFiniteResult(self.to_string()))
        }
    }

    /// Compiles to a stack program; symbols are resolved to slot indices by `slot`.
    pub fn compile(&self, slot: &dyn Fn(&str) -> Option<usize>) -> Result<Program, EvalError> {
        let mut ops = Vec::new();
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        self.emit(slot, &mut ops, &mut depth, &mut max_depth)?;
        Ok(Program { ops, max_depth })
    }

    fn emit(
        &self,
        slot: &dyn Fn(&str) -> Option<usize>,
        ops: &mut Vec<Op>,
        depth: &mut usize,
        max_depth: &mut usize,
    ) -> Result<(), EvalError> {
        match self {
            Expr::Num(v) => {
                ops.push(Op::Const(*v));
                *depth += 1;
            }
            Expr::Sym(s) => {
                let i = slot(s).ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?;
                ops.push(Op::Load(i));
                *depth += 1;
            }
            Expr::Neg(a) => {
                a.emit(slot, ops, depth, max_depth)?;
                ops.push(Op::Neg);
            }
            Expr::Bin(op, a, b) => {
                a.emit(slot, ops, depth, max_depth)?;
                b.emit(slot, ops, depth, max_depth)?;
                ops.push(Op::Bin(*op));
                *depth -= 1;
            }
            Expr::Call(Func::Pow, args) => {
                args[0].emit(slot, ops, depth, max_depth)?;
                args[1].emit(slot, ops, depth, max_depth)?;
                ops.push(Op::Bin(BinOp::Pow));
                *depth -= 1;
            }
        }
        *max_depth = (*max_depth).max(*depth);
        Ok(())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, _, _) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, _, _) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, _, _) => 4,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            Expr::Num(_) | Expr::Sym(_) | Expr::Call(_, _) => 5,
        }
    }

    fn fmt_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_min(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Sym(s) => f.write_str(s),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_min(f, 3)
            }
            Expr::Bin(BinOp::Pow, a, b) => {
                a.fmt_min(f, 5)?;
                f.write_str("^")?;
                b.fmt_min(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let p = self.precedence();
                a.fmt_min(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_min(f, p + 1)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt_min(f, 0)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_min(f, 0)
    }
}

/// Evaluates `e` against a name to value map.
pub fn eval_expr(e: &Expr, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
    e.eval_with(&|s| bindings.get(s).copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Neg,
    Bin(BinOp),
}

/// Stack-machine form of an expression over a flat slot array.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    max_depth: usize,
}

impl Program {
    pub fn stack_size(&self) -> usize {
        self.max_depth
    }

    /// Evaluates without finiteness checks; `stack` is reused scratch space.
    pub fn eval(&self, slots: &[f64], stack: &mut Vec<f64>) -> f64 {
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Load(i) => stack.push(slots[i]),
                Op::Neg => {
                    let top = stack.last_mut().expect("stack underflow");
                    *top = -*top;
                }
                Op::Bin(b) => {
                    let y = stack.pop().expect("stack underflow");
                    let x = stack.last_mut().expect("stack underflow");
                    *x = b.apply(*x, y);
                }
            }
        }
        stack.pop().expect("empty program")
    }
}
