//! Line-oriented parser for the `.com` model DSL.
//!
//! ```text
//! model <name>
//! input <name> [= value] [, <name> [= value] ...]
//! exog <name> ~ constant(c) | uniform(lo, hi)
//! const <name> = value
//! var <name> [= initial] [, ...]
//! static <label>: <expr> = 0
//! dyn <var>: <expr>
//! eq <var> [as <label>]: <expr> = 0
//! invariant <label>: <expr> = 0
//! ```
//!
//! `#` starts a comment. Expressions support `+ - * / ^`, unary minus, parentheses and
//! `pow(x, y)`; `^` binds tighter than unary minus and is right-associative.

use std::collections::HashSet;

use thiserror::Error;

use super::expr::{BinOp, Expr, Func};
use super::{Constant, Distribution, Dynamics, Exogenous, Input, LabelledEquation, ModelSpec, Override, Variable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: expected {expected}")]
    SyntaxError { line: usize, col: usize, expected: String },
    #[error("line {line}: unknown symbol `{name}`")]
    UnknownSymbol { name: String, line: usize },
    #[error("line {line}: `{name}` is not a declared variable")]
    NotAVariable { name: String, line: usize },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("equilibrium override for `{0}`, which has no dynamics")]
    OverrideWithoutDynamics(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ParseError::SyntaxError {
                line: lineno,
                col,
                expected: "a number".into(),
            })?;
            out.push(Token { tok: Tok::Num(v), col });
        } else if "(),:=~+-*/^".contains(c) {
            out.push(Token { tok: Tok::Punct(c), col });
            i += 1;
        } else {
            return Err(ParseError::SyntaxError { line: lineno, col, expected: "a valid token".into() });
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError { line: self.line, col: self.col(), expected: expected.to_string() })
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(what),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("`{c}`"))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("end of line")
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.err("a number"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            Ok(Expr::bin(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Punct('(')) {
                    let Some(func) = Func::from_name(&name) else {
                        self.pos -= 1;
                        return self.err("a known function (pow)");
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if args.len() != func.arity() {
                        return self.err(&format!("{} arguments to {}", func.arity(), func.name()));
                    }
                    self.expect(')')?;
                    Ok(Expr::Call(func, args))
                } else {
                    Ok(Expr::Sym(name))
                }
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => self.err("an expression"),
        }
    }

    /// Parses `<expr> = 0` to the end of the line.
    fn residual(&mut self) -> Result<Expr, ParseError> {
        let e = self.expr()?;
        self.expect('=')?;
        match self.peek() {
            Some(Tok::Num(v)) if *v == 0.0 => self.pos += 1,
            _ => return self.err("`0` on the right-hand side"),
        }
        self.end()?;
        Ok(e)
    }

    fn name_list(&mut self) -> Result<Vec<(String, Option<f64>)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let name = self.ident("a name")?;
            let value = if self.eat('=') { Some(self.signed_number()?) } else { None };
            out.push((name, value));
            self.eat(',');
            if self.pos == self.toks.len() {
                return Ok(out);
            }
        }
    }
}

/// Equations keep their source line so that resolution errors can point at it.
struct Located<T> {
    line: usize,
    item: T,
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    variables: Vec<Variable>,
    inputs: Vec<Input>,
    exogenous: Vec<Exogenous>,
    constants: Vec<Constant>,
    dynamics: Vec<Located<Dynamics>>,
    statics: Vec<Located<LabelledEquation>>,
    overrides: Vec<Located<Override>>,
    invariants: Vec<Located<LabelledEquation>>,
}

fn parse_line(cur: &mut Cursor<'_>, d: &mut Draft) -> Result<(), ParseError> {
    let line = cur.line;
    let kw = cur.ident("a section keyword")?;
    match kw.as_str() {
        "model" => {
            if d.name.is_some() {
                cur.pos -= 1;
                return cur.err("a single `model` declaration");
            }
            d.name = Some(cur.ident("a model name")?);
            cur.end()
        }
        "input" => {
            for (name, value) in cur.name_list()? {
                d.inputs.push(Input { name, value });
            }
            Ok(())
        }
        "var" => {
            for (name, initial) in cur.name_list()? {
                d.variables.push(Variable { name, initial });
            }
            Ok(())
        }
        "exog" => {
            let name = cur.ident("an exogenous variable name")?;
            cur.expect('~')?;
            let dist = if cur.keyword("constant") {
                cur.expect('(')?;
                let c = cur.signed_number()?;
                cur.expect(')')?;
                Distribution::Constant(c)
            } else if cur.keyword("uniform") {
                cur.expect('(')?;
                let lo = cur.signed_number()?;
                cur.expect(',')?;
                let hi = cur.signed_number()?;
                if hi < lo {
                    return cur.err("an upper bound not below the lower bound");
                }
                cur.expect(')')?;
                Distribution::Uniform(lo, hi)
            } else {
                return cur.err("`constant(..)` or `uniform(..)`");
            };
            cur.end()?;
            d.exogenous.push(Exogenous { name, dist });
            Ok(())
        }
        "const" => {
            let name = cur.ident("a constant name")?;
            cur.expect('=')?;
            let value = cur.signed_number()?;
            cur.end()?;
            d.constants.push(Constant { name, value });
            Ok(())
        }
        "static" | "invariant" => {
            let label = cur.ident("an equation label")?;
            cur.expect(':')?;
            let residual = cur.residual()?;
            let item = Located { line, item: LabelledEquation { label, residual } };
            if kw == "static" {
                d.statics.push(item);
            } else {
                d.invariants.push(item);
            }
            Ok(())
        }
        "dyn" => {
            let var = cur.ident("a variable name")?;
            cur.expect(':')?;
            let rhs = cur.expr()?;
            cur.end()?;
            d.dynamics.push(Located { line, item: Dynamics { var, rhs } });
            Ok(())
        }
        "eq" => {
            let var = cur.ident("a variable name")?;
            let label = if cur.keyword("as") { Some(cur.ident("an equation label")?) } else { None };
            cur.expect(':')?;
            let residual = cur.residual()?;
            d.overrides.push(Located { line, item: Override { var, label, residual } });
            Ok(())
        }
        _ => {
            cur.pos -= 1;
            cur.err("one of model, input, exog, const, var, static, dyn, eq, invariant")
        }
    }
}

fn check_symbols(e: &Expr, line: usize, known: &HashSet<&str>) -> Result<(), ParseError> {
    for s in e.symbols() {
        if !known.contains(s) {
            return Err(ParseError::UnknownSymbol { name: s.to_string(), line });
        }
    }
    Ok(())
}

fn claim(seen: &mut HashSet<String>, name: &str) -> Result<(), ParseError> {
    if seen.insert(name.to_string()) {
        Ok(())
    } else {
        Err(ParseError::DuplicateName(name.to_string()))
    }
}

/// Parses and validates model source text.
pub fn parse_model(text: &str) -> Result<ModelSpec, ParseError> {
    let mut d = Draft::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor { toks: &toks, pos: 0, line, end_col: raw.chars().count() + 1 };
        parse_line(&mut cur, &mut d)?;
    }
    let name = d.name.ok_or_else(|| ParseError::SyntaxError {
        line: 1,
        col: 1,
        expected: "a `model <name>` declaration".into(),
    })?;

    let mut seen: HashSet<String> = HashSet::new();
    let symbol_names = d
        .variables
        .iter()
        .map(|v| &v.name)
        .chain(d.inputs.iter().map(|v| &v.name))
        .chain(d.exogenous.iter().map(|v| &v.name))
        .chain(d.constants.iter().map(|v| &v.name));
    for n in symbol_names {
        claim(&mut seen, n)?;
    }

    let vars: HashSet<&str> = d.variables.iter().map(|v| v.name.as_str()).collect();
    let known_owned = seen.clone();
    let known: HashSet<&str> = known_owned.iter().map(|s| s.as_str()).collect();
    let mut with_dyn: HashSet<&str> = HashSet::new();
    for dy in &d.dynamics {
        let v = dy.item.var.as_str();
        if !vars.contains(v) {
            return Err(if known.contains(v) {
                ParseError::NotAVariable { name: v.to_string(), line: dy.line }
            } else {
                ParseError::UnknownSymbol { name: v.to_string(), line: dy.line }
            });
        }
        if !with_dyn.insert(v) {
            return Err(ParseError::DuplicateName(format!("dyn {v}")));
        }
        check_symbols(&dy.item.rhs, dy.line, &known)?;
    }
    let mut with_override: HashSet<&str> = HashSet::new();
    for o in &d.overrides {
        let v = o.item.var.as_str();
        if !vars.contains(v) {
            return Err(if known.contains(v) {
                ParseError::NotAVariable { name: v.to_string(), line: o.line }
            } else {
                ParseError::UnknownSymbol { name: v.to_string(), line: o.line }
            });
        }
        if !with_dyn.contains(v) {
            return Err(ParseError::OverrideWithoutDynamics(v.to_string()));
        }
        if !with_override.insert(v) {
            return Err(ParseError::DuplicateName(format!("eq {v}")));
        }
        check_symbols(&o.item.residual, o.line, &known)?;
    }
    for s in d.statics.iter().chain(d.invariants.iter()) {
        check_symbols(&s.item.residual, s.line, &known)?;
    }

    // Equation labels share the global namespace with symbols.
    let mut labels: Vec<String> = Vec::new();
    labels.extend(d.statics.iter().map(|s| s.item.label.clone()));
    for dy in &d.dynamics {
        labels.push(ModelSpec::dynamic_label(&dy.item.var));
        let ov = d.overrides.iter().find(|o| o.item.var == dy.item.var);
        labels.push(match ov.and_then(|o| o.item.label.clone()) {
            Some(l) => l,
            None => format!("f_{}", dy.item.var),
        });
    }
    labels.extend(d.invariants.iter().map(|s| s.item.label.clone()));
    for l in &labels {
        claim(&mut seen, l)?;
    }

    Ok(ModelSpec {
        name,
        variables: d.variables,
        inputs: d.inputs,
        exogenous: d.exogenous,
        constants: d.constants,
        dynamics: d.dynamics.into_iter().map(|l| l.item).collect(),
        statics: d.statics.into_iter().map(|l| l.item).collect(),
        overrides: d.overrides.into_iter().map(|l| l.item).collect(),
        invariants: d.invariants.into_iter().map(|l| l.item).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = "model example1\nexog w1 ~ constant(1)\nexog w2 ~ constant(2)\nvar v1 v2\nstatic f1: v1 - w1 = 0\nstatic f2: v2 + v1 - w2 = 0\n";

    #[test]
    fn two_static_equations() {
        let m = parse_model(EXAMPLE1).unwrap();
        assert_eq!(m.variables.len(), 2);
        assert_eq!(m.statics.len(), 2);
        assert!(m.dynamics.is_empty());
    }

    #[test]
    fn undeclared_symbol_is_rejected() {
        let err = parse_model("model m\nstatic f: X = 0\n").unwrap_err();
        assert_eq!(err, ParseError::UnknownSymbol { name: "X".into(), line: 2 });
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_model("model m\nvar x\ndyn x: (x + \n").unwrap_err();
        assert_eq!(err, ParseError::SyntaxError { line: 3, col: 13, expected: "an expression".into() });
    }

    #[test]
    fn duplicate_names_are_rejected() {
        assert_eq!(
            parse_model("model m\nvar x\nconst x = 1\n").unwrap_err(),
            ParseError::DuplicateName("x".into())
        );
        assert_eq!(
            parse_model("model m\nvar x\nstatic f_x: x = 0\ndyn x: -x\n").unwrap_err(),
            ParseError::DuplicateName("f_x".into())
        );
    }

    #[test]
    fn override_needs_dynamics() {
        assert_eq!(
            parse_model("model m\nvar x\nstatic f: x - 1 = 0\neq x: x = 0\n").unwrap_err(),
            ParseError::OverrideWithoutDynamics("x".into())
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let m = parse_model("model m\nvar x\ndyn x: -x^2^3 - 2*x/4 - -1\n").unwrap();
        assert_eq!(m.dynamics[0].rhs.to_string(), "-x^2^3 - 2 * x / 4 - -1");
        let Expr::Bin(BinOp::Sub, lhs, _) = &m.dynamics[0].rhs else { panic!() };
        let Expr::Bin(BinOp::Sub, neg, _) = lhs.as_ref() else { panic!() };
        let Expr::Neg(pow) = neg.as_ref() else { panic!() };
        let Expr::Bin(BinOp::Pow, _, exp) = pow.as_ref() else { panic!() };
        assert!(matches!(exp.as_ref(), Expr::Bin(BinOp::Pow, _, _)));
    }

    #[test]
    fn pretty_print_round_trips() {
        let src = "model m\ninput u = 1.5\nexog w ~ uniform(-1, 2e-3)\nconst k = 0.0001\nvar x = 1, y\n\
                   static f_y: y - pow(x, 2) = 0\ndyn x: u*(w - x)/(k + x)\neq x as f_x2: u - x = 0\ninvariant c: x + y - 1 = 0\n";
        let m = parse_model(src).unwrap();
        let again = parse_model(&m.to_string()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let m = parse_model("# header\n\nmodel m # trailing\nvar x\ndyn x: 1 # rate\n").unwrap();
        assert_eq!(m.name, "m");
        assert_eq!(m.dynamics.len(), 1);
    }
}
