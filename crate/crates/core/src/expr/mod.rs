//! Scalar expressions for the problem data.
//!
//! The grammar is intentionally small: real constants, the slot variables,
//! `+ - * / ^`, the unary functions `sin cos exp log sqrt` and the named
//! constants `pi` and `e`. Exponents must be constant so that symbolic
//! differentiation stays single-case and closed over the grammar.
//!
//! An [`Expr`] remembers the variable names of the slot it was parsed for;
//! [`Expr::eval`] takes values positionally in that order.

mod diff;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use parse::{parse_expression, ParseError};

/// Unary functions of the grammar. `Neg` is unary minus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree node. Variables are indices into the owning
/// [`Expr`]'s variable list.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Unary(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
}

/// Evaluation failure. `subexpr` is the printed form of the offending node.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{subexpr}`: {reason}")]
    Domain { subexpr: String, reason: &'static str },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
}

/// A parsed expression together with the variable names of its slot.
#[derive(Clone, Debug)]
pub struct Expr {
    node: Node,
    vars: Arc<[String]>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node && self.vars == other.vars
    }
}

impl Expr {
    pub(crate) fn from_node(node: Node, vars: Arc<[String]>) -> Self {
        Expr { node, vars }
    }

    /// Parses `text` for a slot whose variables are `vars`.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ParseError> {
        parse_expression(text, vars)
    }

    /// The constant expression `c` in a slot with variables `vars`.
    pub fn constant(c: f64, vars: &[&str]) -> Self {
        Expr {
            node: Node::Const(c),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Variables that actually occur in the tree, in slot order.
    pub fn free_vars(&self) -> Vec<&str> {
        let mut used = vec![false; self.vars.len()];
        mark_vars(&self.node, &mut used);
        self.vars
            .iter()
            .zip(used)
            .filter(|(_, u)| *u)
            .map(|(v, _)| v.as_str())
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.node, Node::Const(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node, Node::Const(c) if c == 0.0)
    }

    /// Evaluates with positional values in slot order.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        eval_node(&self.node, values, &self.vars)
    }

    /// Evaluates with named bindings; every free variable must be bound.
    pub fn evaluate(&self, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for (k, name) in self.vars.iter().enumerate() {
            match bindings.get(name.as_str()) {
                Some(v) => values.push(*v),
                None if !occurs(&self.node, k) => values.push(0.0),
                None => return Err(EvalError::Unbound(name.clone())),
            }
        }
        eval_node(&self.node, &values, &self.vars)
    }

    /// Exact symbolic derivative with respect to `var`. A name that is not
    /// one of the slot variables yields the zero expression.
    pub fn differentiate(&self, var: &str) -> Expr {
        let node = match self.vars.iter().position(|v| v == var) {
            Some(k) => diff::derivative(&self.node, k),
            None => Node::Const(0.0),
        };
        Expr {
            node,
            vars: self.vars.clone(),
        }
    }
}

/// Free-function form of [`Expr::differentiate`].
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    e.differentiate(var)
}

/// Free-function form of [`Expr::evaluate`].
pub fn evaluate(e: &Expr, bindings: &HashMap<&str, f64>) -> Result<f64, EvalError> {
    e.evaluate(bindings)
}

fn mark_vars(node: &Node, used: &mut [bool]) {
    match node {
        Node::Const(_) => {}
        Node::Var(k) => used[*k] = true,
        Node::Unary(_, a) | Node::Pow(a, _) => mark_vars(a, used),
        Node::Binary(_, a, b) => {
            mark_vars(a, used);
            mark_vars(b, used);
        }
    }
}

fn occurs(node: &Node, k: usize) -> bool {
    match node {
        Node::Const(_) => false,
        Node::Var(j) => *j == k,
        Node::Unary(_, a) | Node::Pow(a, _) => occurs(a, k),
        Node::Binary(_, a, b) => occurs(a, k) || occurs(b, k),
    }
}

fn domain(node: &Node, vars: &[String], reason: &'static str) -> EvalError {
    EvalError::Domain {
        subexpr: NodeDisplay { node, vars }.to_string(),
        reason,
    }
}

fn eval_node(node: &Node, values: &[f64], vars: &[String]) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var(k) => values[*k],
        Node::Unary(f, a) => {
            let x = eval_node(a, values, vars)?;
            match f {
                Func::Neg => -x,
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(domain(node, vars, "logarithm of a non-positive value"));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(domain(node, vars, "square root of a negative value"));
                    }
                    x.sqrt()
                }
            }
        }
        Node::Binary(op, a, b) => {
            let x = eval_node(a, values, vars)?;
            let y = eval_node(b, values, vars)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(domain(node, vars, "division by zero"));
                    }
                    x / y
                }
            }
        }
        Node::Pow(a, p) => {
            let x = eval_node(a, values, vars)?;
            pow_checked(x, *p).ok_or_else(|| domain(node, vars, "power outside its real domain"))?
        }
    })
}

pub(crate) fn pow_checked(x: f64, p: f64) -> Option<f64> {
    if p == p.trunc() && p.abs() <= 64.0 {
        if x == 0.0 && p < 0.0 {
            return None;
        }
        Some(x.powi(p as i32))
    } else {
        if x < 0.0 || (x == 0.0 && p < 0.0) {
            return None;
        }
        Some(x.powf(p))
    }
}

struct NodeDisplay<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self.node, self.vars)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 || (c == 0.0 && c.is_sign_negative()) {
        write!(f, "(-{})", -c)
    } else {
        write!(f, "{c}")
    }
}

// Fully parenthesised so that printing re-parses to the same tree.
fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, vars: &[String]) -> fmt::Result {
    match node {
        Node::Const(c) => write_const(f, *c),
        Node::Var(k) => f.write_str(&vars[*k]),
        Node::Unary(Func::Neg, a) => {
            f.write_str("(-")?;
            write_node(f, a, vars)?;
            f.write_str(")")
        }
        Node::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, vars)?;
            f.write_str(")")
        }
        Node::Binary(op, a, b) => {
            f.write_str("(")?;
            write_node(f, a, vars)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, b, vars)?;
            f.write_str(")")
        }
        Node::Pow(a, p) => {
            f.write_str("(")?;
            write_node(f, a, vars)?;
            f.write_str("^")?;
            write_const(f, *p)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.node, &self.vars)
    }
}

/// A univariate slot function with its first two derivatives attached.
#[derive(Clone, Debug)]
pub struct Smooth1 {
    pub expr: Expr,
    pub d1: Expr,
    pub d2: Expr,
}

impl Smooth1 {
    /// Parses a univariate function of `var` and differentiates it twice.
    pub fn parse(text: &str, var: &str) -> Result<Self, ParseError> {
        Ok(Self::from_expr(parse_expression(text, &[var])?))
    }

    pub fn from_expr(expr: Expr) -> Self {
        let var = expr.vars()[0].clone();
        let d1 = expr.differentiate(&var);
        let d2 = d1.differentiate(&var);
        Smooth1 { expr, d1, d2 }
    }

    pub fn zero(var: &str) -> Self {
        Self::from_expr(Expr::constant(0.0, &[var]))
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    pub fn value(&self, s: f64) -> Result<f64, EvalError> {
        self.expr.eval(&[s])
    }

    pub fn d1(&self, s: f64) -> Result<f64, EvalError> {
        self.d1.eval(&[s])
    }

    pub fn d2(&self, s: f64) -> Result<f64, EvalError> {
        self.d2.eval(&[s])
    }
}

/// The bivariate source `f(t, x)` with the partial derivatives the
/// construction consumes.
#[derive(Clone, Debug)]
pub struct Source {
    pub expr: Expr,
    pub dx: Expr,
    pub dt: Expr,
}

impl Source {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(Self::from_expr(parse_expression(text, &["t", "x"])?))
    }

    pub fn from_expr(expr: Expr) -> Self {
        let dx = expr.differentiate("x");
        let dt = expr.differentiate("t");
        Source { expr, dx, dt }
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_zero()
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        self.expr.eval(&[t, x])
    }

    pub fn dx(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        self.dx.eval(&[t, x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, vars: &[&str]) -> Expr {
        parse_expression(text, vars).unwrap()
    }

    #[test]
    fn evaluates_named_bindings() {
        let e = p("2*x + t", &["t", "x"]);
        let b: HashMap<&str, f64> = [("t", 1.0), ("x", 0.5)].into_iter().collect();
        assert_eq!(e.evaluate(&b).unwrap(), 2.0);
    }

    #[test]
    fn sin_half_pi_is_one() {
        let e = p("sin(pi/2)", &[]);
        assert!((e.evaluate(&HashMap::new()).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn sqrt_of_negative_reports_subexpression() {
        let e = p("sqrt(x)", &["x"]);
        let b: HashMap<&str, f64> = [("x", -1.0)].into_iter().collect();
        match e.evaluate(&b) {
            Err(EvalError::Domain { subexpr, .. }) => assert_eq!(subexpr, "sqrt(x)"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn log_and_division_domain_errors() {
        let e = p("1 + log(x)", &["x"]);
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::Domain { .. })));
        let e = p("1/(x - 1)", &["x"]);
        match e.eval(&[1.0]) {
            Err(EvalError::Domain { subexpr, reason }) => {
                assert_eq!(subexpr, "(1 / (x - 1))");
                assert_eq!(reason, "division by zero");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbound_variable_is_reported() {
        let e = p("x*t", &["t", "x"]);
        let b: HashMap<&str, f64> = [("t", 1.0)].into_iter().collect();
        assert_eq!(e.evaluate(&b), Err(EvalError::Unbound("x".into())));
    }

    #[test]
    fn fractional_power_of_negative_base_is_domain_error() {
        let e = p("x^0.5", &["x"]);
        assert!(e.eval(&[-2.0]).is_err());
        assert_eq!(p("x^3", &["x"]).eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn free_vars_reports_only_used_names() {
        let e = p("t^2 + 1", &["t", "x"]);
        assert_eq!(e.free_vars(), vec!["t"]);
    }

    #[test]
    fn smooth1_attaches_two_derivatives() {
        let s = Smooth1::parse("x^3", "x").unwrap();
        assert_eq!(s.value(2.0).unwrap(), 8.0);
        assert_eq!(s.d1(2.0).unwrap(), 12.0);
        assert_eq!(s.d2(2.0).unwrap(), 12.0);
    }
}
