//! Symbolic differentiation and the folding constructors it relies on.

use super::{pow_checked, BinOp, Func, Node};

fn is_const(n: &Node, v: f64) -> bool {
    matches!(n, Node::Const(c) if *c == v)
}

/// Folds `op(a, b)` when both operands are constants and the result is finite.
pub(crate) fn fold_binary(op: BinOp, a: Node, b: Node) -> Node {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        let r = match op {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div => x / y,
        };
        if r.is_finite() && !(op == BinOp::Div && *y == 0.0) {
            return Node::Const(r);
        }
    }
    Node::Binary(op, Box::new(a), Box::new(b))
}

pub(crate) fn fold_unary(f: Func, a: Node) -> Node {
    if let Node::Const(x) = a {
        let r = match f {
            Func::Neg => Some(-x),
            Func::Sin => Some(x.sin()),
            Func::Cos => Some(x.cos()),
            Func::Exp => Some(x.exp()),
            Func::Log => (x > 0.0).then(|| x.ln()),
            Func::Sqrt => (x >= 0.0).then(|| x.sqrt()),
        };
        if let Some(r) = r.filter(|r| r.is_finite()) {
            return Node::Const(r);
        }
    }
    Node::Unary(f, Box::new(a))
}

pub(crate) fn fold_pow(a: Node, p: f64) -> Node {
    if let Node::Const(x) = a {
        if let Some(r) = pow_checked(x, p).filter(|r| r.is_finite()) {
            return Node::Const(r);
        }
    }
    Node::Pow(Box::new(a), p)
}

// The constructors below also drop additive zeros and multiplicative ones so
// derivative trees stay small.

fn add(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    fold_binary(BinOp::Add, a, b)
}

fn sub(a: Node, b: Node) -> Node {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    fold_binary(BinOp::Sub, a, b)
}

fn mul(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Node::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    fold_binary(BinOp::Mul, a, b)
}

fn div(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        return Node::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    fold_binary(BinOp::Div, a, b)
}

fn neg(a: Node) -> Node {
    if let Node::Unary(Func::Neg, inner) = a {
        return *inner;
    }
    fold_unary(Func::Neg, a)
}

fn pow(a: Node, p: f64) -> Node {
    if p == 0.0 {
        return Node::Const(1.0);
    }
    if p == 1.0 {
        return a;
    }
    fold_pow(a, p)
}

fn un(f: Func, a: &Node) -> Node {
    fold_unary(f, a.clone())
}

/// Derivative of `node` with respect to variable index `k`.
pub(crate) fn derivative(node: &Node, k: usize) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(j) => Node::Const(if *j == k { 1.0 } else { 0.0 }),
        Node::Unary(f, a) => {
            let da = derivative(a, k);
            if is_const(&da, 0.0) {
                return Node::Const(0.0);
            }
            match f {
                Func::Neg => neg(da),
                Func::Sin => mul(un(Func::Cos, a), da),
                Func::Cos => mul(neg(un(Func::Sin, a)), da),
                Func::Exp => mul(un(Func::Exp, a), da),
                Func::Log => div(da, (**a).clone()),
                Func::Sqrt => div(da, mul(Node::Const(2.0), un(Func::Sqrt, a))),
            }
        }
        Node::Binary(op, a, b) => {
            let da = derivative(a, k);
            let db = derivative(b, k);
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, (**b).clone()), mul((**a).clone(), db)),
                BinOp::Div => {
                    if is_const(&db, 0.0) {
                        return div(da, (**b).clone());
                    }
                    div(
                        sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                        pow((**b).clone(), 2.0),
                    )
                }
            }
        }
        Node::Pow(a, p) => {
            let da = derivative(a, k);
            mul(mul(Node::Const(*p), pow((**a).clone(), p - 1.0)), da)
        }
    }
}
