use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Sqrt, Func::Sin, Func::Cos, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Abs => v.abs(),
        }
    }
}

/// Expression tree over the coordinates `x`, `y` and named parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Pi,
    X,
    Y,
    Param(String),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn param(name: &str) -> Node {
        Node::Param(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn plus(lhs: Node, rhs: Node) -> Node {
        Node::binary(BinOp::Add, lhs, rhs)
    }

    pub fn times(lhs: Node, rhs: Node) -> Node {
        Node::binary(BinOp::Mul, lhs, rhs)
    }

    /// Product of all factors, left-associated. Empty input gives `1`.
    pub fn product<I: IntoIterator<Item = Node>>(factors: I) -> Node {
        factors
            .into_iter()
            .reduce(Node::times)
            .unwrap_or(Node::Const(1.0))
    }

    pub(crate) fn collect_params<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Node::Param(name) => {
                out.insert(name);
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_params(out),
            Node::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Node::Const(_) | Node::Pi | Node::X | Node::Y => {}
        }
    }

    pub(crate) fn substitute(&self, name: &str, value: f64) -> Node {
        match self {
            Node::Param(p) if p == name => Node::Const(value),
            Node::Neg(a) => Node::Neg(Box::new(a.substitute(name, value))),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.substitute(name, value))),
            Node::Binary(op, a, b) => Node::Binary(
                *op,
                Box::new(a.substitute(name, value)),
                Box::new(b.substitute(name, value)),
            ),
            other => other.clone(),
        }
    }
}

/// Binary and negation nodes are always printed in parentheses, so printing then
/// reparsing reproduces the tree. A negative constant prints as `(-c)` and
/// reparses as a negation; the parser itself never produces one.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Node::Const(c) => write!(f, "{c}"),
            Node::Pi => write!(f, "pi"),
            Node::X => write!(f, "x"),
            Node::Y => write!(f, "y"),
            Node::Param(name) => write!(f, "{name}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
