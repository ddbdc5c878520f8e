//! Real-valued expressions in `x`, `y` and named parameters.
//!
//! Used to describe wavefunction amplitudes and phases, gauge phases and
//! connections, e.g. `g*B*x*y` or `exp(-B*(x^2+y^2)/4)`.

mod ast;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

pub use ast::{BinOp, Func, Node};
pub use parser::is_reserved;

use crate::error::{QmtError, Result};
use crate::field::RealField;
use crate::grid::Grid2D;
use crate::params::ParamPoint;

/// Parsed expression together with the parameter names it may reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    root: Node,
    params: Vec<String>,
}

/// Parses `text`, accepting only the identifiers in `declared_params` besides
/// `x`, `y`, `pi` and the built-in functions.
pub fn parse(text: &str, declared_params: &[&str]) -> Result<ExprAst> {
    let params = check_declared(declared_params)?;
    let root = parser::parse_node(text, &params)?;
    Ok(ExprAst { root, params })
}

fn check_declared(names: &[&str]) -> Result<Vec<String>> {
    let mut seen = BTreeSet::new();
    for name in names {
        if is_reserved(name) {
            return Err(QmtError::invalid(format!("`{name}` is reserved and cannot be a parameter")));
        }
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(QmtError::invalid(format!("`{name}` is not a valid parameter name")));
        }
        if !seen.insert(*name) {
            return Err(QmtError::invalid(format!("parameter `{name}` declared twice")));
        }
    }
    Ok(names.iter().map(|s| s.to_string()).collect())
}

impl ExprAst {
    /// Wraps a hand-built tree. Every parameter node must be declared.
    pub fn from_node(root: Node, declared_params: &[&str]) -> Result<Self> {
        let params = check_declared(declared_params)?;
        let mut used = BTreeSet::new();
        root.collect_params(&mut used);
        if let Some(name) = used.iter().find(|u| !params.iter().any(|p| p == *u)) {
            return Err(QmtError::UnknownIdentifier { name: name.to_string(), offset: 0 });
        }
        Ok(Self { root, params })
    }

    pub fn constant(value: f64) -> Self {
        Self { root: Node::Const(value), params: Vec::new() }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Declared parameter names, in declaration order.
    pub fn declared_params(&self) -> &[String] {
        &self.params
    }

    /// Parameters that actually occur in the tree.
    pub fn referenced_params(&self) -> BTreeSet<&str> {
        let mut used = BTreeSet::new();
        self.root.collect_params(&mut used);
        used
    }

    pub fn references(&self, name: &str) -> bool {
        self.referenced_params().contains(name)
    }

    /// Replaces every occurrence of `name` by the constant `value` and drops
    /// it from the declared list.
    pub fn substitute(&self, name: &str, value: f64) -> ExprAst {
        ExprAst {
            root: self.root.substitute(name, value),
            params: self.params.iter().filter(|p| *p != name).cloned().collect(),
        }
    }

    /// `self + other`, declaring the union of both parameter lists.
    pub fn sum(&self, other: &ExprAst) -> ExprAst {
        let mut params = self.params.clone();
        for p in &other.params {
            if !params.contains(p) {
                params.push(p.clone());
            }
        }
        ExprAst { root: Node::plus(self.root.clone(), other.root.clone()), params }
    }

    fn bind(&self, params: &ParamPoint) -> Result<Bound> {
        fn go(node: &Node, params: &ParamPoint) -> Result<Bound> {
            Ok(match node {
                Node::Const(c) => Bound::Const(*c),
                Node::Pi => Bound::Const(std::f64::consts::PI),
                Node::X => Bound::X,
                Node::Y => Bound::Y,
                Node::Param(name) => Bound::Const(params.require(name)?),
                Node::Neg(a) => Bound::Neg(Box::new(go(a, params)?)),
                Node::Call(f, a) => Bound::Call(*f, Box::new(go(a, params)?)),
                Node::Binary(op, a, b) => {
                    Bound::Binary(*op, Box::new(go(a, params)?), Box::new(go(b, params)?))
                }
            })
        }
        go(&self.root, params)
    }

    /// Scalar evaluation at one point.
    pub fn eval(&self, x: f64, y: f64, params: &ParamPoint) -> Result<f64> {
        let v = self.bind(params)?.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QmtError::numerical(format!("`{self}` is not finite at ({x}, {y})")))
        }
    }

    /// Samples the expression on every lattice point. Fails with the first
    /// lattice index where the value is not finite.
    pub fn eval_on_grid(&self, grid: &Grid2D, params: &ParamPoint) -> Result<RealField> {
        let bound = self.bind(params)?;
        let mut samples = Vec::with_capacity(grid.len());
        for (k, (x, y)) in grid.points().enumerate() {
            let v = bound.eval(x, y);
            if !v.is_finite() {
                return Err(QmtError::NonFinite { what: format!("expression `{self}`"), index: k });
            }
            samples.push(v);
        }
        RealField::new(*grid, samples)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// Tree with parameters already replaced by their values.
enum Bound {
    Const(f64),
    X,
    Y,
    Neg(Box<Bound>),
    Binary(BinOp, Box<Bound>, Box<Bound>),
    Call(Func, Box<Bound>),
}

impl Bound {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Bound::Const(c) => *c,
            Bound::X => x,
            Bound::Y => y,
            Bound::Neg(a) => -a.eval(x, y),
            Bound::Call(f, a) => f.apply(a.eval(x, y)),
            Bound::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => power(a, b),
                }
            }
        }
    }
}

fn power(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(pairs: &[(&str, f64)]) -> ParamPoint {
        ParamPoint::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn evaluates_gauge_phase() {
        let e = parse("g*B*x*y", &["B", "g"]).unwrap();
        assert_eq!(e.eval(1.0, 3.0, &at(&[("g", 0.5), ("B", 2.0)])).unwrap(), 3.0);
    }

    #[test]
    fn evaluates_gaussian_at_origin() {
        let e = parse("exp(-B*(x^2+y^2)/4)", &["B"]).unwrap();
        assert_eq!(e.eval(0.0, 0.0, &at(&[("B", 1.0)])).unwrap(), 1.0);
    }

    #[test]
    fn reports_syntax_error_offset() {
        assert_eq!(
            parse("x+*y", &[]),
            Err(QmtError::Syntax { offset: 2, message: "unexpected operator `*`".into() })
        );
    }

    #[test]
    fn rejects_implicit_multiplication() {
        assert!(matches!(parse("2x", &[]), Err(QmtError::Syntax { offset: 1, .. })));
    }

    #[test]
    fn names_unknown_identifier() {
        assert_eq!(
            parse("B*x + k", &["B"]),
            Err(QmtError::UnknownIdentifier { name: "k".into(), offset: 6 })
        );
        assert!(matches!(parse("foo(x)", &[]), Err(QmtError::UnknownIdentifier { .. })));
    }

    #[test]
    fn misc_syntax_errors() {
        assert!(matches!(parse("", &[]), Err(QmtError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("   ", &[]), Err(QmtError::Syntax { .. })));
        assert!(matches!(parse("(x+y", &[]), Err(QmtError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("x)", &[]), Err(QmtError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("exp x", &[]), Err(QmtError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("x # y", &[]), Err(QmtError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("1..2", &[]), Err(QmtError::Syntax { offset: 0, .. })));
    }

    #[test]
    fn reserved_names_cannot_be_parameters() {
        assert!(parse("x", &["x"]).is_err());
        assert!(parse("1", &["exp"]).is_err());
        assert!(parse("1", &["B", "B"]).is_err());
        assert!(parse("1", &["2B"]).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let p = ParamPoint::new();
        let cases = [
            ("1 + 2 * 3", 7.0),
            ("2 ^ 3 ^ 2", 512.0),
            ("-2 ^ 2", -4.0),
            ("2 ^ -1", 0.5),
            ("8 / 4 / 2", 1.0),
            ("10 - 4 - 3", 3.0),
            ("-x * 3", -6.0),
            ("--x", 2.0),
            ("2.5e1 + .5", 25.5),
            ("1E-1*10", 1.0),
            ("cos(pi)", -1.0),
            ("abs(-3) + sqrt(16)", 7.0),
        ];
        for (text, expected) in cases {
            let v = parse(text, &[]).unwrap().eval(2.0, 0.0, &p).unwrap();
            assert!((v - expected).abs() < 1e-12, "{text} = {v}");
        }
    }

    #[test]
    fn grid_evaluation_is_row_major() {
        // coarsest lattice containing the 3x3 points {-1, 0, 1}^2
        let grid = Grid2D::square(1.0, 5).unwrap();
        let f = parse("x*y", &[]).unwrap().eval_on_grid(&grid, &ParamPoint::new()).unwrap();
        let corners: Vec<f64> = [0, 2, 4]
            .iter()
            .flat_map(|&j| [0, 2, 4].map(|i| f.at(i, j)))
            .collect();
        assert_eq!(corners, [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn pole_on_lattice_is_reported() {
        let grid = Grid2D::new(-1.0, 1.0, -1.0, 1.0, 5, 5).unwrap();
        let err = parse("1/x", &[]).unwrap().eval_on_grid(&grid, &ParamPoint::new());
        assert!(matches!(err, Err(QmtError::NonFinite { index: 2, .. })), "{err:?}");
        let err = parse("sqrt(x)", &[]).unwrap().eval_on_grid(&grid, &ParamPoint::new());
        assert!(matches!(err, Err(QmtError::NonFinite { index: 0, .. })));
    }

    #[test]
    fn unbound_parameter() {
        let grid = Grid2D::square(1.0, 4).unwrap();
        let e = parse("B", &["B"]).unwrap();
        assert_eq!(
            e.eval_on_grid(&grid, &ParamPoint::new()),
            Err(QmtError::UnboundParameter("B".into()))
        );
        let f = e.eval_on_grid(&grid, &at(&[("B", 2.5)])).unwrap();
        assert!(f.samples().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn substitute_and_sum() {
        let e = parse("g*B*x*y", &["B", "g"]).unwrap().substitute("g", 0.5);
        assert_eq!(e.declared_params(), ["B"]);
        assert!(!e.references("g"));
        let s = e.sum(&parse("A", &["A"]).unwrap());
        assert_eq!(s.declared_params(), ["B", "A"]);
        let v = s.eval(1.0, 2.0, &at(&[("A", 1.0), ("B", 3.0)])).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn from_node_checks_declarations() {
        let node = Node::product([Node::param("B"), Node::X]);
        assert!(ExprAst::from_node(node.clone(), &["B"]).is_ok());
        assert!(ExprAst::from_node(node, &[]).is_err());
    }
}
