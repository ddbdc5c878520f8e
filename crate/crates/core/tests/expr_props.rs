use proptest::prelude::*;
use qmt_core::expr::{BinOp, Func, Node};
use qmt_core::{parse, ExprAst, Grid2D, ParamPoint, QmtError};

const PARAMS: [&str; 2] = ["A", "B"];

fn leaf() -> impl Strategy<Value = Node> {
    prop_oneof![
        (0.0f64..10.0).prop_map(Node::Const),
        (0u32..20).prop_map(|k| Node::Const(k as f64)),
        Just(Node::X),
        Just(Node::Y),
        Just(Node::Pi),
        prop::sample::select(PARAMS.to_vec()).prop_map(Node::param),
    ]
}

fn node() -> impl Strategy<Value = Node> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]);
        let func = prop::sample::select(Func::ALL.to_vec());
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Node::binary(op, a, b)),
            (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

fn point() -> ParamPoint {
    ParamPoint::from_pairs([("A", 0.75), ("B", 1.5)]).unwrap()
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(root in node()) {
        let ast = ExprAst::from_node(root, &PARAMS).unwrap();
        let printed = ast.to_string();
        let reparsed = parse(&printed, &PARAMS).unwrap();
        prop_assert_eq!(reparsed.root(), ast.root(), "printed as {}", printed);
    }

    #[test]
    fn grid_evaluation_matches_pointwise(root in node()) {
        let ast = ExprAst::from_node(root, &PARAMS).unwrap();
        let grid = Grid2D::new(-1.5, 2.0, -1.0, 1.0, 6, 5).unwrap();
        let p = point();
        match ast.eval_on_grid(&grid, &p) {
            Ok(field) => {
                for (k, (x, y)) in grid.points().enumerate() {
                    let v = ast.eval(x, y, &p).unwrap();
                    prop_assert_eq!(v.to_bits(), field[k].to_bits());
                }
            }
            Err(QmtError::NonFinite { index, .. }) => {
                for k in 0..index {
                    let (x, y) = grid.point(k);
                    prop_assert!(ast.eval(x, y, &p).is_ok());
                }
                let (x, y) = grid.point(index);
                prop_assert!(ast.eval(x, y, &p).is_err());
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn whitespace_is_ignored(root in node()) {
        let ast = ExprAst::from_node(root, &PARAMS).unwrap();
        let padded = ast.to_string().replace('(', " ( ").replace(')', "\t)\n");
        let reparsed = parse(&padded, &PARAMS).unwrap();
        prop_assert_eq!(reparsed.root(), ast.root());
    }

    #[test]
    fn garbage_never_panics(text in "[-+*/^()xyABpie0-9. ]{0,24}") {
        let _ = parse(&text, &PARAMS);
    }
}

#[test]
fn error_positions() {
    let cases: [(&str, usize); 6] = [
        ("x+*y", 2),
        ("(x", 2),
        ("x y", 2),
        ("sin x", 4),
        ("3 + $", 4),
        ("2x", 1),
    ];
    for (text, offset) in cases {
        match parse(text, &PARAMS) {
            Err(QmtError::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert_eq!(
        parse("A + C", &PARAMS),
        Err(QmtError::UnknownIdentifier { name: "C".into(), offset: 4 })
    );
}

#[test]
fn three_by_three_product_table() {
    let grid = Grid2D::square(1.0, 5).unwrap();
    let f = parse("x*y", &[]).unwrap().eval_on_grid(&grid, &ParamPoint::new()).unwrap();
    let mut table = Vec::new();
    for j in [0, 2, 4] {
        for i in [0, 2, 4] {
            table.push(f.at(i, j));
        }
    }
    assert_eq!(table, [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
}
