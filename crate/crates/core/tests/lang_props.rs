use proptest::prelude::*;
use qrefine::lang::{parse_expr, parse_stmt, pretty_block, BinOp, Expr, Stmt, UnOp};

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["A", "Pe0", "Omega", "x'", "t1", "Rz"]).prop_map(String::from)
}

fn reg() -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(vec!["q0", "q1", "t", "a'"], 0..=3)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..64).prop_map(|k| Expr::Number(k as f64 / 8.0)),
        (1u32..16).prop_map(|k| Expr::Imag(k as f64 / 4.0)),
        "[01]{1,4}".prop_map(Expr::Ket),
        ident().prop_map(Expr::Ident),
        ident().prop_map(Expr::Iqopt),
    ]
}

fn binop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Tensor,
        BinOp::Join,
        BinOp::Meet,
        BinOp::Implies,
        BinOp::Conjunct,
    ])
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (binop(), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (
                prop::sample::select(vec![UnOp::Neg, UnOp::Dagger, UnOp::Perp]),
                inner.clone()
            )
                .prop_map(|(op, a)| Expr::un(op, a)),
            inner.clone().prop_map(|a| Expr::Ray(Box::new(a))),
            (ident(), prop::collection::vec(inner.clone(), 1..3))
                .prop_map(|(f, args)| Expr::Call(f, args)),
            (inner, reg())
                .prop_filter("postfix register on a non-literal", |(a, _)| !matches!(
                    a,
                    Expr::Number(_) | Expr::Imag(_) | Expr::Ket(_) | Expr::Apply(..)
                ))
                .prop_map(|(a, r)| Expr::Apply(Box::new(a), r)),
        ]
    })
}

fn stmt() -> impl Strategy<Value = Stmt> {
    let leaf = prop_oneof![
        Just(Stmt::Skip),
        Just(Stmt::Abort),
        reg().prop_filter("nonempty", |r| !r.is_empty()).prop_map(Stmt::Init),
        (ident(), reg()).prop_map(|(u, r)| Stmt::Unitary(Expr::Apply(
            Box::new(Expr::Ident(u)),
            r
        ))),
        expr().prop_map(Stmt::Assert),
        (expr(), expr()).prop_map(|(p, q)| Stmt::Prescription(p, q)),
        ident().prop_map(Stmt::Proc),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Stmt::seq(a, b)),
            (inner.clone(), (1u32..8).prop_map(|k| Expr::Number(k as f64 / 8.0)), inner.clone())
                .prop_map(|(a, p, b)| Stmt::PChoice(Box::new(a), p, Box::new(b))),
            (expr(), inner.clone(), inner.clone())
                .prop_map(|(g, a, b)| Stmt::If(g, Box::new(a), Box::new(b))),
            (expr(), inner.clone()).prop_map(|(g, a)| Stmt::While(g, Box::new(a))),
            (inner.clone(), expr()).prop_map(|(a, g)| Stmt::RepeatUntil(Box::new(a), g)),
            (reg().prop_filter("nonempty", |r| !r.is_empty()), inner.clone())
                .prop_map(|(r, a)| Stmt::Block(r, Box::new(a))),
            (expr(), expr(), inner).prop_map(|(p, q, a)| Stmt::Refined(p, q, Box::new(a))),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_round_trip(e in expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(back, e, "{}", printed);
    }

    #[test]
    fn statements_round_trip(s in stmt()) {
        for printed in [s.to_string(), pretty_block(&s)] {
            let back = parse_stmt(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
            prop_assert_eq!(&back, &s, "{}", printed);
        }
    }

    #[test]
    fn printing_is_idempotent(e in expr()) {
        let once = e.to_string();
        let twice = parse_expr(&once).unwrap().to_string();
        prop_assert_eq!(once, twice);
    }
}
