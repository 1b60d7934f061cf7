mod common;

use common::*;
use foliant::expr::{parse_expr, BinOp, Expr, Func, Node, Scope};
use foliant::linalg::Matrix;
use foliant::projective::{hyperplane_basis, ProjectivePoint};
use foliant::rotation::{rotation_between, skew_outer};
use proptest::prelude::*;

fn unit_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("non-degenerate", |v| dot(v, v) > 1e-4)
        .prop_map(|v| {
            let n = dot(&v, &v).sqrt();
            v.iter().map(|x| x / n).collect()
        })
}

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max_dim).prop_flat_map(|d| (unit_vec(d), unit_vec(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn skew_outer_is_antisymmetric((u, v) in pair(7)) {
        let k = rows(&skew_outer(&u, &v).unwrap());
        let kt = transpose(&k);
        let neg: Vec<Vec<f64>> = kt.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        prop_assert!(max_abs_diff(&k, &neg) == 0.0);
        let swapped = rows(&skew_outer(&v, &u).unwrap());
        prop_assert!(max_abs_diff(&swapped, &kt) <= 1e-15);
    }

    #[test]
    fn fourth_power_of_k_is_a_multiple_of_its_square((u, v) in pair(7)) {
        let k = rows(&skew_outer(&u, &v).unwrap());
        let k2 = matmul(&k, &k);
        let k4 = matmul(&k2, &k2);
        let c = dot(&u, &v);
        let s2 = 1.0 - c * c;
        let want: Vec<Vec<f64>> = k2.iter().map(|r| r.iter().map(|x| -s2 * x).collect()).collect();
        prop_assert!(max_abs_diff(&k4, &want) <= 1e-12);
    }

    #[test]
    fn canonical_representative_is_idempotent_and_sign_blind(v in unit_vec(5), k in 0.1f64..10.0) {
        let p = ProjectivePoint::new(&v).unwrap();
        let again = ProjectivePoint::new(p.rep()).unwrap();
        prop_assert!(dist(again.rep(), p.rep()) <= 1e-15);
        let flipped: Vec<f64> = v.iter().map(|x| -k * x).collect();
        let q = ProjectivePoint::new(&flipped).unwrap();
        prop_assert!(dist(q.rep(), p.rep()) <= 1e-14);
        prop_assert!((dot(p.rep(), p.rep()) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn hyperplane_basis_is_orthonormal_and_normal(v in unit_vec(5)) {
        let b = hyperplane_basis(&ProjectivePoint::new(&v).unwrap());
        let cols: Vec<Vec<f64>> = b.columns().iter().map(|c| c.to_vec()).collect();
        prop_assert_eq!(cols.len(), 4);
        prop_assert!(max_abs_diff(&matmul(&cols, &transpose(&cols)), &identity(4)) <= 1e-10);
        for c in &cols {
            prop_assert!(dot(c, &v).abs() <= 1e-10);
        }
    }

    #[test]
    fn rotation_commutes_with_isometries((u, v) in pair(5), seed in any::<u64>()) {
        prop_assume!(1.0 + dot(&u, &v) > 1e-3);
        let n = u.len();
        let mut rng = rng(seed);
        let w = unit(&mut rng, n);
        let z = unit(&mut rng, n);
        prop_assume!(1.0 + dot(&w, &z) > 1e-3);
        let q = rows(&rotation_between(&w, &z).unwrap());
        let apply = |x: &[f64]| -> Vec<f64> { q.iter().map(|r| dot(r, x)).collect() };
        let r = rows(&rotation_between(&u, &v).unwrap());
        let moved = rows(&rotation_between(&apply(&u), &apply(&v)).unwrap());
        let conj = matmul(&matmul(&q, &r), &transpose(&q));
        prop_assert!(max_abs_diff(&moved, &conj) <= 1e-9);
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..2048)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_expr(&text, 3);
    }

    #[test]
    fn parser_never_panics_on_expression_soup(
        parts in prop::collection::vec(
            prop::sample::select(vec!["z1", "z2", "(", ")", "+", "-", "*", "/", "^", "2", "1/3", "sin", ",", "0.5", "e9", " "]),
            0..200,
        )
    ) {
        let _ = parse_expr(&parts.concat(), 2);
    }
}

#[test]
fn parser_survives_64_kib_inputs() {
    let mut rng = rng(64);
    for _ in 0..4 {
        let bytes: Vec<u8> = (0..64 * 1024)
            .map(|_| rand::Rng::random::<u8>(&mut rng))
            .collect();
        let _ = parse_expr(&String::from_utf8_lossy(&bytes), 2);
    }
    let _ = parse_expr(&"(".repeat(64 * 1024), 2);
    let _ = parse_expr(&"-".repeat(64 * 1024), 2);
    let _ = parse_expr(&"z1+".repeat(16 * 1024), 2);
}

fn node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|k| Node::Num(k as f64 / 8.0)),
        (0usize..2).prop_map(Node::Var),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]);
        let func = prop::sample::select(Func::ALL.to_vec());
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Node::Bin(
                o,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), -4i64..5, 1i64..5).prop_map(|(a, p, q)| Node::PowRational {
                base: Box::new(a),
                p,
                q
            }),
            (inner.clone(), 0usize..2)
                .prop_map(|(a, k)| Node::PowReal(Box::new(a), Box::new(Node::Var(k)))),
            (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

fn same(a: &Result<f64, impl std::fmt::Debug>, b: &Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x.to_bits() == y.to_bits(),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(n in node(), z in prop::collection::vec(-2.0f64..2.0, 2)) {
        let e = Expr::from_node(n, Scope::Ambient { dim: 2 }).unwrap();
        let text = e.to_string();
        let back = parse_expr(&text, 2).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert!(same(&e.eval(&z), &back.eval(&z)), "{}", text);
    }

    #[test]
    fn evaluation_is_deterministic(n in node(), z in prop::collection::vec(-2.0f64..2.0, 2)) {
        let e = Expr::from_node(n, Scope::Ambient { dim: 2 }).unwrap();
        let clone = e.clone();
        prop_assert!(same(&e.eval(&z), &clone.eval(&z)));
        prop_assert!(same(&e.eval(&z), &e.eval(&z)));
    }
}

#[test]
fn norm_inequality_holds_on_random_triples() {
    norm_inequality_suite(1000, 11).unwrap();
}

#[test]
fn inverse_lipschitz_bound_holds() {
    inverse_lipschitz_suite(1000, 12).unwrap();
}

#[test]
fn op_norm_matches_the_two_column_oracle() {
    let mut rng = rng(5);
    for _ in 0..200 {
        let m: Vec<Vec<f64>> = (0..3).map(|_| gaussian(&mut rng, 2)).collect();
        let got = Matrix::from_rows(&m).unwrap().op_norm();
        let want = norm_two_columns(&m);
        assert!(
            (got - want).abs() <= 1e-9 * want.max(1.0),
            "{got} vs {want}"
        );
    }
}
