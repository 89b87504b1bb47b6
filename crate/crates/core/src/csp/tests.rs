use proptest::prelude::*;

use super::*;
use crate::rational::{int, rat};

#[test]
fn evaluate_examples() {
    let tri = triangle();
    assert_eq!(tri.evaluate(&[1, 1, 1]).unwrap(), int(0));
    assert_eq!(single_edge().evaluate(&[1, -1]).unwrap(), int(1));
    assert_eq!(tri.evaluate(&[1, 1, -1]).unwrap(), rat(2, 3));
    assert!(matches!(tri.evaluate(&[1, 1]), Err(Error::MalformedInput(_))));
    assert!(tri.evaluate(&[1, 0, 1]).is_err());
}

#[test]
fn brute_force_examples() {
    assert_eq!(brute_force_opt(&single_edge()).unwrap().value, int(1));
    let tri = brute_force_opt(&triangle()).unwrap();
    assert_eq!(tri.value, rat(2, 3));
    // smallest maximising index is x1 = -1 alone
    assert_eq!(tri.witness, 1);
    assert_eq!(format_assignment(3, tri.witness), "-++");
    assert_eq!(brute_force_opt(&cycle(5).unwrap()).unwrap().value, rat(4, 5));
}

#[test]
fn brute_force_cap() {
    let big = Instance::max_cut(30, &[(0, 29)]).unwrap();
    assert!(matches!(brute_force_opt(&big), Err(Error::SizeCap { .. })));
}

#[test]
fn polynomial_examples() {
    let e = instance_polynomial(&single_edge());
    assert_eq!(e, MultilinearPoly::from_terms(2, [(0, rat(1, 2)), (0b11, rat(-1, 2))]));

    let t = Instance::new(2, vec![Predicate::constant_true(2)], vec![Constraint { predicate: 0, vars: vec![0, 1] }])
        .unwrap();
    assert_eq!(instance_polynomial(&t), MultilinearPoly::constant(2, int(1)));

    let tri = instance_polynomial(&triangle());
    for m in [0b011, 0b101, 0b110] {
        assert_eq!(tri.coeff(m), rat(-1, 6));
    }
    assert_eq!(tri.coeff(0), rat(1, 2));
    assert_eq!(tri.num_terms(), 4);
}

#[test]
fn planting_examples() {
    let tri = triangle();
    let same = plant(&tri, &[0, 1, 2], 3).unwrap();
    assert_eq!(same, tri);

    let e = plant(&single_edge(), &[2, 6], 8).unwrap();
    assert_eq!(e.cut_edges().unwrap(), vec![(2, 6)]);
    assert_eq!(e.n(), 8);

    let p = plant(&tri, &[1, 3, 4], 6).unwrap();
    assert_eq!(brute_force_opt(&p).unwrap().value, rat(2, 3));

    assert!(plant(&tri, &[0, 1], 6).is_err());
    assert!(plant(&tri, &[0, 1, 1], 6).is_err());
    assert!(plant(&tri, &[0, 1, 6], 6).is_err());
}

#[test]
fn dummy_extension_examples() {
    let e = dummy_extend(&single_edge());
    assert_eq!(e.n(), 4);
    assert_eq!(brute_force_opt(&e).unwrap().value, int(1));

    let tri = triangle();
    let ext = dummy_extend(&tri);
    assert_eq!(ext.n(), 6);
    assert_eq!(brute_force_opt(&ext).unwrap().value, rat(2, 3));
    for x in 0..64u64 {
        assert_eq!(ext.value_at(x), tri.value_at(x & 0b111));
    }
}

#[test]
fn generator_examples() {
    assert_eq!(cycle(3).unwrap(), triangle());
    assert_eq!(parse_edge_list("3 3\n1 2\n2 3\n1 3").unwrap(), triangle());
    let a = random_graph(6, &rat(1, 2), 1).unwrap();
    let b = random_graph(6, &rat(1, 2), 1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, random_graph(6, &rat(1, 2), 2).unwrap());
    assert_eq!(complete(4).unwrap().m(), 6);
    assert_eq!(random_graph(5, &int(1), 3).unwrap(), complete(5).unwrap());
    assert!(random_graph(5, &int(0), 3).is_err());
    assert!(random_graph(5, &rat(3, 2), 3).is_err());
    assert!(cycle(2).is_err());
}

#[test]
fn random_3sat_shape() {
    let a = random_3sat(4, 10, 7).unwrap();
    assert_eq!(a, random_3sat(4, 10, 7).unwrap());
    assert_eq!(a.m(), 10);
    assert_eq!(a.predicates().len(), 8);
    for c in a.constraints() {
        assert_eq!(c.vars.len(), 3);
    }
}

#[test]
fn or3_semantics() {
    // clause x1 ∨ ¬x2 ∨ x3, true at -1: false only at x1 = +1, x2 = -1, x3 = +1
    let p = Predicate::or3(0b010);
    for i in 0..8 {
        assert_eq!(p.holds(i), i != 0b010);
    }
    let cnf = "c sample\np cnf 3 1\n1 -2 3 0\n";
    let inst = parse_dimacs_cnf(cnf).unwrap();
    assert_eq!(inst.evaluate(&[1, -1, 1]).unwrap(), int(0));
    assert_eq!(inst.evaluate(&[-1, -1, 1]).unwrap(), int(1));
    assert_eq!(write_dimacs_cnf(&inst).unwrap(), "p cnf 3 1\n1 -2 3 0\n");
}

#[test]
fn edge_list_errors() {
    let err = |t: &str| match parse_edge_list(t) {
        Err(Error::Parse { line, column, .. }) => (line, column),
        other => panic!("expected parse error, got {other:?}"),
    };
    assert_eq!(err("3 2\n1 2\n2 2"), (3, 3));
    assert_eq!(err("3 2\n1 2\n2 1"), (3, 1));
    assert_eq!(err("3 2\n1 2\n1 x"), (3, 3));
    assert_eq!(err("3 2\n1 4\n"), (2, 3));
    assert_eq!(err("3 2\n1 2\n"), (3, 1));
    assert_eq!(err("3 1\n1 2\n2 3"), (3, 1));
    assert_eq!(err("3\n"), (1, 1));
}

#[test]
fn dimacs_errors() {
    let err = |t: &str| match parse_dimacs_cnf(t) {
        Err(Error::Parse { line, column, .. }) => (line, column),
        other => panic!("expected parse error, got {other:?}"),
    };
    assert_eq!(err("p cnf 3 1\n1 2 0\n"), (2, 5));
    assert_eq!(err("p cnf 3 1\n1 -1 2 0\n"), (2, 3));
    assert_eq!(err("p cnf 3 1\n1 2 4 0\n"), (2, 5));
    assert_eq!(err("1 2 3 0\n"), (1, 1));
    assert_eq!(err("p cnf 3 2\n1 2 3 0\n"), (2, 7));
    assert_eq!(err("p cnf 3 1\n1 2 3\n"), (2, 5));
}

#[test]
fn round_trips() {
    let g = random_graph(7, &rat(1, 2), 4).unwrap();
    assert_eq!(parse_edge_list(&write_edge_list(&g).unwrap()).unwrap(), g);
    assert_eq!(parse_instance(&write_edge_list(&g).unwrap()).unwrap(), g);
    let f = random_3sat(6, 9, 4).unwrap();
    assert_eq!(parse_dimacs_cnf(&write_dimacs_cnf(&f).unwrap()).unwrap(), f);
    assert_eq!(parse_instance(&write_dimacs_cnf(&f).unwrap()).unwrap(), f);
    assert_eq!(Instance::from_json(&f.to_json()).unwrap(), f);
    assert_eq!(parse_instance(&g.to_json()).unwrap(), g);
    assert!(write_dimacs_cnf(&g).is_err());
    assert!(write_edge_list(&f).is_err());
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (3..=max_n, 1usize..8, any::<u64>(), any::<bool>()).prop_map(|(n, m, seed, sat)| {
        if sat {
            random_3sat(n, m, seed).unwrap()
        } else {
            random_graph(n, &rat(1, 2), seed).unwrap_or_else(|_| triangle())
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linearization_exact(inst in arb_instance(12)) {
        let p = instance_polynomial(&inst);
        prop_assert!(p.degree() <= inst.max_arity());
        let d = inst.max_arity();
        for x in 0..1u64 << inst.n() {
            let y = assignment_point(inst.n(), x, d);
            prop_assert_eq!(pair(&p, &y), inst.value_at(x));
        }
    }

    #[test]
    fn values_in_range_and_witness(inst in arb_instance(8)) {
        let opt = brute_force_opt(&inst).unwrap();
        prop_assert_eq!(inst.value_at(opt.witness), opt.value.clone());
        for x in 0..1u64 << inst.n() {
            let v = inst.value_at(x);
            prop_assert!(v >= int(0) && v <= opt.value);
            if x < opt.witness {
                prop_assert!(v < opt.value);
            }
        }
    }

    #[test]
    fn cut_symmetry(seed in any::<u64>(), n in 3usize..9) {
        if let Ok(g) = random_graph(n, &rat(1, 2), seed) {
            let all = (1u64 << n) - 1;
            for x in 0..1u64 << n {
                prop_assert_eq!(g.value_at(x), g.value_at(x ^ all));
            }
        }
    }

    #[test]
    fn planting_preserves_opt(inst in arb_instance(6), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let n = inst.n() + 3;
        let mut coords: Vec<usize> = (0..n).collect();
        coords.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let s = &coords[..inst.n()];
        let p = plant(&inst, s, n).unwrap();
        prop_assert_eq!(brute_force_opt(&p).unwrap().value, brute_force_opt(&inst).unwrap().value);
        for x in 0..1u64 << n {
            let local = s.iter().enumerate().fold(0u64, |a, (k, &v)| a | ((x >> v & 1) << k));
            prop_assert_eq!(p.value_at(x), inst.value_at(local));
        }
        let e = dummy_extend(&inst);
        prop_assert_eq!(brute_force_opt(&e).unwrap().value, brute_force_opt(&inst).unwrap().value);
    }
}
