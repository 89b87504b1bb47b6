use proptest::prelude::*;

use super::*;
use crate::csp::{brute_force_opt, cycle, instance_polynomial, random_3sat, random_graph, single_edge, triangle, Instance};
use crate::rational::{int, rat};

#[test]
fn one_variable_program() {
    let sa = build_sa_lp(1, 1, &MultilinearPoly::zero(1)).unwrap();
    assert_eq!(sa.vars, vec![1]);
    let mut rows: Vec<(Vec<(usize, Rational)>, Rational)> =
        sa.lp.constraints().iter().map(|c| (c.coeffs.clone(), c.rhs.clone())).collect();
    rows.sort();
    // 1 - X_1 ≥ 0 and 1 + X_1 ≥ 0
    assert_eq!(rows, vec![(vec![(0, int(-1))], int(-1)), (vec![(0, int(1))], int(-1))]);
    assert!(sa.lp.constraints().iter().all(|c| c.relation == Relation::Ge));
}

#[test]
fn single_edge_level_two() {
    let s = sa_value(&single_edge(), 2).unwrap();
    assert_eq!(s.value, int(1));
    assert_eq!(s.pe.moment(0b11), int(-1));
    assert!(check_lef(&s.pe).passed);
}

#[test]
fn triangle_level_two_is_one() {
    // X_ij = -1 and X_i = 0 is a valid local distribution on every pair
    let s = sa_value(&triangle(), 2).unwrap();
    assert_eq!(s.value, int(1));
    let witness = PseudoExpectation::new(
        3,
        2,
        BTreeMap::from([(0, int(1)), (0b011, int(-1)), (0b101, int(-1)), (0b110, int(-1))]),
    )
    .unwrap();
    assert!(check_lef(&witness).passed);
    assert_eq!(pe_apply(&witness, &instance_polynomial(&triangle())), int(1));
    assert_eq!(pe_apply(&s.pe, &instance_polynomial(&triangle())), s.value);
    assert!(check_lef(&s.pe).passed);
}

#[test]
fn c5_level_two_bracket() {
    let s = sa_value(&cycle(5).unwrap(), 2).unwrap();
    assert!(s.value >= rat(4, 5) && s.value <= int(1));
    assert!(check_lef(&s.pe).passed);
}

#[test]
fn arity_above_rounds() {
    let f = random_3sat(4, 3, 1).unwrap();
    assert!(matches!(sa_value(&f, 2), Err(Error::Hypothesis(_))));
    assert!(matches!(
        build_sa_lp(3, 1, &instance_polynomial(&triangle())),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn full_level_is_exact() {
    for edges in 1u32..64 {
        let pairs = edge_pairs(4);
        let chosen: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(e, _)| edges >> e & 1 == 1).map(|(_, p)| *p).collect();
        let g = Instance::max_cut(4, &chosen).unwrap();
        assert_eq!(sa_value(&g, 4).unwrap().value, brute_force_opt(&g).unwrap().value, "edges {chosen:?}");
    }
}

#[test]
fn apply_examples() {
    let pe = sa_value(&triangle(), 2).unwrap().pe;
    assert_eq!(pe_apply(&pe, &MultilinearPoly::constant(3, int(1))), int(1));
    assert_eq!(pe_apply(&pe, &MultilinearPoly::character(3, 0b111)), int(0));
}

#[test]
fn lef_examples() {
    assert!(check_lef(&PseudoExpectation::uniform(4, 2)).passed);
    let point = PseudoExpectation::point(4, 2, 0);
    assert!(point.moments().values().all(|v| *v == int(1)));
    let r = check_lef(&point);
    assert!(r.passed, "{r:?}");
    assert_eq!(r.sup_norm, int(11));

    let bad = PseudoExpectation::new(3, 2, BTreeMap::from([(0, int(1)), (1, int(2))])).unwrap();
    let r = check_lef(&bad);
    assert!(!r.passed);
    assert!(!r.moments_bounded);
    assert!(r.first_violation.unwrap().contains("exceeds 1"));
}

#[test]
fn pe_json_round_trip() {
    let pe = sa_value(&cycle(4).unwrap(), 2).unwrap().pe;
    let text = pe.to_json();
    assert!(text.contains("\"0\":\"1\""));
    assert_eq!(PseudoExpectation::from_json(&text).unwrap(), pe);
    assert!(PseudoExpectation::from_json(r#"{"n":2,"d":1,"moments":{"1":"0"}}"#).is_err());
    assert!(PseudoExpectation::from_json(r#"{"n":2,"d":1,"moments":{"0":"1","3":"0"}}"#).is_err());
}

#[test]
fn planting_examples() {
    let s = sa_value(&triangle(), 2).unwrap();
    assert_eq!(pe_plant(&s.pe, &[0, 1, 2], 3).unwrap(), s.pe);

    let coords = [1, 3, 4];
    let planted = pe_plant(&s.pe, &coords, 6).unwrap();
    let inst = crate::csp::plant(&triangle(), &coords, 6).unwrap();
    assert_eq!(pe_apply(&planted, &instance_polynomial(&inst)), s.value);
    assert_eq!(pe_apply(&planted, &MultilinearPoly::character(6, 1)), int(0));
    assert!(check_lef(&planted).passed);
    assert!(pe_plant(&s.pe, &[0, 1], 6).is_err());
}

#[test]
fn edge_indexing() {
    let pairs = edge_pairs(5);
    for (e, &(i, j)) in pairs.iter().enumerate() {
        assert_eq!(edge_index(5, i, j), e);
        assert_eq!(edge_index(5, j, i), e);
    }
}

#[test]
fn edge_level_zero() {
    let tri = edge_sa_value(&triangle(), 0).unwrap();
    assert_eq!(tri.value, rat(2, 3));
    let one = Instance::max_cut(3, &[(0, 1)]).unwrap();
    assert_eq!(edge_sa_value(&one, 0).unwrap().value, int(1));
    assert!(edge_feasibility(&tri.functional).feasible);
}

#[test]
fn edge_level_one_c5() {
    let s = edge_sa_value(&cycle(5).unwrap(), 1).unwrap();
    assert!(s.value >= rat(4, 5));
    assert!(edge_feasibility(&s.functional).feasible);
}

#[test]
fn edge_caps() {
    let g = cycle(7).unwrap();
    assert!(matches!(edge_sa_value(&g, 0), Err(Error::SizeCap { .. })));
    assert!(matches!(edge_sa_value(&triangle(), 3), Err(Error::SizeCap { .. })));
}

#[test]
fn edge_json_round_trip() {
    let ef = EdgeFunctional::cut_point(4, 1, 0b0101);
    let text = ef.to_json();
    assert!(text.contains("\"1-2,1-4\":\"1\""), "{text}");
    assert_eq!(EdgeFunctional::from_json(&text).unwrap(), ef);
}

#[test]
fn cut_points_are_feasible() {
    for x in 0..32 {
        assert!(edge_feasibility(&EdgeFunctional::cut_point(5, 1, x)).feasible);
    }
}

#[test]
fn vertex_to_edge_examples() {
    let edges = [(0, 1), (1, 2), (0, 2)];
    // x = (+,-,+)
    let point = PseudoExpectation::point(3, 3, 0b010);
    let (ef, rep) = vertex_to_edge(&point, 6, &edges).unwrap();
    assert_eq!(ef, EdgeFunctional::cut_point(3, 1, 0b010));
    assert!(rep.edge_check.feasible && rep.objective_preserved);

    let (ef, _) = vertex_to_edge(&PseudoExpectation::uniform(4, 4), 6, &edges).unwrap();
    for e in 0..6 {
        assert_eq!(ef.moment(1 << e), rat(1, 2));
    }

    assert!(matches!(vertex_to_edge(&point, 5, &edges), Err(Error::Parameter(_))));
    assert!(matches!(vertex_to_edge(&point, 4, &edges), Err(Error::Parameter(_))));
    assert!(matches!(
        vertex_to_edge(&PseudoExpectation::uniform(7, 2), 6, &edges),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn edge_to_vertex_examples() {
    let edges = [(0, 1), (1, 2), (2, 3), (0, 3)];
    // bipartition {1,3} | {2,4}, anchored at vertex 1 = +1
    let ef = EdgeFunctional::cut_point(4, 2, 0b1010);
    let (pe, rep) = edge_to_vertex(&ef, &edges).unwrap();
    assert_eq!(pe, PseudoExpectation::point(4, 2, 0b1010));
    assert!(rep.vertex_check.passed && rep.objective_preserved);
    assert_eq!(rep.anchor_identities, Some(true));

    // flipping every sign gives the same cut, so the round trip is anchored
    let flipped = PseudoExpectation::point(4, 4, 0b0101);
    let (ef, _) = vertex_to_edge(&flipped, 6, &edges).unwrap();
    let (back, _) = edge_to_vertex(&ef, &edges).unwrap();
    assert_eq!(back, PseudoExpectation::point(4, 1, 0b1010));
}

#[test]
fn translations_on_c5() {
    let c5 = cycle(5).unwrap();
    let edges = c5.cut_edges().unwrap();
    let s = sa_value(&c5, 6).unwrap();
    let (ef, rep) = vertex_to_edge(&s.pe, 6, &edges).unwrap();
    assert!(rep.edge_check.feasible, "{rep:?}");
    assert!(rep.objective_preserved);
    assert_eq!(ef.cut_objective(&edges), s.value);

    let e = edge_sa_value(&c5, 1).unwrap();
    let (_, rep) = edge_to_vertex(&e.functional, &edges).unwrap();
    assert!(rep.vertex_check.passed);
    assert_eq!(rep.anchor_identities, Some(true));
}

fn arb_small_instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), any::<bool>(), 4usize..7).prop_map(|(seed, sat, n)| {
        if sat {
            random_3sat(n, 4, seed).unwrap()
        } else {
            random_graph(n, &rat(1, 2), seed).unwrap_or_else(|_| triangle())
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sound_and_monotone(inst in arb_small_instance()) {
        let opt = brute_force_opt(&inst).unwrap().value;
        let mut prev: Option<Rational> = None;
        for d in inst.max_arity()..=inst.n().min(4) {
            let s = sa_value(&inst, d).unwrap();
            prop_assert!(s.value >= opt);
            prop_assert!(check_lef(&s.pe).passed);
            if let Some(p) = &prev {
                prop_assert!(*p >= s.value);
            }
            prev = Some(s.value);
        }
    }

    #[test]
    fn indicators_nonnegative_under_feasible(inst in arb_small_instance(), s in any::<u8>(), a in any::<u8>()) {
        let d = inst.max_arity().max(2);
        let pe = sa_value(&inst, d).unwrap().pe;
        let n = inst.n();
        let s = (s as u64) & ((1 << n) - 1);
        if poly::popcount(s) <= d {
            let a = (a as u64) & s;
            // 2^{-|S|} Π_{i∈S} (1 + σ_i x_i), σ_i = -1 on a
            let mut ind = MultilinearPoly::constant(n, int(1));
            for i in poly::vars_of(s) {
                let sign = if a >> i & 1 == 1 { int(-1) } else { int(1) };
                ind = ind.times(&MultilinearPoly::from_terms(n, [(0, rat(1, 2)), (1 << i, sign * rat(1, 2))]));
            }
            prop_assert!(pe_apply(&pe, &ind) >= int(0));
        }
    }
}
