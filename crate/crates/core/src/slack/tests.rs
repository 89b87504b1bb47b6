use proptest::prelude::*;

use super::*;
use crate::csp::{brute_force_opt, cycle, random_graph, single_edge, triangle};
use crate::rational::{int, rat};
use crate::sa::sa_value;

fn one_edge3() -> Instance {
    Instance::max_cut(3, &[(0, 1)]).unwrap()
}

#[test]
fn metric_row_count() {
    let m3 = metric_maxcut(3).unwrap();
    assert_eq!(m3.size(), 10);
    assert_eq!(m3.dim(), 3);
    assert_eq!(metric_maxcut(12).unwrap().size(), 66 * 2 + 220 * 4);
    assert!(metric_maxcut(2).is_err());
}

#[test]
fn metric_values() {
    let m3 = metric_maxcut(3).unwrap();
    assert_eq!(lp_value(&m3, &one_edge3()).unwrap().value, int(1));
    assert_eq!(lp_value(&m3, &triangle()).unwrap().value, rat(2, 3));
    let c5 = cycle(5).unwrap();
    assert_eq!(lp_value(&metric_maxcut(5).unwrap(), &c5).unwrap().value, rat(4, 5));
}

#[test]
fn universal_matches_sa() {
    for (inst, d) in [(triangle(), 2), (cycle(4).unwrap(), 2), (cycle(5).unwrap(), 3)] {
        let rel = universal(inst.n(), d).unwrap();
        assert_eq!(lp_value(&rel, &inst).unwrap().value, sa_value(&inst, d).unwrap().value);
    }
}

#[test]
fn slack_examples() {
    let m3 = metric_maxcut(3).unwrap();
    let sl = slack_functions(&m3).unwrap();
    assert_eq!(sl.len(), 10);
    // row 4 is y_12 ≤ 1
    assert_eq!(sl.polys[3], MultilinearPoly::from_terms(3, [(0, rat(1, 2)), (0b011, rat(1, 2))]));
    let sum = sl.table(9).unwrap();
    assert_eq!(sum.value(0), &int(2));
    assert!(sum.values().iter().all(|v| *v == int(2) || *v == int(0)));
    assert!(slack_functions(&metric_maxcut(4).unwrap()).unwrap().first_negative().is_none());
    assert!(slack_functions(&universal(4, 2).unwrap()).unwrap().first_negative().is_none());
}

#[test]
fn farkas_triangle() {
    let m3 = metric_maxcut(3).unwrap();
    let sl = slack_functions(&m3).unwrap();
    let tri = triangle();
    match farkas_decompose(&rat(2, 3), &tri, &m3).unwrap() {
        FarkasResult::Decomposition { lambda0, lambda } => {
            assert!(verify_decomposition(&rat(2, 3), &tri, &lambda0, &lambda, &sl));
        }
        other => panic!("expected a decomposition, got {other:?}"),
    }
    // hand decomposition: (1/3) times the sum facet
    let mut hand = vec![int(0); 10];
    hand[9] = rat(1, 3);
    assert!(verify_decomposition(&rat(2, 3), &tri, &int(0), &hand, &sl));
    hand[9] = rat(1, 2);
    assert!(!verify_decomposition(&rat(2, 3), &tri, &int(0), &hand, &sl));

    match farkas_decompose(&rat(197, 300), &tri, &m3).unwrap() {
        FarkasResult::Infeasible { certificate } => {
            assert!(verify_certificate(&rat(197, 300), &tri, &certificate, &sl));
        }
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn farkas_trivial_cases() {
    let inst = cycle(4).unwrap();
    let rel = universal(4, 2).unwrap();
    let r = farkas_decompose(&int(1), &inst, &rel).unwrap();
    assert!(r.is_feasible());

    let m3 = metric_maxcut(3).unwrap();
    let e = one_edge3();
    let r = farkas_decompose(&rat(1, 2), &e, &m3).unwrap();
    assert!(!r.is_feasible());
    if let FarkasResult::Infeasible { certificate } = r {
        assert!(verify_certificate(&rat(1, 2), &e, &certificate, &slack_functions(&m3).unwrap()));
    }
}

#[test]
fn lp_characterization_grid() {
    let rel = metric_maxcut(4).unwrap();
    let sl = slack_functions(&rel).unwrap();
    for seed in 0..4 {
        let Ok(g) = random_graph(4, &rat(1, 2), seed) else { continue };
        let v = lp_value(&rel, &g).unwrap().value;
        assert!(v >= brute_force_opt(&g).unwrap().value);
        for delta in [rat(-1, 1000), int(0), rat(1, 1000)] {
            let c = &v + &delta;
            let r = farkas_decompose(&c, &g, &rel).unwrap();
            assert_eq!(r.is_feasible(), c >= v);
            match r {
                FarkasResult::Decomposition { lambda0, lambda } => {
                    assert!(verify_decomposition(&c, &g, &lambda0, &lambda, &sl))
                }
                FarkasResult::Infeasible { certificate } => assert!(verify_certificate(&c, &g, &certificate, &sl)),
            }
        }
    }
}

#[test]
fn custom_relaxation_round_trip() {
    let m3 = metric_maxcut(3).unwrap();
    let back = PolyhedralRelaxation::from_json(&m3.to_json()).unwrap();
    assert_eq!(back.rows(), m3.rows());
    assert_eq!(back.coordinates(), m3.coordinates());
    // embedding solved from the coordinates
    assert_eq!(lp_value(&back, &triangle()).unwrap().value, rat(2, 3));

    let bad = r#"{"n":2,"coordinates":[{"3":"1"}],"inequalities":[{"coeffs":{"0":"1"},"rhs":"0"}]}"#;
    assert!(matches!(PolyhedralRelaxation::from_json(bad), Err(Error::MalformedInput(_))));
    let unbounded = r#"{"n":2,"coordinates":[{"0":"1"},{"3":"1"}],"inequalities":[{"coeffs":{"0":"1"},"rhs":"1"}]}"#;
    let rel = PolyhedralRelaxation::from_json(unbounded).unwrap();
    assert!(matches!(lp_value(&rel, &single_edge()), Err(Error::Unbounded(_))));
    let no_constant = r#"{"n":2,"coordinates":[{"3":"1"}],"inequalities":[]}"#;
    let rel = PolyhedralRelaxation::from_json(no_constant).unwrap();
    assert!(matches!(lp_value(&rel, &single_edge()), Err(Error::MalformedInput(_))));
}

#[test]
fn slack_matrix_examples() {
    let cols: Vec<u64> = (0..8).collect();
    let sm = build_slack_matrix(vec![triangle()], cols.clone(), rat(7, 8), rat(3, 4)).unwrap();
    assert_eq!(sm.entries[0][0], rat(7, 8));
    // x = (+,+,-)
    assert_eq!(sm.entries[0][0b100], rat(5, 24));
    let err = build_slack_matrix(vec![single_edge()], vec![0, 1, 2, 3], rat(7, 8), rat(3, 4)).unwrap_err();
    assert!(matches!(err, Error::Certification { .. }));
    assert!(build_slack_matrix(vec![triangle()], cols, rat(3, 4), rat(3, 4)).is_err());
    assert!(sm.to_csv().starts_with("row,0,1,2,3,4,5,6,7\n1,7/8,"));
}

#[test]
fn protocol_examples() {
    let cols: Vec<u64> = (0..8).collect();
    let sm = build_slack_matrix(vec![triangle()], cols, rat(7, 8), rat(3, 4)).unwrap();
    for t in 1..5 {
        let pm = protocol_matrix(&sm, t).unwrap();
        assert_eq!(pm.entries[0][0], rat(7, 8));
        assert_eq!(pm.entries[0][7], rat(7, 8));
    }
    let pm = protocol_matrix(&sm, 1).unwrap();
    assert_eq!(pm.entries[0][1], rat(7, 24));

    let f = protocol_factorization(&sm, 1).unwrap();
    assert_eq!(f.message_space(), 3);
    assert_eq!(f.u[0], vec![rat(1, 3); 3]);
    for row in &f.v {
        assert!(row.iter().all(|v| *v == int(0) || *v == rat(7, 8)));
    }
    assert_eq!(f.product(), pm.entries);
    assert!(f.manifest_json().contains("\"messageSpace\":3"));
    assert!(f.u_csv().starts_with("row,1-2,1-3,2-3\n"));
}

#[test]
fn protocol_rejects_non_cut_rows() {
    let f = crate::csp::random_3sat(3, 8, 1).unwrap();
    let opt = brute_force_opt(&f).unwrap().value;
    let sm = build_slack_matrix(vec![f], (0..8).collect(), &opt + rat(1, 10), opt).unwrap();
    assert!(protocol_matrix(&sm, 1).is_err());
    let sm = build_slack_matrix(vec![triangle()], (0..8).collect(), rat(7, 8), rat(3, 4)).unwrap();
    assert!(protocol_matrix(&sm, 0).is_err());
}

#[test]
fn four_vertex_family() {
    let rows = low_value_graphs(4, &rat(3, 4)).unwrap();
    // four triangles, twelve triangles with a pendant edge, and K4
    assert_eq!(rows.len(), 17);
}

// oracle: average Bob's output over all ordered edge tuples
fn simulate(g: &Instance, x: u64, c: &Rational, t: usize) -> Rational {
    let edges = g.cut_edges().unwrap();
    let m = edges.len();
    let total = m.pow(t as u32);
    let mut acc = Rational::zero();
    for code in 0..total {
        let mut k = 0;
        let mut rest = code;
        for _ in 0..t {
            let (i, j) = edges[rest % m];
            rest /= m;
            if (x >> i ^ x >> j) & 1 == 1 {
                k += 1;
            }
        }
        let theta = rat(k, t as i64);
        if theta <= *c {
            acc += c - theta;
        }
    }
    acc / int(total as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn protocol_matches_simulation(t in 1usize..4, pick in 0usize..17) {
        let rows = low_value_graphs(4, &rat(3, 4)).unwrap();
        let g = rows[pick].clone();
        let sm = build_slack_matrix(vec![g.clone()], (0..16).collect(), rat(7, 8), rat(3, 4)).unwrap();
        let pm = protocol_matrix(&sm, t).unwrap();
        for x in 0..16u64 {
            prop_assert_eq!(&pm.entries[0][x as usize], &simulate(&g, x, &rat(7, 8), t));
            let diff = &pm.entries[0][x as usize] - &sm.entries[0][x as usize];
            prop_assert_eq!(&diff, &pm.excess[0][x as usize]);
            prop_assert!(diff >= int(0) && diff <= pm.tail[0][x as usize]);
        }
    }
}
