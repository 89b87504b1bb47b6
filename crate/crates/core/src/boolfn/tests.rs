use proptest::prelude::*;

use super::*;
use crate::rational::{int, rat};

fn majority3() -> BoolFn {
    BoolFn::from_fn(3, |x| {
        // x_i = +1 when bit clear
        let plus = 3 - x.count_ones() as i64;
        if plus >= 2 { int(2) } else { int(0) }
    })
    .unwrap()
}

// direct summation oracle: f̂(α) = 2^{-n} Σ_x f(x) χ_α(x)
fn naive_coeff(f: &BoolFn, alpha: Mask) -> Rational {
    let mut acc = Rational::zero();
    for x in 0..1u64 << f.n() {
        acc += f.value(x) * int(poly::character(alpha, x));
    }
    acc / rational::pow2(f.n() as i64)
}

#[test]
fn character_transform() {
    let f = BoolFn::character(3, 0b011).unwrap();
    let c = fourier_transform(&f).unwrap();
    let nz = c.nonzero();
    assert_eq!(nz.len(), 1);
    assert_eq!(nz[&0b011], int(1));
}

#[test]
fn constant_transform() {
    let c = fourier_transform(&BoolFn::constant(4, int(1)).unwrap()).unwrap();
    assert_eq!(c.nonzero().into_iter().collect::<Vec<_>>(), vec![(0, int(1))]);
}

#[test]
fn majority_coefficients() {
    let f = majority3();
    let c = fourier_transform(&f).unwrap();
    assert_eq!(*c.get(0b001), rat(1, 2));
    for alpha in 0..8 {
        assert_eq!(*c.get(alpha), naive_coeff(&f, alpha));
    }
    assert_eq!(*c.get(0b111), rat(-1, 2));
}

#[test]
fn size_cap_rejected() {
    assert!(matches!(BoolFn::new(25, vec![]), Err(Error::SizeCap { .. })));
}

#[test]
fn wrong_table_length() {
    assert!(matches!(BoolFn::new(2, vec![int(1); 3]), Err(Error::MalformedInput(_))));
}

#[test]
fn json_round_trip() {
    let f = majority3();
    let text = f.to_json();
    assert_eq!(text, r#"{"n":3,"values":["2","2","2","0","2","0","0","0"]}"#);
    assert_eq!(BoolFn::from_json(&text).unwrap(), f);
    assert!(BoolFn::from_json(r#"{"n":1,"values":["1/0","1"]}"#).is_err());
    assert!(BoolFn::from_json(r#"{"n":1,"values":["1"]}"#).is_err());
}

#[test]
fn entropy_examples() {
    assert!(Density::uniform(5).entropy_deficit().abs() < 1e-12);
    let maj = Density::from_boolfn(&majority3()).unwrap();
    assert!((maj.entropy_deficit() - 1.0).abs() < 1e-12);
    let point = Density::point_mass(4, 0b1010);
    assert!((entropy_deficit(&point) - 4.0).abs() < 1e-12);
    assert_eq!(point.to_boolfn().unwrap().value(0b1010), &int(16));
}

// oracle: n − H(μ) from the full table
fn naive_deficit(f: &BoolFn) -> f64 {
    let n = f.n() as f64;
    let size = (1u64 << f.n()) as f64;
    let h: f64 = f
        .values()
        .iter()
        .map(|v| rational::to_f64(v) / size)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    n - h
}

#[test]
fn entropy_ignores_unused_coordinates() {
    let q = MultilinearPoly::from_terms(6, [(0, int(1)), (0b100000, rat(1, 3))]);
    let d = Density::from_poly(q).unwrap();
    assert!((d.entropy_deficit() - naive_deficit(&d.to_boolfn().unwrap())).abs() < 1e-12);
}

#[test]
fn conditional_examples() {
    let u = Density::uniform(4);
    assert_eq!(conditional_density(&u, &[1, 3]).unwrap(), Density::uniform(2));

    let dictator = Density::from_poly(MultilinearPoly::from_terms(1, [(0, int(1)), (1, int(1))])).unwrap();
    assert_eq!(conditional_density(&dictator, &[0]).unwrap(), dictator);

    let maj = Density::from_boolfn(&majority3()).unwrap();
    let c = conditional_density(&maj, &[0]).unwrap();
    assert_eq!(*c.poly(), MultilinearPoly::from_terms(1, [(0, int(1)), (1, rat(1, 2))]));
    // oracle: average the table over x2, x3
    let table = majority3();
    for x1 in 0..2u64 {
        let avg: Rational = (0..4u64).map(|r| table.value(x1 | r << 1).clone()).sum::<Rational>() / int(4);
        assert_eq!(c.poly().evaluate(x1), avg);
    }
}

#[test]
fn density_validation() {
    assert!(Density::from_boolfn(&BoolFn::constant(2, int(2)).unwrap()).is_err());
    let neg = MultilinearPoly::from_terms(2, [(0, int(1)), (0b01, int(2))]);
    assert!(Density::from_poly(neg).is_err());
}

#[test]
fn chang_examples() {
    let dictator = Density::from_poly(MultilinearPoly::from_terms(1, [(0, int(1)), (1, int(1))])).unwrap();
    let cert = chang_junta(&dictator, &int(1), 1, &rat(1, 2)).unwrap();
    assert_eq!(cert.junta, vec![0]);
    assert!(cert.success);
    assert!(cert.violations.is_empty());

    let u = Density::uniform(5);
    let cert = chang_junta(&u, &int(0), 3, &rat(1, 100)).unwrap();
    assert!(cert.junta.is_empty());
    assert!(cert.success);

    let maj = Density::from_boolfn(&majority3()).unwrap();
    let cert = chang_junta(&maj, &int(1), 1, &rat(1, 4)).unwrap();
    assert_eq!(cert.heavy.iter().map(|(m, _)| *m).collect::<Vec<_>>(), vec![1, 2, 4]);
    assert_eq!(cert.independent, vec![1, 2, 4]);
    assert_eq!(cert.junta, vec![0, 1, 2]);
    assert!(cert.success);
    assert!(verify_junta(&maj, &cert).is_empty());
}

#[test]
fn chang_parameter_errors() {
    let u = Density::uniform(3);
    assert!(matches!(chang_junta(&u, &int(1), 1, &int(0)), Err(Error::Parameter(_))));
    assert!(matches!(chang_junta(&u, &int(1), 0, &int(1)), Err(Error::Parameter(_))));
    assert!(matches!(chang_junta(&u, &int(1), 4, &int(1)), Err(Error::Parameter(_))));
}

#[test]
fn chang_dependent_characters() {
    // coefficients on {1},{2},{1,2}: the third is the xor of the first two
    let q = MultilinearPoly::from_terms(
        3,
        [(0, int(1)), (0b001, rat(1, 2)), (0b010, rat(1, 4)), (0b011, rat(1, 8))],
    );
    let q = Density::from_poly(q).unwrap();
    let cert = chang_junta(&q, &int(1), 2, &rat(1, 16)).unwrap();
    assert_eq!(cert.independent, vec![0b001, 0b010]);
    assert_eq!(cert.junta, vec![0, 1]);
}

#[test]
fn chang_reports_failure() {
    // t = 0 admits no heavy coefficient
    let maj = Density::from_boolfn(&majority3()).unwrap();
    let cert = chang_junta(&maj, &int(0), 1, &rat(1, 4)).unwrap();
    assert!(!cert.success);
    assert_eq!(cert.violations.len(), 3);
}

#[test]
fn junta_support_examples() {
    assert_eq!(junta_support(&BoolFn::character(3, 0b010).unwrap()), vec![1]);
    assert!(junta_support(&BoolFn::constant(3, int(7)).unwrap()).is_empty());
    assert_eq!(junta_support(&majority3()), vec![0, 1, 2]);
    assert!(is_junta(&BoolFn::character(3, 0b010).unwrap(), &[1]));
    assert!(!is_junta(&majority3(), &[0, 1]));
}

fn arb_boolfn(max_n: usize) -> impl Strategy<Value = BoolFn> {
    (0..=max_n).prop_flat_map(|n| {
        prop::collection::vec((-20i64..20, 1i64..6), 1usize << n)
            .prop_map(move |v| BoolFn::new(n, v.into_iter().map(|(a, b)| rat(a, b)).collect()).unwrap())
    })
}

fn arb_density(max_n: usize) -> impl Strategy<Value = Density> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0i64..5, 1usize << n).prop_filter_map("all zero", move |v| {
            let total: i64 = v.iter().sum();
            if total == 0 {
                return None;
            }
            let size = 1i64 << n;
            let f = BoolFn::new(n, v.iter().map(|a| rat(a * size, total)).collect()).unwrap();
            Some(Density::from_boolfn(&f).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(f in arb_boolfn(10)) {
        let c = fourier_transform(&f).unwrap();
        prop_assert_eq!(c.sum_of_squares(), f.inner(&f).unwrap());
    }

    #[test]
    fn round_trip(f in arb_boolfn(10)) {
        prop_assert_eq!(inverse_transform(&fourier_transform(&f).unwrap()), f);
    }

    #[test]
    fn transform_matches_summation(f in arb_boolfn(5)) {
        let c = fourier_transform(&f).unwrap();
        for alpha in 0..1u64 << f.n() {
            prop_assert_eq!(c.get(alpha), &naive_coeff(&f, alpha));
        }
    }

    #[test]
    fn conditional_is_density(q in arb_density(6), keep in any::<u8>()) {
        let coords: Vec<usize> = (0..q.n()).filter(|i| keep >> i & 1 == 1).collect();
        let c = conditional_density(&q, &coords).unwrap();
        let table = c.to_boolfn().unwrap();
        prop_assert_eq!(table.mean(), int(1));
        prop_assert!(table.values().iter().all(|v| !v.is_negative()));
        // oracle: marginal by summation
        let full = q.to_boolfn().unwrap();
        let rest = q.n() - coords.len();
        for y in 0..1u64 << coords.len() {
            let mut acc = Rational::zero();
            for x in 0..1u64 << q.n() {
                let proj = coords.iter().enumerate().fold(0u64, |a, (k, v)| a | ((x >> v & 1) << k));
                if proj == y {
                    acc += full.value(x);
                }
            }
            prop_assert_eq!(table.value(y), &(acc / rational::pow2(rest as i64)));
        }
    }

    #[test]
    fn entropy_matches_table(q in arb_density(6)) {
        let naive = naive_deficit(&q.to_boolfn().unwrap());
        prop_assert!((q.entropy_deficit() - naive).abs() < 1e-9);
    }

    #[test]
    fn chang_guarantee(q in arb_density(6), d in 1usize..4, g in 1i64..8, t in 0i64..40) {
        let d = d.min(q.n());
        let cert = chang_junta(&q, &rat(t, 4), d, &rat(g, 8)).unwrap();
        prop_assert!(verify_junta(&q, &cert).is_empty());
        if cert.success {
            let bound = rat(2 * t * d as i64, 4) / (rat(g, 8) * rat(g, 8));
            prop_assert!(int(cert.junta.len() as i64) <= bound);
        }
    }

    #[test]
    fn support_matches_coefficients(f in arb_boolfn(6)) {
        let from_poly = poly::vars_of(f.to_poly().support_vars());
        prop_assert_eq!(junta_support(&f), from_poly.clone());
        prop_assert!(is_junta(&f, &from_poly));
    }
}
