use std::sync::Arc;

use berktree::berkline::Ball;
use berktree::polydyn::Poly;
use berktree::valfield::{parse_scalar, q, qi, Scalar, Stage, Tower, Q};
use proptest::prelude::*;

fn tower(p: u64) -> Arc<Tower> {
    Tower::new(p, None).unwrap()
}

fn ball(t: &Tower, c: &str, rv: Q) -> Ball {
    Ball::new(&parse_scalar(t, c).unwrap(), rv).unwrap()
}

/// `(d-1) p z^d - d z^(d-1)`.
fn faber_family(t: &Arc<Tower>, d: usize) -> Poly {
    let p = t.prime();
    let mut c = vec!["0".to_string(); d + 1];
    c[d] = format!("{}", (d as u64 - 1) * p);
    c[d - 1] = format!("-{d}");
    Poly::parse(t, &c.join(",")).unwrap()
}

/// `z^4/(4p^2) - (p+1) z^3/(3p^3) + z^2/(2p^3)`, critical at 0, 1 and 1/p.
fn quartic_example(t: &Arc<Tower>) -> Poly {
    let p = t.prime();
    let s = format!("1/{}*z^4 - {}/{}*z^3 + 1/{}*z^2", 4 * p * p, p + 1, 3 * p * p * p, 2 * p * p * p);
    Poly::parse(t, &s).unwrap()
}

#[test]
fn parse_expression_and_list_agree() {
    let t = tower(5);
    let a = Poly::parse(&t, "10z^3 - 3z^2").unwrap();
    let b = Poly::parse(&t, "[0, 0, -3, 10]").unwrap();
    assert_eq!(a.degree(), 3);
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x - y).is_approx_zero());
    }
    assert!(Poly::parse(&t, "1/0*z^2").is_err());
    assert!(Poly::parse(&t, "z").is_err());
}

#[test]
fn monomial_images_and_degrees() {
    let t = tower(5);
    let p = Poly::parse(&t, "z^3").unwrap();
    let b = ball(&t, "0", q(1, 2));
    let (img, deg) = p.image_ball(&b).unwrap();
    assert_eq!(img, ball(&t, "0", q(3, 2)));
    assert_eq!(deg, 3);
    let g = ball(&t, "0", qi(0));
    let fib = p.preimages(&g).unwrap();
    assert_eq!(fib.len(), 1);
    assert_eq!(fib[0].point, g);
    assert_eq!(fib[0].local_degree, 3);
    let bp = p.base_point().unwrap();
    assert!(bp.simple);
    assert_eq!(bp.ball, g);
    let crit = p.critical_points().unwrap();
    assert_eq!(crit.len(), 1);
    assert!(crit[0].0.is_approx_zero());
}

#[test]
fn faber_cubic_images_and_fibers() {
    let t = tower(5);
    let p = faber_family(&t, 3);
    let xi_p = ball(&t, "0", q(-1, 2));
    let xi_b = ball(&t, "0", qi(-1));
    let (img, deg) = p.image_ball(&xi_p).unwrap();
    assert_eq!(img, xi_b);
    assert_eq!(deg, 2);
    let g = ball(&t, "0", qi(0));
    assert_eq!(p.image_ball(&g).unwrap().0, g);
    let bp = p.base_point().unwrap();
    assert!(!bp.simple);
    assert_eq!(bp.ball, xi_b);
    let fib = p.preimages(&xi_b).unwrap();
    assert_eq!(fib.len(), 2);
    let e = fib.iter().find(|e| e.point == xi_p).expect("xi_P in fiber");
    assert_eq!(e.local_degree, 2);
    let other = fib.iter().find(|e| e.point != xi_p).unwrap();
    assert_eq!(other.local_degree, 1);
    assert!(other.point.lt(&xi_b).unwrap());
    assert!(other.point.contains_scalar(&parse_scalar(&t, "3/10").unwrap()).unwrap());
    let f2 = p.iterate_fiber(2, &xi_b).unwrap();
    assert_eq!(f2.iter().map(|e| e.local_degree).sum::<u64>(), 9);
}

#[test]
fn faber_cubic_multiplicities() {
    let t = tower(5);
    let p = faber_family(&t, 3);
    let xi_p = ball(&t, "0", q(-1, 2));
    let xi_b = ball(&t, "0", qi(-1));
    let zero = ball(&t, "0", qi(5));
    let down = xi_p.direction_to(&zero).unwrap();
    assert_eq!(p.directional_multiplicity(&down).unwrap(), 2);
    let up = berktree::berkline::Direction::up(&xi_b);
    assert_eq!(p.directional_multiplicity(&up).unwrap(), 3);
    assert_eq!(p.surplus(&up).unwrap(), 0);
    assert_eq!(p.surplus(&down).unwrap(), 0);
    let up_p = berktree::berkline::Direction::up(&xi_p);
    assert_eq!(p.surplus(&up_p).unwrap(), 1);
}

#[test]
fn faber_critical_points() {
    let t = tower(5);
    let p = faber_family(&t, 3);
    let crit = p.critical_points().unwrap();
    let vals: Vec<String> = crit.iter().map(|(c, _)| c.to_string()).collect();
    assert!(vals.contains(&"0".to_string()));
    assert!(vals.contains(&"1/5".to_string()));
}

#[test]
fn quartic_example_local_degree_table() {
    for pr in [5u64, 7] {
        let t = tower(pr);
        let p = quartic_example(&t);
        let bp = p.base_point().unwrap();
        assert!(!bp.simple);
        assert_eq!(bp.ball, ball(&t, "0", qi(-1)));
        let inv_p = format!("1/{pr}");
        let cases: Vec<(Ball, u64)> = vec![
            (ball(&t, "0", qi(-2)), 4),
            (ball(&t, "0", qi(-1)), 4),
            (ball(&t, "0", q(-1, 2)), 3),
            (ball(&t, "0", qi(0)), 3),
            (ball(&t, "0", q(1, 2)), 2),
            (ball(&t, "1", q(1, 2)), 2),
            (ball(&t, &inv_p, q(-1, 2)), 2),
            (ball(&t, &inv_p, qi(3)), 2),
            (ball(&t, "2", q(1, 2)), 1),
        ];
        for (b, want) in cases {
            assert_eq!(p.local_degree(&b).unwrap(), want, "p={pr} at {b}");
        }
        assert_eq!(p.preimages(&bp.ball).unwrap().len(), 3);
    }
}

#[test]
fn iterate_poly_matches_image_iteration() {
    let t = tower(5);
    let p = faber_family(&t, 3);
    let p2 = p.iterate_poly(2, 256).unwrap();
    assert_eq!(p2.degree(), 9);
    let st = Stage::new(t.base(), 1);
    let one = Scalar::one(&st);
    let direct = p.eval(&p.eval(&one));
    assert!((&p2.eval(&one) - &direct).is_approx_zero());
    for rv in [q(-3, 2), qi(-1), q(-1, 3), qi(0), qi(2)] {
        for c in ["0", "1", "3/10", "7"] {
            let b = ball(&t, c, rv);
            assert_eq!(p2.image_ball(&b).unwrap(), p.image_iter(&b, 2).unwrap());
        }
    }
    assert!(p.iterate_poly(6, 256).is_err());
    let sq = Poly::parse(&t, "z^2").unwrap().iterate_poly(2, 256).unwrap();
    assert_eq!(sq.degree(), 4);
}

#[test]
fn directional_multiplicity_matches_probe() {
    let t = tower(7);
    let p = quartic_example(&t);
    for c in ["0", "1", "1/7", "3"] {
        for rv in [qi(-1), q(-1, 2), qi(0), q(1, 2)] {
            let b = ball(&t, c, rv);
            let target = ball(&t, c, rv + qi(4));
            let dir = b.direction_to(&target).unwrap();
            let m = p.directional_multiplicity(&dir).unwrap();
            let probe = p.local_degree(&b.toward(&target, q(1, 64)).unwrap()).unwrap();
            assert_eq!(m, probe, "at {b} toward {c}");
        }
    }
}

fn random_cubic() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..40, 4).prop_filter("degree 3", |v| v[3] != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fiber_identity_and_round_trip(coeffs in random_cubic(), p in prop::sample::select(vec![5u64, 7]),
                                     c in -30i64..30, num in -6i64..6, den in 1i64..3) {
        let t = tower(p);
        let list: Vec<String> = coeffs.iter().map(|x| x.to_string()).collect();
        let poly = Poly::parse(&t, &list.join(",")).unwrap();
        let st = Stage::new(t.base(), 1);
        let b = Ball::new(&Scalar::from_int(&st, c), q(num, den)).unwrap();
        match poly.preimages(&b) {
            Ok(fib) => {
                let total: u64 = fib.iter().map(|e| e.local_degree).sum();
                prop_assert_eq!(total, 3);
            }
            Err(e) => prop_assert!(e.is_unsupported() || matches!(e, berktree::Error::PrecisionExhausted(_))),
        }
        let (img, _) = poly.image_ball(&b).unwrap();
        if let Ok(fib) = poly.preimages(&img) {
            prop_assert!(fib.iter().any(|e| e.point == b));
        }
    }

    #[test]
    fn image_scales_distance_by_multiplicity(c in -20i64..20, a in -8i64..8, step in 1i64..4) {
        let t = tower(5);
        let poly = faber_family(&t, 3);
        let st = Stage::new(t.base(), 1);
        let x = Ball::new(&Scalar::from_int(&st, c), q(a, 4)).unwrap();
        let y = x.up(q(step, 16));
        let (px, _) = poly.image_ball(&x).unwrap();
        let (py, _) = poly.image_ball(&y).unwrap();
        prop_assert!(px.leq(&py).unwrap());
        let m = poly.directional_multiplicity(&berktree::berkline::Direction::up(&x)).unwrap();
        let m_y = poly.local_degree(&y).unwrap();
        if m == m_y {
            prop_assert_eq!(px.rho(&py).unwrap(), x.rho(&y).unwrap() * Q::from_integer(m as i64));
        }
    }
}
