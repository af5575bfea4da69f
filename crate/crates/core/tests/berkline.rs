mod common;

use std::sync::Arc;

use berktree::berkline::{Ball, BerkPoint};
use berktree::valfield::{parse_scalar, q, qi, Tower, ValQ, Q};
use berktree::Error;
use common::*;
use proptest::prelude::*;

fn point(t: &Tower, c: &str, rv: Q) -> BerkPoint {
    BerkPoint::Ball(ball(t, c, rv))
}

#[test]
fn order_of_nested_and_disjoint_disks() {
    let t = tower(5);
    assert!(ball(&t, "0", qi(1)).leq(&ball(&t, "0", qi(0))).unwrap());
    assert!(ball(&t, "1", qi(1)).leq(&ball(&t, "0", qi(0))).unwrap());
    assert!(!ball(&t, "0", qi(0)).leq(&ball(&t, "0", qi(1))).unwrap());
    assert!(!ball(&t, "1", qi(1)).leq(&ball(&t, "2", qi(1))).unwrap());
    let g = point(&t, "0", qi(0));
    assert!(g.leq(&BerkPoint::Infinity).unwrap());
    assert!(!BerkPoint::Infinity.leq(&g).unwrap());
}

#[test]
fn equality_ignores_the_choice_of_center() {
    let t = tower(5);
    assert_eq!(ball(&t, "0", qi(1)), ball(&t, "5", qi(1)));
    assert_eq!(ball(&t, "1/5", qi(-1)), ball(&t, "0", qi(-1)));
    assert_ne!(ball(&t, "0", qi(1)), ball(&t, "1", qi(1)));
    assert_ne!(ball(&t, "0", qi(1)), ball(&t, "0", qi(2)));
}

#[test]
fn infinite_radius_is_a_classical_point() {
    let t = tower(5);
    let c = parse_scalar(&t, "3/10").unwrap();
    assert!(matches!(BerkPoint::ball(&c, ValQ::Inf).unwrap(), BerkPoint::Finite(_)));
    let fin = BerkPoint::ball(&c, ValQ::Fin(qi(2))).unwrap();
    assert_eq!(fin, point(&t, "3/10", qi(2)));
    assert!(BerkPoint::Finite(c.clone()).leq(&fin).unwrap());
}

#[test]
fn joins() {
    let t = tower(5);
    assert_eq!(ball(&t, "0", qi(2)).join(&ball(&t, "0", qi(1))).unwrap(), ball(&t, "0", qi(1)));
    assert_eq!(ball(&t, "0", qi(1)).join(&ball(&t, "1", qi(1))).unwrap(), ball(&t, "0", qi(0)));
    assert_eq!(ball(&t, "0", qi(3)).join(&ball(&t, "25", qi(3))).unwrap(), ball(&t, "0", qi(2)));
    let g = point(&t, "0", qi(0));
    assert_eq!(g.join_inf(&BerkPoint::Infinity).unwrap(), BerkPoint::Infinity);
}

#[test]
fn meets_relative_to_a_base() {
    let t = tower(5);
    let g = ball(&t, "0", qi(0));
    let a = ball(&t, "0", qi(2));
    let b = ball(&t, "1", qi(2));
    assert_eq!(Ball::meet(&a, &a, &g).unwrap(), a);
    assert_eq!(Ball::meet(&a, &b, &g).unwrap(), g);
    let inf = BerkPoint::Infinity;
    let a3 = point(&t, "0", qi(3));
    assert_eq!(BerkPoint::meet(&BerkPoint::Ball(a.clone()), &a3, &inf).unwrap(), BerkPoint::Ball(a));
}

#[test]
fn hyperbolic_distance() {
    let t = tower(5);
    let g = ball(&t, "0", qi(0));
    assert_eq!(g.rho(&ball(&t, "0", qi(1))).unwrap(), qi(1));
    assert_eq!(g.rho(&g).unwrap(), qi(0));
    assert_eq!(g.rho(&ball(&t, "0", qi(-1))).unwrap(), qi(1));
    assert_eq!(ball(&t, "0", qi(2)).rho(&ball(&t, "1", q(1, 2))).unwrap(), q(5, 2));
    let c = parse_scalar(&t, "0").unwrap();
    assert!(matches!(BerkPoint::Finite(c).rho(&BerkPoint::Ball(g)), Err(Error::TypeIPoint)));
}

#[test]
fn tangent_directions_at_the_gauss_point() {
    let t = tower(5);
    let g = ball(&t, "0", qi(0));
    assert!(g.direction_to(&ball(&t, "0", qi(-3))).unwrap().is_up());
    assert!(g.direction_to(&ball(&t, "7/5", qi(2))).unwrap().is_up());
    let d0 = g.direction_to(&ball(&t, "0", qi(2))).unwrap();
    assert_eq!(d0, g.direction_to(&ball(&t, "5", qi(2))).unwrap());
    assert_ne!(d0, g.direction_to(&ball(&t, "1", qi(2))).unwrap());
    let mut dirs = vec![g.direction_to(&ball(&t, "0", qi(-1))).unwrap()];
    for k in 0..5 {
        dirs.push(g.direction_to(&ball(&t, &k.to_string(), qi(1))).unwrap());
    }
    for (i, a) in dirs.iter().enumerate() {
        for b in &dirs[i + 1..] {
            assert_ne!(a, b);
        }
    }
    let x = ball(&t, "3", q(3, 2));
    assert!(Ball::in_direction(&g.direction_to(&ball(&t, "8", qi(1))).unwrap(), &x).unwrap());
    assert!(!Ball::in_direction(&d0, &x).unwrap());
    assert!(!Ball::in_direction(&d0, &g).unwrap());
}

#[test]
fn directions_at_a_ramified_point() {
    let t = tower(5);
    let xi = ball(&t, "0", q(-1, 2));
    let d = xi.direction_to(&ball(&t, "0", qi(0))).unwrap();
    assert!(!d.is_up());
    assert_eq!(d.probe(q(1, 4)).unwrap(), ball(&t, "0", q(-1, 4)));
    assert!(Ball::in_direction(&d, &ball(&t, "1", qi(3))).unwrap());
    assert!(xi.direction_to(&ball(&t, "1/5", qi(0))).unwrap().is_up());
}

#[test]
fn points_on_paths() {
    let t = tower(5);
    let g = ball(&t, "0", qi(0));
    assert_eq!(g.up(qi(0)), g);
    assert_eq!(ball(&t, "0", qi(1)).up(qi(1)), g);
    assert_eq!(g.up(q(1, 2)), ball(&t, "0", q(-1, 2)));
    let a = ball(&t, "1", qi(2));
    let b = ball(&t, "2", qi(1));
    let total = a.rho(&b).unwrap();
    assert_eq!(total, qi(3));
    for k in 0..=6 {
        let s = Q::new(k, 2);
        let m = a.toward(&b, s).unwrap();
        assert_eq!(a.rho(&m).unwrap(), s);
        assert_eq!(m.rho(&b).unwrap(), total - s);
    }
    assert_eq!(a.toward(&b, qi(10)).unwrap(), b);
}

fn arb_ball(t: Arc<Tower>) -> impl Strategy<Value = Ball> {
    let p = t.prime() as i64;
    (-40i64..40, 0u32..3, -6i64..8, 1i64..3).prop_map(move |(n, k, a, den)| {
        let center = format!("{n}/{}", p.pow(k));
        ball(&t, &center, Q::new(a, den))
    })
}

fn arb_triple() -> impl Strategy<Value = (Ball, Ball, Ball)> {
    prop_oneof![Just(5u64), Just(7)].prop_flat_map(|p| {
        let t = tower(p);
        (arb_ball(t.clone()), arb_ball(t.clone()), arb_ball(t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn join_is_the_least_upper_bound((a, b, c) in arb_triple()) {
        let j = a.join(&b).unwrap();
        prop_assert!(a.leq(&j).unwrap() && b.leq(&j).unwrap());
        prop_assert_eq!(&j, &b.join(&a).unwrap());
        if a.leq(&c).unwrap() && b.leq(&c).unwrap() {
            prop_assert!(j.leq(&c).unwrap());
        }
        if a.leq(&b).unwrap() {
            prop_assert_eq!(j, b);
        }
    }

    #[test]
    fn rho_is_a_metric((a, b, c) in arb_triple()) {
        let ab = a.rho(&b).unwrap();
        prop_assert!(ab >= qi(0));
        prop_assert_eq!(ab == qi(0), a == b);
        prop_assert_eq!(ab, b.rho(&a).unwrap());
        prop_assert!(a.rho(&c).unwrap() <= ab + b.rho(&c).unwrap());
    }

    #[test]
    fn rho_is_additive_along_segments((a, b, c) in arb_triple()) {
        let m = Ball::meet(&a, &c, &b).unwrap();
        prop_assert_eq!(a.rho(&c).unwrap(), a.rho(&m).unwrap() + m.rho(&c).unwrap());
        let j = a.join(&b).unwrap();
        prop_assert_eq!(a.rho(&b).unwrap(), a.rho(&j).unwrap() + j.rho(&b).unwrap());
    }

    #[test]
    fn meet_is_symmetric_and_on_all_three_segments((a, b, c) in arb_triple()) {
        let m = Ball::meet(&a, &b, &c).unwrap();
        prop_assert_eq!(&m, &Ball::meet(&b, &c, &a).unwrap());
        prop_assert_eq!(&m, &Ball::meet(&c, &a, &b).unwrap());
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            prop_assert_eq!(x.rho(y).unwrap(), x.rho(&m).unwrap() + m.rho(y).unwrap());
        }
    }

    #[test]
    fn directions_separate_the_line((a, b, c) in arb_triple()) {
        prop_assume!(b != a && c != a);
        let db = a.direction_to(&b).unwrap();
        let dc = a.direction_to(&c).unwrap();
        prop_assert!(Ball::in_direction(&db, &b).unwrap());
        let same = db == dc;
        let through_a = Ball::meet(&b, &c, &a).unwrap() == a;
        prop_assert_eq!(same, !through_a);
        prop_assert!(Ball::in_direction(&db, &db.probe(q(1, 4)).unwrap()).unwrap());
    }
}
