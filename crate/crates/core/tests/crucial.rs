mod common;

use berktree::crucial::*;
use berktree::polydyn::Poly;
use berktree::trucco_tree::{DynTree, TreeFamily, INFINITY, TOP};
use berktree::valfield::{q, qi, Q};
use common::*;
use proptest::prelude::*;

fn support_matches_vertices(tree: &DynTree, nu: &TreeMeasure, j: usize) -> bool {
    let z = z_set(tree, j).unwrap();
    let want: Vec<usize> = tree.vertex_set().into_iter().filter(|i| *i != INFINITY && !z.contains(i)).collect();
    nu.support() == want
}

fn check_family(fam: &mut TreeFamily, n_max: usize, j_max: usize) {
    for n in 1..=n_max {
        let tree = fam.tree(n).unwrap();
        for j in 1..=j_max {
            let nu = crucial_curvature(&tree, j).unwrap();
            assert_eq!(nu.total(), qi(1));
            assert_eq!(crucial_curvature_oracle_in(fam, &tree, j).unwrap(), nu, "n={n} j={j}");
            assert!(support_matches_vertices(&tree, &nu, j), "support at n={n} j={j}");
        }
    }
}

#[test]
fn faber_cubic_first_curvature() {
    let t = tower(5);
    let poly = faber_family(&t, 3);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let g1 = fam.tree(1).unwrap();
    let nu = crucial_curvature(&g1, 1).unwrap();
    let xi_p = g1.id_of(&ball(&t, "0", q(-1, 2))).unwrap();
    let other = g1.leaves().iter().map(|x| x.0).find(|&i| i != xi_p).unwrap();
    assert_eq!(nu.mass_at(TOP), q(1, 2));
    assert_eq!(nu.mass_at(xi_p), q(1, 2));
    assert_eq!(nu.mass_at(other), qi(0));
    assert_eq!(z_set(&g1, 1).unwrap(), vec![other]);
    assert_eq!(closed_ball_mass(&g1, &nu, g1.ball(xi_p)).unwrap(), q(1, 2));
    assert_eq!(closed_ball_mass(&g1, &nu, g1.ball(other)).unwrap(), qi(0));
    let bc = barycenter(&g1, &nu).unwrap();
    assert_eq!(bc, BarycenterResult::Segment(ball(&t, "0", q(-1, 2)), ball(&t, "0", qi(-1))));
    let (pos, neg) = total_variation_parts(&nu);
    assert_eq!(neg, TreeMeasure::default());
    assert_eq!(averaged_total_variation(&nu), pos);
    let bc2 = curvature_barycenter(&g1, 2).unwrap();
    assert!(bc2.is_singleton());
}

#[test]
fn quartic_first_curvature_weights() {
    let t = tower(5);
    let poly = quartic_example(&t);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let g1 = fam.tree(1).unwrap();
    let nu = crucial_curvature(&g1, 1).unwrap();
    let xi_g = g1.id_of(&ball(&t, "0", qi(0))).unwrap();
    assert_eq!(nu.mass_at(xi_g), q(1, 3));
    assert_eq!(nu.mass_at(TOP), qi(g1.valency(TOP) as i64 - 2) / qi(3));
    assert_eq!(nu.total(), qi(1));
    let g2 = fam.tree(2).unwrap();
    let nu2 = crucial_curvature(&g2, 1).unwrap();
    let (_, neg) = total_variation_parts(&nu2);
    let leaves: Vec<usize> = g2.leaves().iter().map(|x| x.0).collect();
    assert!(neg.support().iter().all(|i| leaves.contains(i)));
    assert_eq!(averaged_total_variation(&nu2).total(), qi(1));
}

#[test]
fn curvature_equals_laplacian_oracle() {
    let t = tower(5);
    check_family(&mut TreeFamily::new(&quartic_example(&t)).unwrap(), 2, 2);
    check_family(&mut TreeFamily::new(&faber_family(&t, 3)).unwrap(), 3, 2);
    let t7 = tower(7);
    check_family(&mut TreeFamily::new(&faber_family(&t7, 4)).unwrap(), 2, 2);
}

#[test]
fn monomial_curvature_is_a_point_mass() {
    let t = tower(5);
    for d in [2usize, 3] {
        let poly = Poly::parse(&t, &format!("z^{d}")).unwrap();
        let mut fam = TreeFamily::new(&poly).unwrap();
        for n in 1..=3 {
            let tree = fam.tree(n).unwrap();
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                assert_eq!(nu, TreeMeasure::from_atoms([(TOP, qi(1))]));
                assert_eq!(crucial_curvature_oracle_in(&mut fam, &tree, j).unwrap(), nu);
                assert_eq!(barycenter(&tree, &nu).unwrap(), BarycenterResult::Singleton(ball(&t, "0", qi(0))));
                assert!(z_set(&tree, j).unwrap().is_empty());
            }
        }
    }
}

#[test]
fn slope_formula_on_small_trees() {
    let t = tower(5);
    for poly in [quartic_example(&t), faber_family(&t, 3)] {
        let mut fam = TreeFamily::new(&poly).unwrap();
        for n in 1..=2 {
            let tree = fam.tree(n).unwrap();
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                let cf = CrucialFn::at_base(&mut fam, j).unwrap();
                assert!(check_slope_formula(&tree, &nu, &cf).unwrap() > 0);
                let abs = CrucialFn::absolute(&poly, j).unwrap();
                assert!(check_slope_formula(&tree, &nu, &abs).unwrap() > 0);
            }
        }
    }
}

#[test]
fn closed_ball_masses_follow_the_lemma() {
    let t = tower(7);
    for poly in [quartic_example(&t), faber_family(&t, 3)] {
        let mut fam = TreeFamily::new(&poly).unwrap();
        for n in 1..=2 {
            let tree = fam.tree(n).unwrap();
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                for id in 1..tree.len() {
                    let b = tree.ball(id);
                    assert_eq!(
                        closed_ball_mass(&tree, &nu, b).unwrap(),
                        closed_ball_mass_formula(&poly, j, b).unwrap(),
                        "n={n} j={j} at {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn masses_agree_between_consecutive_trees() {
    let t = tower(5);
    let poly = quartic_example(&t);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let g1 = fam.tree(1).unwrap();
    let g2 = fam.tree(2).unwrap();
    let half = q(1, 2);
    for j in 1..=2 {
        let d = iterate_degree(&poly, j).unwrap();
        let nu1 = crucial_curvature(&g1, j).unwrap();
        let nu2 = crucial_curvature(&g2, j).unwrap();
        for id in 1..g1.len() {
            let dirs = tree_directions(&g1, id).unwrap();
            let mut heavy = 0;
            for (_, dir) in &dirs {
                let m = ball_mass(&g1, &nu1, dir).unwrap();
                assert_eq!(m, ball_mass(&g2, &nu2, dir).unwrap(), "at {dir}");
                if !dir.is_up() && m >= half {
                    heavy += 1;
                }
                for (_, other) in &dirs {
                    if other != dir {
                        let rest = qi(1) - ball_mass(&g1, &nu1, other).unwrap();
                        assert!(m <= rest);
                    }
                }
            }
            assert!(heavy <= 1, "two heavy directions at {}", g1.ball(id));
            let b = g1.ball(id);
            if poly.local_degree(b).unwrap() == 1 {
                let bound = qi(d / poly.degree() as i64 - 1) / qi(d - 1);
                assert!(closed_ball_mass(&g1, &nu1, b).unwrap() <= bound, "at {b}");
            }
        }
    }
}

#[test]
fn barycenters_nest_for_the_cubic() {
    let t = tower(5);
    let poly = faber_family(&t, 3);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let mut prev: Option<BarycenterResult> = None;
    for n in 1..=4 {
        let tree = fam.tree(n).unwrap();
        let bc = curvature_barycenter(&tree, 1).unwrap();
        if let Some(p) = &prev {
            assert!(p.subset_of(&bc).unwrap(), "{p} not inside {bc}");
        }
        prev = Some(bc);
        for j in 2..=3 {
            assert!(curvature_barycenter(&tree, j).unwrap().is_singleton());
        }
    }
}

#[test]
fn z_set_bound_on_the_quartic() {
    let t = tower(5);
    let poly = quartic_example(&t);
    let mut fam = TreeFamily::new(&poly).unwrap();
    for n in 2..=4 {
        let tree = fam.tree(n).unwrap();
        assert!(z_set(&tree, 1).unwrap().len() <= 64, "n={n}");
    }
}

#[test]
fn crucial_difference_is_antisymmetric() {
    let t = tower(5);
    let poly = faber_family(&t, 3);
    let a = ball(&t, "0", q(-1, 2));
    let b = ball(&t, "0", qi(0));
    let c = ball(&t, "3/10", q(1, 3));
    for j in 1..=2 {
        let ab = crucial_diff(&poly, j, &a, &b).unwrap();
        let ba = crucial_diff(&poly, j, &b, &a).unwrap();
        assert_eq!(ab, -ba);
        let ac = crucial_diff(&poly, j, &a, &c).unwrap();
        let cb = crucial_diff(&poly, j, &c, &b).unwrap();
        assert_eq!(ac + cb, ab);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn random_curvatures_have_unit_mass(p in prop::sample::select(vec![5u64, 7]), d in 3usize..5,
                                        a in 1i64..7, b in 1i64..7, c in -6i64..7) {
        prop_assume!(unit(p, a) && unit(p, b) && (d as u64) < p);
        let t = tower(p);
        let poly = scaled_poly(&t, d, a, b, c);
        let mut fam = TreeFamily::new(&poly).unwrap();
        for n in 1..=2 {
            let tree = match fam.tree(n) {
                Ok(g) => g,
                Err(e) if e.is_unsupported() || e.is_budget() => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                prop_assert_eq!(nu.total(), qi(1));
                for (_, x) in nu.atoms() {
                    let w = x * Q::from_integer(iterate_degree(&poly, j).unwrap() - 1);
                    prop_assert!(w.is_integer() && w >= qi(-1));
                }
                prop_assert_eq!(&crucial_curvature_oracle_in(&mut fam, &tree, j).unwrap(), &nu);
                prop_assert!(support_matches_vertices(&tree, &nu, j));
                barycenter(&tree, &nu).unwrap();
            }
        }
    }
}
