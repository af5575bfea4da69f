//! Acceptance run: one PASS/FAIL line per criterion, exact comparisons and
//! wall-clock limits as pinned below.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use berktree::crucial::{
    barycenter, check_slope_formula, crucial_curvature, crucial_curvature_oracle_in, z_set, BarycenterResult, CrucialFn,
};
use berktree::polydyn::Poly;
use berktree::resloc::{equidist_report, identity_check_many, min_res_loc_in, MinResLocResult};
use berktree::trucco_tree::{TreeFamily, INFINITY, TOP};
use berktree::valfield::{q, qi, Q};
use berktree::Ball;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIMIT_DEGREES: Duration = Duration::from_secs(1);
const LIMIT_TREES: Duration = Duration::from_secs(5);
const LIMIT_LOCUS_PER_D: Duration = Duration::from_secs(60);
const LIMIT_CURVATURE_SUITE: Duration = Duration::from_secs(120);
const LIMIT_CONVERGENCE: Duration = Duration::from_secs(60);
const LIMIT_EQUIDIST: Duration = Duration::from_secs(120);
const LIMIT_SIMPLE: Duration = Duration::from_secs(1);
const EQUIDIST_FINAL_BOUND: f64 = 0.05;
const LOCUS_MAX_LEVEL: usize = 4;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(start: Instant, limit: Duration, detail: &mut String) -> bool {
    let t = start.elapsed();
    detail.push_str(&format!(" [{:.2}s, limit {}s]", t.as_secs_f64(), limit.as_secs()));
    t <= limit
}

fn q_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn local_degrees() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in [5u64, 7] {
        let t = tower(p);
        let poly = quartic_example(&t);
        let bp = poly.base_point().unwrap();
        if bp.ball != ball(&t, "0", qi(-1)) || bp.simple {
            bad.push(format!("p={p}: base point {}", bp.ball));
        }
        let inv_p = format!("1/{p}");
        let table: Vec<(Ball, u64)> = vec![
            (ball(&t, "0", qi(-2)), 4),
            (ball(&t, "0", qi(-1)), 4),
            (ball(&t, "0", q(-1, 2)), 3),
            (ball(&t, "0", qi(0)), 3),
            (ball(&t, "0", q(1, 2)), 2),
            (ball(&t, "1", q(1, 2)), 2),
            (ball(&t, &inv_p, q(-1, 2)), 2),
            (ball(&t, &inv_p, qi(3)), 2),
            (ball(&t, "2", q(1, 2)), 1),
            (ball(&t, "3", qi(2)), 1),
        ];
        for (b, want) in table {
            let got = poly.local_degree(&b).unwrap();
            if got != want {
                bad.push(format!("p={p} {b}: {got} != {want}"));
            }
        }
    }
    let mut detail = if bad.is_empty() { "20 points, base point B(0, -1)".to_string() } else { bad.join("; ") };
    let fast = within(start, LIMIT_DEGREES, &mut detail);
    outcome(bad.is_empty() && fast, detail)
}

fn trees() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for p in [5u64, 7] {
        let t = tower(p);
        let mut fam = TreeFamily::new(&quartic_example(&t)).unwrap();
        let g1 = fam.tree(1).unwrap();
        let g2 = fam.tree(2).unwrap();
        let v = g1.vertex_set();
        let has = |b: Ball| g1.id_of(&b).is_some_and(|id| v.contains(&id));
        if g1.leaves().len() != 3 || v.len() != 6 || !has(ball(&t, "0", qi(0))) || !has(ball(&t, "0", qi(-1))) {
            bad.push(format!("p={p}: {} leaves, {} vertices", g1.leaves().len(), v.len()));
        }
        let ends: Vec<Ball> = g1.leaves().iter().map(|x| g1.ball(x.0).clone()).collect();
        for &(id, _) in g2.leaves() {
            let r = g1.retract_ball(g2.ball(id)).unwrap();
            if !ends.contains(&r) {
                bad.push(format!("p={p}: {} retracts to {r}", g2.ball(id)));
            }
        }
        if let Err(e) = g2.check_invariants(&g1) {
            bad.push(format!("p={p}: {e}"));
        }
    }
    let mut detail =
        if bad.is_empty() { "p=5,7: 3 leaves, 6 vertices, level-2 leaves retract".into() } else { bad.join("; ") };
    let fast = within(start, LIMIT_TREES, &mut detail);
    outcome(bad.is_empty() && fast, detail)
}

/// Paper's claimed `MinResLoc` for the family `(d-1)p z^d - d z^(d-1)`.
fn expected_locus(t: &std::sync::Arc<berktree::Tower>, d: usize, j: usize) -> BarycenterResult {
    let xi_g = ball(t, "0", qi(0));
    let xi_p = ball(t, "0", q(-1, d as i64 - 1));
    match (d, j) {
        (3, 1) => BarycenterResult::Segment(xi_g, ball(t, "0", qi(-1))),
        _ if j >= d - 1 => BarycenterResult::Singleton(xi_p),
        _ => BarycenterResult::Singleton(xi_g),
    }
}

fn locus_cases(p: u64) -> Vec<(usize, Vec<usize>)> {
    match p {
        5 => vec![(3, vec![1, 2, 3]), (4, vec![1, 2, 3]), (5, vec![1, 2, 3, 4]), (6, vec![1, 2, 3, 4])],
        _ => vec![(4, vec![1, 2, 3]), (5, vec![1, 2, 3, 4])],
    }
}

fn minres_golden(
    p: u64,
    results: &mut Vec<(String, MinResLocResult)>,
    lines: &mut Vec<String>,
) -> (usize, usize, bool) {
    let (mut ok, mut total, mut fast) = (0, 0, true);
    for (d, js) in locus_cases(p) {
        let start = Instant::now();
        let t = tower(p);
        let poly = faber_family(&t, d);
        let mut fam = TreeFamily::new(&poly).unwrap();
        for j in js {
            total += 1;
            let want = expected_locus(&t, d, j);
            match min_res_loc_in(&mut fam, j, LOCUS_MAX_LEVEL) {
                Ok(r) => {
                    let hit = r.locus == want;
                    ok += hit as usize;
                    lines.push(format!(
                        "    p={p} d={d} j={j}: {} {r} expected {want}",
                        if hit { "match" } else { "MISMATCH" }
                    ));
                    results.push((format!("p={p} d={d} j={j}"), r));
                }
                Err(e) => lines.push(format!("    p={p} d={d} j={j}: ERROR {e} expected {want}")),
            }
        }
        let t = start.elapsed();
        lines.push(format!("    p={p} d={d}: {:.2}s", t.as_secs_f64()));
        fast &= t <= LIMIT_LOCUS_PER_D;
    }
    (ok, total, fast)
}

fn random_tame_polys() -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut out = Vec::new();
    while out.len() < 10 {
        let p = if rng.gen_bool(0.5) { 5u64 } else { 7 };
        let d = rng.gen_range(3usize..=4);
        let a = rng.gen_range(1i64..p as i64);
        let b = rng.gen_range(1i64..p as i64);
        let c = rng.gen_range(-6i64..=6);
        let t = tower(p);
        let poly = scaled_poly(&t, d, a, b, c);
        let mut fam = TreeFamily::new(&poly).unwrap();
        if fam.tree(3).is_ok() {
            out.push(poly);
        }
    }
    out
}

fn curvature_suite() -> Outcome {
    let start = Instant::now();
    let mut polys = Vec::new();
    for p in [5u64, 7] {
        let t = tower(p);
        polys.push(quartic_example(&t));
        polys.push(faber_family(&t, 3));
    }
    polys.extend(random_tame_polys());
    let mut bad = Vec::new();
    let mut checked = 0;
    for poly in &polys {
        let mut fam = TreeFamily::new(poly).unwrap();
        for n in 1..=3 {
            let tree = fam.tree(n).unwrap();
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                let oracle = crucial_curvature_oracle_in(&mut fam, &tree, j).unwrap();
                let z = z_set(&tree, j).unwrap();
                let support: Vec<usize> =
                    tree.vertex_set().into_iter().filter(|i| *i != INFINITY && !z.contains(i)).collect();
                if nu.total() != qi(1) || nu != oracle || nu.support() != support {
                    bad.push(format!("{poly} n={n} j={j}"));
                }
                checked += 1;
            }
        }
    }
    let mut detail = if bad.is_empty() {
        format!("{} polynomials, {checked} (n, j) pairs: mass 1, support, oracle equality", polys.len())
    } else {
        bad.join("; ")
    };
    let fast = within(start, LIMIT_CURVATURE_SUITE, &mut detail);
    outcome(bad.is_empty() && fast, detail)
}

fn slope_identity_suite() -> Outcome {
    let mut bad = Vec::new();
    let (mut slopes, mut points) = (0, 0);
    for p in [5u64, 7] {
        let t = tower(p);
        for poly in [quartic_example(&t), faber_family(&t, 3), faber_family(&t, 4)] {
            let mut fam = TreeFamily::new(&poly).unwrap();
            for n in 1..=2 {
                let tree = fam.tree(n).unwrap();
                for j in 1..=2 {
                    let nu = crucial_curvature(&tree, j).unwrap();
                    let cf = CrucialFn::at_base(&mut fam, j).unwrap();
                    match check_slope_formula(&tree, &nu, &cf) {
                        Ok(k) => slopes += k,
                        Err(e) => bad.push(format!("{poly} n={n} j={j}: {e}")),
                    }
                }
            }
            let mut pts = Vec::new();
            for c in ["0", "1", "2", "3/10", &format!("1/{p}")] {
                for r in [q(-3, 2), qi(-1), q(-1, 2), q(-1, 3), qi(0), q(1, 2), qi(2)] {
                    pts.push(ball(&t, c, r));
                }
            }
            for j in 1..=2 {
                for c in identity_check_many(&poly, j, &pts).unwrap() {
                    points += 1;
                    if !c.equal {
                        bad.push(format!("{poly} j={j} at {}: {} vs {}", c.point, c.lhs, c.rhs));
                    }
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{slopes} tree directions, {points} identity points (35 per polynomial and iterate)")
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let t = tower(5);
    let poly = faber_family(&t, 3);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let target = min_res_loc_in(&mut fam, 1, LOCUS_MAX_LEVEL).unwrap();
    let mut nested = true;
    let mut monotone = true;
    let mut dists = Vec::new();
    let mut prev: Option<BarycenterResult> = None;
    let mut singletons = true;
    let mut n_max = 0;
    for n in 1..=6 {
        let tree = match fam.tree(n) {
            Ok(t) => t,
            Err(e) if e.is_unsupported() => break,
            Err(e) => panic!("{e}"),
        };
        n_max = n;
        let bc = barycenter(&tree, &crucial_curvature(&tree, 1).unwrap()).unwrap();
        let h = bc.hausdorff(&target.locus).unwrap();
        if let Some(last) = dists.last() {
            monotone &= h <= *last;
        }
        if let Some(p) = &prev {
            nested &= p.subset_of(&bc).unwrap();
        }
        dists.push(h);
        prev = Some(bc);
        for j in 2..=3 {
            singletons &= barycenter(&tree, &crucial_curvature(&tree, j).unwrap()).unwrap().is_singleton();
        }
    }
    let reaches_zero = dists.iter().any(|h| *h == qi(0));
    let shown: Vec<String> = dists.iter().map(|h| h.to_string()).collect();
    let mut detail = format!(
        "locus {} ({}); Hausdorff distances n=1..{n_max}: [{}]; nested {nested}, non-increasing {monotone}, reaches 0 {reaches_zero}, singletons for j>=2 {singletons}",
        target.locus,
        target.method,
        shown.join(", ")
    );
    let fast = within(start, LIMIT_CONVERGENCE, &mut detail);
    outcome(nested && monotone && reaches_zero && singletons && fast, detail)
}

fn coherence(results: &[(String, MinResLocResult)]) -> Outcome {
    let mut bad = Vec::new();
    let mut probes = 0;
    for (name, r) in results {
        for c in &r.certificates {
            if !c.semistable {
                bad.push(format!("{name}: {} not semistable", c.point));
            }
            if r.is_singleton() && !c.stable {
                bad.push(format!("{name}: singleton {} not stable", c.point));
            }
        }
        for (b, v, semi) in &r.probes {
            probes += 1;
            if *semi && *v <= r.ord_res {
                bad.push(format!("{name}: probe {b} has ordRes {v} and is semistable"));
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} certified loci, {probes} flanking probes at distance 1/4", results.len())
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn equidistribution() -> Outcome {
    let start = Instant::now();
    let t = tower(5);
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, poly) in [("quartic", quartic_example(&t)), ("cubic", faber_family(&t, 3))] {
        let d = poly.degree() as i64;
        let ratio_bound = qi(2) * (qi(1) - Q::new(1, d));
        let rep = equidist_report(&poly, 1, 5, 1).unwrap();
        let by_level: Vec<(usize, Q)> = rep.max_by_level().into_iter().filter(|x| x.0 >= 2).collect();
        let mut ok = true;
        for w in by_level.windows(2) {
            if w[0].1 > qi(0) && w[1].1 > w[0].1 * ratio_bound {
                ok = false;
            }
        }
        let last = q_f64(by_level.last().unwrap().1);
        ok &= last <= EQUIDIST_FINAL_BOUND;
        pass &= ok;
        let shown: Vec<String> = by_level.iter().map(|(n, x)| format!("n={n}: {:.4}", q_f64(*x))).collect();
        parts.push(format!("{name} [{}] ratio bound {ratio_bound}", shown.join(", ")));
    }
    let mut detail = parts.join("; ");
    let fast = within(start, LIMIT_EQUIDIST, &mut detail);
    outcome(pass && fast, detail)
}

fn simple_case() -> Outcome {
    let start = Instant::now();
    let t = tower(5);
    let xi_g = ball(&t, "0", qi(0));
    let mut bad = Vec::new();
    for d in [2usize, 3] {
        let poly = Poly::parse(&t, &format!("z^{d}")).unwrap();
        let mut fam = TreeFamily::new(&poly).unwrap();
        for n in 1..=3 {
            let tree = fam.tree(n).unwrap();
            for j in 1..=2 {
                let nu = crucial_curvature(&tree, j).unwrap();
                if nu.atoms().collect::<Vec<_>>() != vec![(TOP, qi(1))] || tree.ball(TOP) != &xi_g {
                    bad.push(format!("d={d} n={n} j={j}: curvature"));
                }
                if barycenter(&tree, &nu).unwrap() != BarycenterResult::Singleton(xi_g.clone()) {
                    bad.push(format!("d={d} n={n} j={j}: barycenter"));
                }
            }
        }
        for j in 1..=2 {
            let r = min_res_loc_in(&mut fam, j, 3).unwrap();
            if r.locus != BarycenterResult::Singleton(xi_g.clone()) {
                bad.push(format!("d={d} j={j}: locus {}", r.locus));
            }
        }
        let rep = equidist_report(&poly, 1, 3, 1).unwrap();
        if rep.rows.iter().any(|r| r.discrepancy != qi(0)) {
            bad.push(format!("d={d}: nonzero discrepancy"));
        }
    }
    let mut detail = if bad.is_empty() {
        "z^2, z^3: delta at the Gauss point, BC = MinResLoc, zero discrepancy".into()
    } else {
        bad.join("; ")
    };
    let fast = within(start, LIMIT_SIMPLE, &mut detail);
    outcome(bad.is_empty() && fast, detail)
}

fn z_bound() -> Outcome {
    let t = tower(5);
    let poly = quartic_example(&t);
    let mut fam = TreeFamily::new(&poly).unwrap();
    let bound = 4usize.pow(3);
    let mut counts = Vec::new();
    let mut pass = true;
    for n in 2..=4 {
        let tree = fam.tree(n).unwrap();
        let k = z_set(&tree, 1).unwrap().len();
        pass &= k <= bound;
        counts.push(format!("n={n}: {k}"));
    }
    outcome(pass, format!("#Z_(1,n) [{}] <= {bound}", counts.join(", ")))
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let mut lines = Vec::new();
    let start = Instant::now();
    let (ok, total, fast) = minres_golden(5, &mut results, &mut lines);
    let mut detail3 = format!("{ok}/{total} loci match at p=5 (max level {LOCUS_MAX_LEVEL})");
    detail3.push_str(&format!(
        " [{:.2}s total, limit {}s per d]",
        start.elapsed().as_secs_f64(),
        LIMIT_LOCUS_PER_D.as_secs()
    ));
    let golden3 = outcome(ok == total && fast, detail3);
    let mut extra = Vec::new();
    minres_golden(7, &mut results, &mut extra);

    let criteria: Vec<Criterion> = vec![
        (1, "local degrees of the quartic example", local_degrees),
        (2, "trees of the quartic example", trees),
        (4, "curvature mass, support and Laplacian oracle", curvature_suite),
        (5, "slope formula and ordRes identity", slope_identity_suite),
        (6, "barycenter convergence for the cubic", convergence),
        (8, "equidistribution decay", equidistribution),
        (9, "simple maps", simple_case),
        (10, "Z-set bound", z_bound),
    ];
    let mut report: Vec<(usize, String, Outcome)> = Vec::new();
    report.push((3, "minimal resultant locus of the Faber family".into(), golden3));
    for (k, name, f) in criteria {
        report.push((k, name.into(), f()));
    }
    report.push((7, "semistability coherence of certified loci".into(), coherence(&results)));
    report.sort_by_key(|x| x.0);

    let mut failed = 0;
    println!("acceptance criteria");
    for (k, name, o) in &report {
        failed += !o.pass as usize;
        println!("criterion {k:>2}: {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if *k == 3 {
            for l in &lines {
                println!("{l}");
            }
            println!("    supplementary p=7 runs:");
            for l in &extra {
                println!("{l}");
            }
        }
    }
    println!("{} of {} criteria passed", report.len() - failed, report.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
