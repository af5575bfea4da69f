//! ordRes at type II points, the identity linking it to the crucial function,
//! semistability of coefficient reductions, the minimal resultant locus and
//! the equidistribution harness.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::berkline::{Ball, Direction};
use crate::crucial::{
    averaged_total_variation, barycenter, closed_ball_mass, crucial_curvature, iterate_degree, tree_directions,
    BarycenterResult, CrucialFn,
};
use crate::error::{check, Error, Result};
use crate::polydyn::{Poly, ITERATE_DEGREE_BOUND};
use crate::trucco_tree::{DynTree, Location, TreeFamily};
use crate::valfield::{residue_factors, Scalar, Stage, Val, Q};

/// Largest `D` for which the Sylvester determinant baseline is evaluated.
pub const SYLVESTER_DEGREE_BOUND: usize = 27;

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// ordRes at a type II point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdResSample {
    pub point: Ball,
    pub value: Q,
}

/// ordRes of `P^j` at `ξ = B(a, p^-r)`, from the valuations of the conjugate
/// `(P^j(cz + a) - a)/c` with `v(c) = r`, read off the tree:
/// `v(b_D) = v(lead P^j) + (D-1) r` and `min(0, min v(b_k)) = -ρ(ξ, ξ ∨ P^j(ξ))`.
pub fn ord_res_at(poly: &Poly, j: usize, xi: &Ball) -> Result<Q> {
    let d = qi(iterate_degree(poly, j)?);
    let lead = poly.iterate_leading_val(j)?;
    let (img, _) = poly.image_iter(xi, j)?;
    let rho = xi.rho(&xi.join(&img)?)?;
    Ok(d * (lead + (d - qi(1)) * xi.rv()) + qi(2) * d * rho)
}

/// ordRes of `P^j` at `ξ` from the explicit coefficients of the conjugate.
pub fn ord_res_composed(iterate: &Poly, xi: &Ball) -> Result<Q> {
    let r = xi.rv();
    let a = xi.center();
    let t = iterate.taylor(a);
    let d = iterate.degree();
    let mut vals: Vec<Val> = Vec::with_capacity(d + 1);
    let shifted = &t[0] - &a.coerce(t[0].stage());
    vals.push(shift_val(shifted.val(), -r));
    for (k, tk) in t.iter().enumerate().skip(1) {
        vals.push(shift_val(tk.val(), qi(k as i64 - 1) * r));
    }
    let vd = match vals[d] {
        Val::Exact(v) => v,
        _ => return Err(Error::PrecisionExhausted("leading coefficient of the conjugate".into())),
    };
    let mut m = qi(0);
    for v in &vals {
        if let Val::Exact(x) = v {
            m = m.min(*x);
        }
    }
    for (k, v) in vals.iter().enumerate() {
        if let Val::AtLeast(b) = v {
            if *b < m {
                return Err(Error::PrecisionExhausted(format!("coefficient {k} of the conjugate at {xi}")));
            }
        }
    }
    let dq = qi(d as i64);
    Ok(dq * vd - qi(2) * dq * m)
}

fn shift_val(v: Val, s: Q) -> Val {
    match v {
        Val::Inf => Val::Inf,
        Val::Exact(x) => Val::Exact(x + s),
        Val::AtLeast(x) => Val::AtLeast(x + s),
    }
}

/// ordRes by the closed form, cross-checked against the explicit conjugate
/// whenever `D` is within the iterate bound.
pub fn ord_res_checked(poly: &Poly, j: usize, xi: &Ball) -> Result<Q> {
    let it = poly.iterate_poly(j, ITERATE_DEGREE_BOUND).ok();
    ord_res_with(poly, j, xi, it.as_ref())
}

fn ord_res_with(poly: &Poly, j: usize, xi: &Ball, iterate: Option<&Poly>) -> Result<Q> {
    let v = ord_res_at(poly, j, xi)?;
    if let Some(it) = iterate {
        match ord_res_composed(it, xi) {
            Ok(w) => check(v == w, || format!("ordRes at {xi}: closed form {v}, conjugate {w}"))?,
            Err(Error::PrecisionExhausted(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(v)
}

pub fn ord_res_sample(poly: &Poly, j: usize, xi: &Ball) -> Result<OrdResSample> {
    Ok(OrdResSample { point: xi.clone(), value: ord_res_checked(poly, j, xi)? })
}

fn rational_val(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let count = |n: &BigInt| {
        let mut n = n.abs();
        let mut c = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            c += 1;
        }
        c
    };
    Some(count(x.numer()) - count(x.denom()))
}

/// Determinant by exact Gaussian elimination.
fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pv;
            let (upper, lower) = m.split_at_mut(r);
            for (x, y) in lower[0][col..n].iter_mut().zip(&upper[col][col..n]) {
                *x -= &f * y;
            }
        }
    }
    det
}

/// Resultant of two binary forms of degree `n`, given by coefficient lists
/// (lowest power of `X` first), via the Sylvester matrix.
pub fn sylvester_resultant(f: &[BigRational], g: &[BigRational]) -> BigRational {
    let n = f.len() - 1;
    let size = 2 * n;
    let mut m = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for k in 0..=n {
            m[i][i + k] = f[n - k].clone();
            m[n + i][i + k] = g[n - k].clone();
        }
    }
    determinant(m)
}

/// `v(Res)` of a minimal lift of `P^j` itself, by the Sylvester determinant
/// of `(Y^D, F)` after joint normalization; `None` outside the exact range.
pub fn resultant_baseline(poly: &Poly, j: usize) -> Result<Option<Q>> {
    let d = iterate_degree(poly, j)? as usize;
    if d > SYLVESTER_DEGREE_BOUND || poly.rational_coeffs().is_none() {
        return Ok(None);
    }
    let it = poly.iterate_poly(j, SYLVESTER_DEGREE_BOUND)?;
    let f = it.rational_coeffs().unwrap().to_vec();
    let p = poly.prime();
    let m = f.iter().filter_map(|c| rational_val(c, p)).min().unwrap().min(0);
    let mut g = vec![BigRational::zero(); d + 1];
    g[0] = BigRational::one();
    let res = sylvester_resultant(&f, &g);
    let v = rational_val(&res, p).ok_or_else(|| Error::CheckFailed("vanishing resultant".into()))?;
    Ok(Some(qi(v - 2 * d as i64 * m)))
}

/// Both sides of `ordRes = 2D(D-1) Crucial + v(Res(minimal lift))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub point: Ball,
    pub lhs: Q,
    pub rhs: Q,
    pub equal: bool,
}

/// Evaluates the identity at the given points with a shared crucial function.
pub fn identity_check_many(poly: &Poly, j: usize, points: &[Ball]) -> Result<Vec<IdentityCheck>> {
    let d = qi(iterate_degree(poly, j)?);
    let crucial = CrucialFn::absolute(poly, j)?;
    let gauss = Ball::gauss(&poly.base_stage());
    let base = match resultant_baseline(poly, j)? {
        Some(v) => {
            let direct = ord_res_checked(poly, j, &gauss)?;
            check(v == direct, || format!("Sylvester baseline {v} differs from ordRes(ξ_g) = {direct}"))?;
            v
        }
        None => ord_res_checked(poly, j, &gauss)?,
    };
    let mut out = Vec::new();
    for xi in points {
        let lhs = ord_res_checked(poly, j, xi)?;
        let rhs = qi(2) * d * (d - qi(1)) * crucial.value(xi)? + base;
        out.push(IdentityCheck { point: xi.clone(), lhs, rhs, equal: lhs == rhs });
    }
    Ok(out)
}

pub fn identity_check(poly: &Poly, j: usize, xi: &Ball) -> Result<IdentityCheck> {
    Ok(identity_check_many(poly, j, std::slice::from_ref(xi))?.remove(0))
}

/// A hole of the coefficient reduction at a type II point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthEntry {
    /// The hole as a tangent direction at `ξ`, when its residue class is
    /// rational over the residue field of `ξ`.
    pub direction: Option<Direction>,
    /// Degree of the residue extension carrying the hole.
    pub residue_degree: usize,
    /// Number of holes sharing this depth, degree and fixedness.
    pub count: usize,
    pub depth: u64,
    /// Whether the reduction fixes this hole.
    pub fixed: bool,
}

/// Semistability evidence for the conjugate of `P^j` moving `ξ` to `ξ_g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthReport {
    pub point: Ball,
    pub iterate: usize,
    pub degree: u64,
    pub entries: Vec<DepthEntry>,
    pub semistable: bool,
    pub stable: bool,
}

impl DepthReport {
    pub fn max_depth(&self) -> u64 {
        self.entries.iter().map(|e| e.depth).max().unwrap_or(0)
    }

    fn finish(point: &Ball, iterate: usize, degree: u64, mut entries: Vec<DepthEntry>) -> DepthReport {
        entries.retain(|e| e.depth > 0);
        let mut r = DepthReport { point: point.clone(), iterate, degree, entries, semistable: false, stable: false };
        r.semistable = is_semistable(&r);
        r.stable = is_stable(&r);
        r
    }
}

/// `depth ≤ (D+1)/2`, and `< D/2` at a fixed hole.
pub fn is_semistable(report: &DepthReport) -> bool {
    let d = report.degree as i64;
    report.entries.iter().all(|e| {
        let x = 2 * e.depth as i64;
        if e.fixed {
            x < d
        } else {
            x <= d + 1
        }
    })
}

/// `depth ≤ D/2`, and `< (D-1)/2` at a fixed hole.
pub fn is_stable(report: &DepthReport) -> bool {
    let d = report.degree as i64;
    report.entries.iter().all(|e| {
        let x = 2 * e.depth as i64;
        if e.fixed {
            x < d - 1
        } else {
            x <= d
        }
    })
}

fn up_entry(xi: &Ball, depth: u64, fixed: bool) -> DepthEntry {
    DepthEntry { direction: Some(Direction::up(xi)), residue_degree: 1, count: 1, depth, fixed }
}

/// Depths of all holes of the coefficient reduction of the conjugate of
/// `P^j` at `ξ`. The `∞` hole has depth `D - deg_ξ P^j` when `ξ ⪯ P^j(ξ)` and
/// `D` otherwise; when `ξ ≺ P^j(ξ)` the reduction is the constant `∞` and the
/// finite holes are the roots of the reduced numerator.
pub fn depth_report(poly: &Poly, j: usize, xi: &Ball) -> Result<DepthReport> {
    let it = poly.iterate_poly(j, ITERATE_DEGREE_BOUND).ok();
    depth_report_with(poly, j, xi, it.as_ref())
}

fn depth_report_with(poly: &Poly, j: usize, xi: &Ball, iterate: Option<&Poly>) -> Result<DepthReport> {
    let d = iterate_degree(poly, j)? as u64;
    let (img, deg) = poly.image_iter(xi, j)?;
    let mut entries = Vec::new();
    if img == *xi {
        entries.push(up_entry(xi, d - deg, true));
    } else if xi.lt(&img)? {
        entries.push(up_entry(xi, d - deg, true));
        match iterate {
            Some(it) => entries.extend(reduction_holes(it, xi, deg)?),
            None => entries.extend(fiber_holes(poly, j, xi)?),
        }
    } else {
        entries.push(up_entry(xi, d, false));
    }
    Ok(DepthReport::finish(xi, j, d, entries))
}

/// Finite holes from the reduction of `(F(cz + a) - a)/c`, `v(c) = r`.
fn reduction_holes(iterate: &Poly, xi: &Ball, deg: u64) -> Result<Vec<DepthEntry>> {
    let r = xi.rv();
    let a = xi.center();
    let t = iterate.taylor(a);
    let mut terms: Vec<Scalar> = Vec::with_capacity(t.len());
    terms.push(&t[0] - &a.coerce(t[0].stage()));
    terms.extend(t.iter().skip(1).cloned());
    let mut vals = Vec::with_capacity(terms.len());
    for (k, x) in terms.iter().enumerate() {
        vals.push(shift_val(x.val(), qi(k as i64) * r));
    }
    let m = vals
        .iter()
        .filter_map(|v| match v {
            Val::Exact(x) => Some(*x),
            _ => None,
        })
        .min()
        .ok_or_else(|| Error::PrecisionExhausted(format!("conjugate at {xi}")))?;
    let mut red = Vec::with_capacity(terms.len());
    for (k, (x, v)) in terms.into_iter().zip(&vals).enumerate() {
        match v {
            Val::Exact(w) if *w == m => red.push(Some(x)),
            Val::AtLeast(b) if *b <= m => {
                return Err(Error::PrecisionExhausted(format!("coefficient {k} of the conjugate at {xi}")));
            }
            _ => red.push(None),
        }
    }
    let top = red.iter().rposition(Option::is_some).unwrap_or(0) as u64;
    check(top == deg, || format!("reduction at {xi} has degree {top}, local degree {deg}"))?;
    let mut out = Vec::new();
    for f in residue_factors(&red)? {
        if f.degree == 1 {
            let c = Scalar::p_power(a.stage(), r);
            for root in &f.roots {
                let st = Stage::join(&Stage::join(a.stage(), c.stage()), root.stage());
                let w = &a.coerce(&st) + &(&c.coerce(&st) * &root.coerce(&st));
                out.push(DepthEntry {
                    direction: Some(xi.direction_to_scalar(&w)?),
                    residue_degree: 1,
                    count: 1,
                    depth: f.multiplicity as u64,
                    fixed: false,
                });
            }
        } else {
            out.push(DepthEntry {
                direction: None,
                residue_degree: f.degree,
                count: f.count * f.degree,
                depth: f.multiplicity as u64,
                fixed: false,
            });
        }
    }
    Ok(out)
}

/// Finite holes from the fiber `(P^j)^{-1}(ξ)`: each down direction at `ξ`
/// collects the local degrees of the fiber points it contains.
fn fiber_holes(poly: &Poly, j: usize, xi: &Ball) -> Result<Vec<DepthEntry>> {
    let mut groups: Vec<(Direction, u64)> = Vec::new();
    for e in poly.iterate_fiber(j, xi)? {
        let dir = xi.direction_to(&e.point)?;
        if dir.is_up() {
            continue;
        }
        match groups.iter_mut().find(|g| g.0 == dir) {
            Some(g) => g.1 += e.local_degree,
            None => groups.push((dir, e.local_degree)),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(dir, m)| DepthEntry { direction: Some(dir), residue_degree: 1, count: 1, depth: m, fixed: false })
        .collect())
}

/// [`depth_report`] computed from the fiber of `ξ` instead of the reduction.
pub fn depth_report_by_fiber(poly: &Poly, j: usize, xi: &Ball) -> Result<DepthReport> {
    depth_report_with(poly, j, xi, None)
}

/// Depth along one direction at `ξ`.
pub fn depth_at(poly: &Poly, j: usize, dir: &Direction) -> Result<u64> {
    let r = depth_report(poly, j, &dir.base)?;
    if let Some(e) = r.entries.iter().find(|e| e.direction.as_ref() == Some(dir)) {
        return Ok(e.depth);
    }
    depth_report_by_fiber(poly, j, &dir.base)
        .map(|r| r.entries.iter().find(|e| e.direction.as_ref() == Some(dir)).map_or(0, |e| e.depth))
}

/// The certified minimal resultant locus of `P^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinResLocResult {
    pub locus: BarycenterResult,
    pub ord_res: Q,
    pub certificates: Vec<DepthReport>,
    /// Flanking points at distance 1/4 with their ordRes and semistability.
    pub probes: Vec<(Ball, Q, bool)>,
    pub levels_used: usize,
    /// Barycenters of `ν_{P^j, Γ_n}` for `n = 1..=levels_used`.
    pub barycenters: Vec<BarycenterResult>,
    pub method: LocusMethod,
}

/// How the certified locus was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocusMethod {
    /// Barycenters of consecutive levels agree away from the leaves.
    Stabilized,
    /// `P` is simple and `Γ_n` is a single point.
    Simple,
    /// Geometric limit of barycenters moving along a ray.
    Extrapolated,
    /// Exact minimization of ordRes on the vertical line through the
    /// barycenter centers.
    LineSearch,
}

impl fmt::Display for LocusMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocusMethod::Stabilized => "stabilized",
            LocusMethod::Simple => "simple",
            LocusMethod::Extrapolated => "extrapolated",
            LocusMethod::LineSearch => "line-search",
        })
    }
}

impl MinResLocResult {
    pub fn is_singleton(&self) -> bool {
        self.locus.is_singleton()
    }
}

impl fmt::Display for MinResLocResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (ordRes {}, levels {}, {})", self.locus, self.ord_res, self.levels_used, self.method)
    }
}

/// Default number of tree levels for the solver.
pub const DEFAULT_MAX_LEVEL: usize = 6;

/// Whether a barycenter has settled on `Γ_n`: no end is a leaf of `Γ_n`.
fn interior(tree: &DynTree, bc: &BarycenterResult) -> bool {
    bc.ends().iter().all(|b| tree.id_of(b).is_none_or(|id| tree.valency(id) >= 2))
}

/// The end of a barycenter farther from `∞` and the other one.
fn low_high(bc: &BarycenterResult) -> (&Ball, &Ball) {
    match bc {
        BarycenterResult::Singleton(a) => (a, a),
        BarycenterResult::Segment(a, b) => (a, b),
    }
}

/// Limit of a moving end `B(a_n, r_n)` when the steps `r_{n+1} - r_n` shrink
/// by a constant ratio along a common ray.
fn geometric_limit(ends: &[&Ball]) -> Result<Option<Ball>> {
    if ends.len() < 3 {
        return Ok(None);
    }
    let k = ends.len();
    let (x0, x1, x2) = (ends[k - 3], ends[k - 2], ends[k - 1]);
    let (s1, s2) = (x1.rv() - x0.rv(), x2.rv() - x1.rv());
    if s1 == qi(0) || s2 == qi(0) {
        return Ok(None);
    }
    let ratio = s2 / s1;
    if ratio <= qi(0) || ratio >= qi(1) {
        return Ok(None);
    }
    if !(x0.lt(x1)? && x1.lt(x2)?) && !(x2.lt(x1)? && x1.lt(x0)?) {
        return Ok(None);
    }
    let r = x2.rv() + s2 * ratio / (qi(1) - ratio);
    let lim = Ball::new(x2.center(), r)?;
    for x in [x0, x1] {
        if Ball::new(x.center(), r)? != lim {
            return Ok(None);
        }
    }
    Ok(Some(lim))
}

/// Flanking probes at distance 1/4 off the locus: the directions to `∞` and
/// to the center of each end, all
/// tree directions of `Γ_n` at each end and every rational hole of the
/// reduction there and the directions toward earlier barycenters, excluding
/// directions pointing into the locus.
fn flanking_probes(
    tree: &DynTree,
    locus: &BarycenterResult,
    certificates: &[DepthReport],
    seen: &[BarycenterResult],
) -> Result<Vec<Ball>> {
    let quarter = Q::new(1, 4);
    let mut out: Vec<Ball> = Vec::new();
    for (end, cert) in locus.ends().into_iter().zip(certificates) {
        let mut dirs: Vec<Direction> =
            vec![Direction::up(end), end.direction_to(&Ball::new(end.center(), end.rv() + qi(1))?)?];
        match tree.locate(end)? {
            Some(Location::Node(id)) => dirs.extend(tree_directions(tree, id)?.into_iter().map(|x| x.1)),
            Some(Location::Edge { child, .. }) => dirs.push(end.direction_to(tree.ball(child))?),
            None => {}
        }
        dirs.extend(cert.entries.iter().filter_map(|e| e.direction.clone()));
        for bc in seen {
            for b in bc.ends() {
                if b != end {
                    dirs.push(end.direction_to(b)?);
                }
            }
        }
        for dir in dirs {
            let probe = dir.probe(quarter)?;
            if locus.contains(&probe)? || out.contains(&probe) {
                continue;
            }
            out.push(probe);
        }
    }
    Ok(out)
}

fn certify(
    poly: &Poly,
    j: usize,
    tree: &DynTree,
    locus: BarycenterResult,
    barycenters: Vec<BarycenterResult>,
    method: LocusMethod,
) -> Result<MinResLocResult> {
    let it = poly.iterate_poly(j, ITERATE_DEGREE_BOUND).ok();
    let ord_res = |b: &Ball| ord_res_with(poly, j, b, it.as_ref());
    let mut certificates = Vec::new();
    let mut values = Vec::new();
    for end in locus.ends() {
        certificates.push(depth_report_with(poly, j, end, it.as_ref())?);
        values.push(ord_res(end)?);
    }
    if let BarycenterResult::Segment(a, b) = &locus {
        let mid = a.toward(b, a.rho(b)? / qi(2))?;
        values.push(ord_res(&mid)?);
    }
    let value = values[0];
    let mut failures = Vec::new();
    if values.iter().any(|v| *v != value) {
        failures.push(format!("ordRes not constant on the locus: {values:?}"));
    }
    for c in &certificates {
        if !c.semistable {
            failures.push(format!("{} is not semistable", c.point));
        }
    }
    let mut probes = Vec::new();
    for b in flanking_probes(tree, &locus, &certificates, &barycenters)? {
        let v = ord_res(&b)?;
        let semi = depth_report_with(poly, j, &b, it.as_ref())?.semistable;
        if v <= value && semi {
            failures.push(format!("probe {b} has ordRes {v} <= {value} and is semistable"));
        }
        probes.push((b, v, semi));
    }
    if !failures.is_empty() {
        return Err(Error::NotStabilized {
            level: barycenters.len(),
            detail: format!("candidate {locus} failed certification: {}", failures.join("; ")),
        });
    }
    Ok(MinResLocResult {
        locus,
        ord_res: value,
        certificates,
        probes,
        levels_used: barycenters.len(),
        barycenters,
        method,
    })
}

/// `MinResLoc_{P^j}` as the limit of the barycenters of `ν_{P^j, Γ_n}`,
/// certified by semistability and ordRes probes.
pub fn min_res_loc(poly: &Poly, j: usize, max_level: usize) -> Result<MinResLocResult> {
    let mut fam = TreeFamily::new(poly)?;
    min_res_loc_in(&mut fam, j, max_level)
}

pub fn min_res_loc_in(fam: &mut TreeFamily, j: usize, max_level: usize) -> Result<MinResLocResult> {
    let poly = fam.poly().clone();
    let mut bcs: Vec<BarycenterResult> = Vec::new();
    let mut last_tree = None;
    let mut failures = Vec::new();
    for n in 1..=max_level.max(1) {
        let tree = match fam.tree(n) {
            Ok(t) => t,
            Err(e) if e.is_budget() && n > 1 => {
                failures.push(format!("level {n} not built: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let bc = barycenter(&tree, &crucial_curvature(&tree, j)?)?;
        let settled = bcs.last() == Some(&bc) && interior(&tree, &bc);
        bcs.push(bc.clone());
        if tree.is_simple() {
            return certify(&poly, j, &tree, bc, bcs, LocusMethod::Simple);
        }
        if settled {
            return certify(&poly, j, &tree, bc, bcs, LocusMethod::Stabilized);
        }
        if n >= 3 {
            let lows: Vec<&Ball> = bcs.iter().map(|b| low_high(b).0).collect();
            let highs: Vec<&Ball> = bcs.iter().map(|b| low_high(b).1).collect();
            let lim_low = geometric_limit(&lows)?;
            let same_high = highs[n - 1] == highs[n - 2] && highs[n - 2] == highs[n - 3];
            let high_moves = geometric_limit(&highs)?;
            let candidate = match (lim_low, bcs[n - 1].is_singleton()) {
                (Some(l), true) => Some(BarycenterResult::Singleton(l)),
                (Some(l), false) if same_high => Some(segment(l, highs[n - 1].clone())),
                (Some(l), false) => high_moves.map(|h| segment(l, h)),
                (None, _) => None,
            };
            if let Some(c) = candidate {
                match certify(&poly, j, &tree, c, bcs.clone(), LocusMethod::Extrapolated) {
                    Ok(r) => return Ok(r),
                    Err(Error::NotStabilized { detail, .. }) => failures.push(detail),
                    Err(e) => return Err(e),
                }
            }
        }
        last_tree = Some(tree);
    }
    let tree = last_tree.expect("at least one level");
    if let Ok(it) = poly.iterate_poly(j, ITERATE_DEGREE_BOUND) {
        let rvs: Vec<Q> = bcs.iter().flat_map(|b| b.ends().into_iter().map(|x| x.rv())).collect();
        let lo = *rvs.iter().min().unwrap() - qi(1);
        let hi = *rvs.iter().max().unwrap() + qi(1);
        let mut centers: Vec<&Ball> = Vec::new();
        for b in bcs.iter().rev().flat_map(|b| b.ends()) {
            if !centers.iter().any(|c| c.center().key() == b.center().key()) {
                centers.push(b);
            }
        }
        for c in centers {
            let (r_far, r_near, _) = line_minimum(&it, c.center(), lo, hi)?;
            let locus = segment(Ball::new(c.center(), r_far)?, Ball::new(c.center(), r_near)?);
            match certify(&poly, j, &tree, locus, bcs.clone(), LocusMethod::LineSearch) {
                Ok(r) => return Ok(r),
                Err(Error::NotStabilized { detail, .. }) => failures.push(detail),
                Err(e) => return Err(e),
            }
        }
    }
    let mut detail =
        format!("barycenters by level: {}", bcs.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", "));
    for f in failures {
        detail.push_str("; ");
        detail.push_str(&f);
    }
    Err(Error::NotStabilized { level: max_level, detail })
}

/// Minimum of ordRes of the explicit iterate `F` over `{B(a, r) : lo ≤ r ≤ hi}`,
/// where it is convex and piecewise affine in `r`. Returns the largest and
/// smallest minimizing `r` and the minimum.
pub fn line_minimum(iterate: &Poly, a: &Scalar, lo: Q, hi: Q) -> Result<(Q, Q, Q)> {
    let t = iterate.taylor(a);
    let d = qi(iterate.degree() as i64);
    let mut lines: Vec<(Q, Q)> = vec![(qi(0), qi(0))];
    let mut bounds: Vec<(Q, Q)> = Vec::new();
    let shifted = &t[0] - &a.coerce(t[0].stage());
    for (k, x) in std::iter::once(&shifted).chain(t.iter().skip(1)).enumerate() {
        let slope = qi(k as i64 - 1);
        match x.val() {
            Val::Exact(v) => lines.push((slope, v)),
            Val::AtLeast(v) => bounds.push((slope, v)),
            Val::Inf => {}
        }
    }
    let lead = match t.last().map(|x| x.val()) {
        Some(Val::Exact(v)) => v,
        _ => return Err(Error::PrecisionExhausted("leading coefficient of the iterate".into())),
    };
    let env = |r: Q| lines.iter().map(|(s, b)| *b + *s * r).min().unwrap();
    let value = |r: Q| d * (lead + (d - qi(1)) * r) - qi(2) * d * env(r);
    let mut points = vec![lo];
    let mut r = lo;
    loop {
        let cur = lines.iter().filter(|(s, b)| *b + *s * r == env(r)).min_by_key(|(s, _)| *s).copied().unwrap();
        let next =
            lines.iter().filter(|(s, _)| *s < cur.0).map(|(s, b)| (*b - cur.1) / (cur.0 - *s)).filter(|x| *x > r).min();
        match next {
            Some(x) if x < hi => {
                points.push(x);
                r = x;
            }
            _ => break,
        }
    }
    points.push(hi);
    for (s, b) in &bounds {
        for r in &points {
            if *b + *s * *r <= env(*r) {
                return Err(Error::PrecisionExhausted(format!("conjugate coefficient near r = {r}")));
            }
        }
    }
    let best = points.iter().map(|r| value(*r)).min().unwrap();
    let arg: Vec<Q> = points.iter().copied().filter(|r| value(*r) == best).collect();
    Ok((*arg.iter().max().unwrap(), *arg.iter().min().unwrap(), best))
}

fn segment(a: Ball, b: Ball) -> BarycenterResult {
    if a == b {
        BarycenterResult::Singleton(a)
    } else {
        BarycenterResult::Segment(a, b)
    }
}

/// Whether `MinResLoc_{P^j}` is the same for `d-1 <= j <= j_max`.
pub fn independence_check(poly: &Poly, j_max: usize, max_level: usize) -> Result<bool> {
    let d = poly.degree();
    let mut fam = TreeFamily::new(poly)?;
    let mut first: Option<BarycenterResult> = None;
    for j in (d - 1).max(1)..=j_max {
        let r = min_res_loc_in(&mut fam, j, max_level)?;
        match &first {
            None => first = Some(r.locus),
            Some(f) if *f != r.locus => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

/// One row of the equidistribution table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquidistRow {
    pub level: usize,
    pub leaf: Ball,
    pub mass: Q,
    pub target: Q,
    pub discrepancy: Q,
}

/// Closed-ball masses of `ν̃_{P^j, Γ_n}` below the leaves of `Γ_s` against
/// `deg_ξ(P^s)/d^s`, for `n = s..=n_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquidistReport {
    pub iterate: usize,
    pub probe_level: usize,
    pub rows: Vec<EquidistRow>,
    pub tame: bool,
}

impl EquidistReport {
    /// Largest discrepancy at each level.
    pub fn max_by_level(&self) -> Vec<(usize, Q)> {
        let mut out: Vec<(usize, Q)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(x) if x.0 == r.level => x.1 = x.1.max(r.discrepancy),
                _ => out.push((r.level, r.discrepancy)),
            }
        }
        out
    }
}

pub fn equidist_report(poly: &Poly, j: usize, n_max: usize, s: usize) -> Result<EquidistReport> {
    let mut fam = TreeFamily::new(poly)?;
    let probe = fam.tree(s)?;
    let ds = (poly.degree() as i64).pow(s as u32);
    let targets: Vec<(Ball, Q)> =
        probe.leaves().iter().map(|&(id, deg)| (probe.ball(id).clone(), Q::new(deg as i64, ds))).collect();
    let mut rows = Vec::new();
    for n in s.max(1)..=n_max {
        let tree = fam.tree(n)?;
        let nu = averaged_total_variation(&crucial_curvature(&tree, j)?);
        for (leaf, target) in &targets {
            let mass = closed_ball_mass(&tree, &nu, leaf)?;
            let diff = mass - target;
            rows.push(EquidistRow {
                level: n,
                leaf: leaf.clone(),
                mass,
                target: *target,
                discrepancy: if diff < qi(0) { -diff } else { diff },
            });
        }
    }
    Ok(EquidistReport { iterate: j, probe_level: s, rows, tame: poly.is_tame() })
}
