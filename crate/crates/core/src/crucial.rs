//! The crucial function of an iterate `P^j`, its slopes, the `Γ_n`-crucial
//! curvature (closed-form weights and the Laplacian identity), ball masses
//! and barycenters.

use std::collections::BTreeSet;
use std::fmt;

use crate::berkline::{Ball, Direction};
use crate::error::{check, Error, Result};
use crate::polydyn::Poly;
use crate::trucco_tree::{germ_slope, DynTree, TreeFamily, INFINITY, TOP};
use crate::valfield::Q;

pub use crate::trucco_tree::TreeMeasure;

fn zero() -> Q {
    Q::from_integer(0)
}

/// `D = d^j`.
pub fn iterate_degree(poly: &Poly, j: usize) -> Result<i64> {
    (poly.degree() as i64)
        .checked_pow(j as u32)
        .ok_or(Error::DegreeBoundExceeded { degree: usize::MAX, bound: i64::MAX as usize })
}

/// `Crucial_{P^j}(·) - Crucial_{P^j}(ξ₀)` through the difference formula.
/// With `ξ₀ = ξ_g` this is the crucial function itself.
#[derive(Clone, Debug)]
pub struct CrucialFn {
    poly: Poly,
    j: usize,
    base: Ball,
    fiber: Vec<(Ball, u64)>,
    dm1: Q,
}

impl CrucialFn {
    /// Uses the fiber `(P^j)^{-1}(ξ₀)` computed by pullback.
    pub fn new(poly: &Poly, j: usize, base: &Ball) -> Result<CrucialFn> {
        let fiber = poly.iterate_fiber(j, base)?.into_iter().map(|e| (e.point, e.local_degree)).collect();
        CrucialFn::with_fiber(poly, j, base, fiber)
    }

    /// The absolute crucial function (base `ξ_g`).
    pub fn absolute(poly: &Poly, j: usize) -> Result<CrucialFn> {
        CrucialFn::new(poly, j, &Ball::gauss(&poly.base_stage()))
    }

    /// Base `ξ_B`, whose fiber under `P^j` is the level set `L_j`.
    pub fn at_base(fam: &mut TreeFamily, j: usize) -> Result<CrucialFn> {
        let base = fam.base().ball.clone();
        let fiber = fam.level(j)?.iter().map(|lp| (lp.point.clone(), lp.degree)).collect();
        CrucialFn::with_fiber(&fam.poly().clone(), j, &base, fiber)
    }

    pub fn with_fiber(poly: &Poly, j: usize, base: &Ball, fiber: Vec<(Ball, u64)>) -> Result<CrucialFn> {
        let d = iterate_degree(poly, j)?;
        let total: u64 = fiber.iter().map(|x| x.1).sum();
        check(total == d as u64, || format!("fiber of {base} under P^{j} has total degree {total}"))?;
        Ok(CrucialFn { poly: poly.clone(), j, base: base.clone(), fiber, dm1: Q::from_integer(d - 1) })
    }

    pub fn base(&self) -> &Ball {
        &self.base
    }

    pub fn iterate(&self) -> usize {
        self.j
    }

    /// `Crucial(ξ) - Crucial(ξ₀)`.
    pub fn value(&self, xi: &Ball) -> Result<Q> {
        let two = Q::from_integer(2);
        let (img, _) = self.poly.image_iter(xi, self.j)?;
        let m = Ball::meet(&img, xi, &self.base)?;
        let mut integral = zero();
        for (eta, k) in &self.fiber {
            let w = Ball::meet(xi, eta, &self.base)?;
            integral += self.base.rho(&w)? * Q::from_integer(*k as i64);
        }
        Ok(xi.rho(&self.base)? / two + (xi.rho(&m)? - integral) / self.dm1)
    }

    /// One-sided derivative `d_v Crucial` at the base of `dir`, probing from
    /// distance `reach` inward.
    pub fn slope(&self, dir: &Direction, reach: Q) -> Result<Q> {
        let here = &dir.base;
        let f0 = self.value(here)?;
        let target = dir.probe(reach)?;
        germ_slope(&|b: &Ball| self.value(b), here, f0, &target, reach)
    }
}

/// `Crucial_{P^j}(ξ) - Crucial_{P^j}(ξ₀)`.
pub fn crucial_diff(poly: &Poly, j: usize, xi: &Ball, xi0: &Ball) -> Result<Q> {
    CrucialFn::new(poly, j, xi0)?.value(xi)
}

/// Whether `P^j(ξ) ∈ (ξ, ∞)`.
fn maps_up(tree: &DynTree, j: usize, id: usize) -> Result<(bool, u64)> {
    let (img, deg) = tree.poly().image_iter(tree.ball(id), j)?;
    Ok((tree.ball(id).lt(&img)?, deg))
}

/// The curvature `ν_{P^j, Γ_n}` from the closed-form weights.
pub fn crucial_curvature(tree: &DynTree, j: usize) -> Result<TreeMeasure> {
    let dm1 = Q::from_integer(iterate_degree(tree.poly(), j)? - 1);
    let mut m = TreeMeasure::default();
    for id in tree.vertex_set() {
        if id == INFINITY {
            continue;
        }
        let v = tree.valency(id) as i64;
        let w = if v >= 2 {
            v - 2
        } else if tree.is_simple() {
            iterate_degree(tree.poly(), j)? - 1
        } else {
            match maps_up(tree, j, id)? {
                (true, deg) => deg as i64 - 1,
                (false, _) => -1,
            }
        };
        m.add(id, Q::from_integer(w) / dm1);
    }
    check(m.total() == Q::from_integer(1), || format!("crucial curvature has total mass {}", m.total()))?;
    Ok(m)
}

/// The curvature from `(D-1)ν = Δ(ξ ↦ ρ(ξ, P^j(ξ) ∧_{ξ₀} ξ)) + r_*((P^j)^*δ_{ξ₀} - δ_{ξ₀})`
/// with `ξ₀ = ξ_B`; `fiber` is `L_j` with the degrees of `P^j`.
pub fn crucial_curvature_oracle(tree: &DynTree, j: usize, fiber: &[(Ball, u64)]) -> Result<TreeMeasure> {
    let d = iterate_degree(tree.poly(), j)?;
    let base = tree.ball(TOP).clone();
    let poly = tree.poly();
    let f = |xi: &Ball| -> Result<Q> {
        let (img, _) = poly.image_iter(xi, j)?;
        xi.rho(&Ball::meet(&img, xi, &base)?)
    };
    let mut m = tree.laplacian_of(f)?;
    for (eta, k) in fiber {
        m.add(tree.retract_to_node(eta)?, Q::from_integer(*k as i64));
    }
    m.add(TOP, Q::from_integer(-1));
    Ok(m.scale(Q::from_integer(1) / Q::from_integer(d - 1)))
}

/// The oracle with the fiber taken from the family.
pub fn crucial_curvature_oracle_in(fam: &mut TreeFamily, tree: &DynTree, j: usize) -> Result<TreeMeasure> {
    let fiber: Vec<(Ball, u64)> = fam.level(j)?.iter().map(|lp| (lp.point.clone(), lp.degree)).collect();
    crucial_curvature_oracle(tree, j, &fiber)
}

/// `ν(U(v))` for the pushforward of a tree measure to `P¹`.
pub fn ball_mass(tree: &DynTree, nu: &TreeMeasure, dir: &Direction) -> Result<Q> {
    let mut s = zero();
    for (id, x) in nu.atoms() {
        let inside = if id == INFINITY { dir.is_up() } else { Ball::in_direction(dir, tree.ball(id))? };
        if inside {
            s += x;
        }
    }
    Ok(s)
}

/// Mass of the closed ball below `ξ`.
pub fn closed_ball_mass(tree: &DynTree, nu: &TreeMeasure, xi: &Ball) -> Result<Q> {
    let mut s = zero();
    for (id, x) in nu.atoms() {
        if id != INFINITY && tree.ball(id).leq(xi)? {
            s += x;
        }
    }
    Ok(s)
}

/// The closed-ball mass predicted for a crucial curvature at a point of
/// `Γ_n \ {∞}`: `(deg_ξ(P^j)-1)/(D-1)` when `P^j(ξ) ∈ (ξ, ∞)`, else `-1/(D-1)`.
pub fn closed_ball_mass_formula(poly: &Poly, j: usize, xi: &Ball) -> Result<Q> {
    let dm1 = Q::from_integer(iterate_degree(poly, j)? - 1);
    let (img, deg) = poly.image_iter(xi, j)?;
    Ok(if xi.lt(&img)? { Q::from_integer(deg as i64 - 1) / dm1 } else { Q::from_integer(-1) / dm1 })
}

/// `Z_{j,n}`: ends of `Γ_n` where `P^j` is locally injective and moves up.
pub fn z_set(tree: &DynTree, j: usize) -> Result<Vec<usize>> {
    if tree.is_simple() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for &(id, _) in tree.leaves() {
        if let (true, 1) = maps_up(tree, j, id)? {
            out.push(id);
        }
    }
    Ok(out)
}

/// Tree directions at a node: toward each neighbor.
pub fn tree_directions(tree: &DynTree, id: usize) -> Result<Vec<(usize, Direction)>> {
    let here = tree.ball(id);
    let mut out = Vec::new();
    for w in tree.neighbors(id) {
        let dir = if w == INFINITY || tree.parent(id) == Some(w) {
            Direction::up(here)
        } else {
            here.direction_to(tree.ball(w))?
        };
        out.push((w, dir));
    }
    Ok(out)
}

/// The barycenter `BC_Γ(ν)` of a measure of total mass 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BarycenterResult {
    Singleton(Ball),
    /// Closed segment; the first end is the one farther from `∞`.
    Segment(Ball, Ball),
}

impl BarycenterResult {
    pub fn is_singleton(&self) -> bool {
        matches!(self, BarycenterResult::Singleton(_))
    }

    pub fn ends(&self) -> Vec<&Ball> {
        match self {
            BarycenterResult::Singleton(a) => vec![a],
            BarycenterResult::Segment(a, b) => vec![a, b],
        }
    }

    /// Whether `ξ` lies in the barycenter.
    pub fn contains(&self, xi: &Ball) -> Result<bool> {
        match self {
            BarycenterResult::Singleton(a) => Ok(a == xi),
            BarycenterResult::Segment(a, b) => Ok(xi.rho(a)? + xi.rho(b)? == a.rho(b)?),
        }
    }

    /// Whether this set is contained in `other`.
    pub fn subset_of(&self, other: &BarycenterResult) -> Result<bool> {
        for e in self.ends() {
            if !other.contains(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Hausdorff distance between two barycenters (both segments or points).
    pub fn hausdorff(&self, other: &BarycenterResult) -> Result<Q> {
        let one_sided = |x: &BarycenterResult, y: &BarycenterResult| -> Result<Q> {
            let mut worst = zero();
            for e in x.ends() {
                worst = worst.max(y.distance_to(e)?);
            }
            Ok(worst)
        };
        Ok(one_sided(self, other)?.max(one_sided(other, self)?))
    }

    /// Distance from `ξ` to the set.
    pub fn distance_to(&self, xi: &Ball) -> Result<Q> {
        match self {
            BarycenterResult::Singleton(a) => xi.rho(a),
            BarycenterResult::Segment(a, b) => {
                let m = Ball::meet(a, b, xi)?;
                xi.rho(&m)
            }
        }
    }
}

impl fmt::Display for BarycenterResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BarycenterResult::Singleton(a) => write!(f, "{{{a}}}"),
            BarycenterResult::Segment(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

/// Masses of the subtrees hanging below each node.
fn subtree_masses(tree: &DynTree, nu: &TreeMeasure) -> Vec<Q> {
    let mut sub = vec![zero(); tree.len()];
    let mut order = tree.subtree(INFINITY);
    order.reverse();
    for id in order {
        let mut s = nu.mass_at(id);
        for &c in tree.children(id) {
            s += sub[c];
        }
        sub[id] = s;
    }
    sub
}

/// Exact barycenter by descent from `ξ_B` followed by extension along edges
/// carrying exactly half the mass.
pub fn barycenter(tree: &DynTree, nu: &TreeMeasure) -> Result<BarycenterResult> {
    let one = Q::from_integer(1);
    let half = Q::new(1, 2);
    check(nu.total() == one, || format!("barycenter of a measure of mass {}", nu.total()))?;
    let sub = subtree_masses(tree, nu);
    let crossing = |from: usize, to: usize| -> Q {
        if tree.parent(from) == Some(to) {
            one - sub[from]
        } else {
            sub[to]
        }
    };
    let mut u = TOP;
    loop {
        let heavy: Vec<usize> = tree.neighbors(u).into_iter().filter(|&w| crossing(u, w) > half).collect();
        match heavy.as_slice() {
            [] => break,
            [w] if *w != INFINITY => u = *w,
            _ => return Err(Error::CheckFailed(format!("no descent from {}", tree.point(u)))),
        }
    }
    let mut set = BTreeSet::from([u]);
    let mut stack = vec![u];
    while let Some(x) = stack.pop() {
        for w in tree.neighbors(x) {
            if !set.contains(&w) && crossing(x, w) == half {
                if w == INFINITY {
                    return Err(Error::CheckFailed("barycenter reaches infinity".into()));
                }
                set.insert(w);
                stack.push(w);
            }
        }
    }
    let ends: Vec<usize> =
        set.iter().copied().filter(|&x| tree.neighbors(x).iter().filter(|w| set.contains(w)).count() <= 1).collect();
    match ends.as_slice() {
        [a] => Ok(BarycenterResult::Singleton(tree.ball(*a).clone())),
        [a, b] => {
            let (a, b) = (tree.ball(*a).clone(), tree.ball(*b).clone());
            if b.lt(&a)? || (!a.lt(&b)? && b.key() < a.key()) {
                Ok(BarycenterResult::Segment(b, a))
            } else {
                Ok(BarycenterResult::Segment(a, b))
            }
        }
        _ => Err(Error::CheckFailed(format!("barycenter is not a segment ({} ends)", ends.len()))),
    }
}

/// Jordan decomposition `ν = ν⁺ - ν⁻`.
pub fn total_variation_parts(nu: &TreeMeasure) -> (TreeMeasure, TreeMeasure) {
    let pos = TreeMeasure::from_atoms(nu.atoms().filter(|a| a.1 > zero()));
    let neg = TreeMeasure::from_atoms(nu.atoms().filter(|a| a.1 < zero()).map(|(i, x)| (i, -x)));
    (pos, neg)
}

/// `|ν| / |ν|(Γ)`.
pub fn averaged_total_variation(nu: &TreeMeasure) -> TreeMeasure {
    let (pos, neg) = total_variation_parts(nu);
    let abs = pos.plus(&neg);
    let t = abs.total();
    abs.scale(Q::from_integer(1) / t)
}

/// Checks `d_v Crucial = 1/2 - ν(U(v))` at every node and tree direction.
pub fn check_slope_formula(tree: &DynTree, nu: &TreeMeasure, cf: &CrucialFn) -> Result<usize> {
    let mut count = 0;
    for id in 1..tree.len() {
        for (w, dir) in tree_directions(tree, id)? {
            let reach = match w {
                INFINITY => Q::from_integer(1),
                _ => tree.ball(id).rho(tree.ball(w))?,
            };
            let s = cf.slope(&dir, reach)?;
            let m = ball_mass(tree, nu, &dir)?;
            check(s == Q::new(1, 2) - m, || format!("slope {s} vs mass {m} at {dir}"))?;
            count += 1;
        }
    }
    Ok(count)
}

/// The barycenter of `ν_{P^j, Γ_n}`.
pub fn curvature_barycenter(tree: &DynTree, j: usize) -> Result<BarycenterResult> {
    barycenter(tree, &crucial_curvature(tree, j)?)
}
