//! The Berkovich line as an ordered metric tree.
//!
//! Type II points are closed balls `B(a, p^-rv)`; the center is stored
//! truncated below `rv` and rewritten in its smallest stage, so equal balls
//! have equal keys.  Distances are rationals in units of `log p`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::valfield::scalar::ScalarKey;
use crate::valfield::valq::floor_q;
use crate::valfield::{format_exact, format_scalar, Scalar, Stage, Val, ValQ, Q};

/// `v(x) >= r`, failing when the known digits cannot decide.
pub fn val_ge(x: &Scalar, r: Q) -> Result<bool> {
    match x.val() {
        Val::Inf => Ok(true),
        Val::Exact(v) => Ok(v >= r),
        Val::AtLeast(b) => {
            if b >= r {
                Ok(true)
            } else {
                Err(Error::PrecisionExhausted(format!("cannot decide v(x) >= {r}: only v(x) >= {b} is known")))
            }
        }
    }
}

/// `v(x)` capped at `cap`: exact below the cap, `cap` when `v(x) >= cap`.
pub fn val_min(x: &Scalar, cap: Q) -> Result<Q> {
    match x.val() {
        Val::Inf => Ok(cap),
        Val::Exact(v) => Ok(v.min(cap)),
        Val::AtLeast(b) => {
            if b >= cap {
                Ok(cap)
            } else {
                Err(Error::PrecisionExhausted(format!("cannot compare v(x) with {cap}: only v(x) >= {b} is known")))
            }
        }
    }
}

/// Keeps the digits of `x` of valuation `<= r` (the residue class of `x`
/// in the open ball of radius valuation `r`).
fn truncate_incl(x: &Scalar, r: Q) -> Result<Scalar> {
    let e = x.stage().ramification() as i64;
    let b = floor_q(&(r * Q::from_integer(e))) + 1;
    x.truncate(Q::new(b, e))
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BallKey {
    pub rv: Q,
    pub center: ScalarKey,
}

/// A type II point `B(center, p^-rv)`.
#[derive(Clone)]
pub struct Ball {
    center: Scalar,
    rv: Q,
    key: BallKey,
}

impl PartialEq for Ball {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Ball {}

impl Hash for Ball {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state)
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ball {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", format_exact(&self.center), crate::valfield::fmt_q(&self.rv))
    }
}

impl Ball {
    pub fn new(center: &Scalar, rv: Q) -> Result<Ball> {
        let c = center.truncate(rv)?.minimize();
        let key = BallKey { rv, center: c.key() };
        Ok(Ball { center: c, rv, key })
    }

    /// The Gauss point `B(0, 1)`.
    pub fn gauss(stage: &Stage) -> Ball {
        Ball::new(&Scalar::zero(stage), Q::from_integer(0)).expect("zero center")
    }

    pub fn center(&self) -> &Scalar {
        &self.center
    }

    pub fn rv(&self) -> Q {
        self.rv
    }

    pub fn key(&self) -> &BallKey {
        &self.key
    }

    /// `self ⪯ other`: the disk of `self` lies in the disk of `other`.
    pub fn leq(&self, other: &Ball) -> Result<bool> {
        if self.rv < other.rv {
            return Ok(false);
        }
        val_ge(&(&self.center - &other.center), other.rv)
    }

    pub fn lt(&self, other: &Ball) -> Result<bool> {
        Ok(self != other && self.leq(other)?)
    }

    pub fn contains_scalar(&self, x: &Scalar) -> Result<bool> {
        val_ge(&(x - &self.center), self.rv)
    }

    /// Least upper bound `ξ₁ ∧_∞ ξ₂`.
    pub fn join(&self, other: &Ball) -> Result<Ball> {
        let m = self.rv.min(other.rv);
        let r = val_min(&(&self.center - &other.center), m)?;
        if r == self.rv {
            return Ok(self.clone());
        }
        if r == other.rv {
            return Ok(other.clone());
        }
        Ball::new(&self.center, r)
    }

    /// Hyperbolic distance.
    pub fn rho(&self, other: &Ball) -> Result<Q> {
        let j = self.join(other)?;
        Ok(self.rv + other.rv - j.rv * Q::from_integer(2))
    }

    /// The point at distance `t >= 0` above `self` on `[self, ∞)`.
    pub fn up(&self, t: Q) -> Ball {
        if t == Q::from_integer(0) {
            return self.clone();
        }
        Ball::new(&self.center, self.rv - t).expect("coarser truncation")
    }

    /// The point at distance `t` from `self` on the segment `[self, target]`
    /// (clamped to the segment).
    pub fn toward(&self, target: &Ball, t: Q) -> Result<Ball> {
        let j = self.join(target)?;
        let up_len = self.rv - j.rv;
        if t <= up_len {
            return Ok(self.up(t));
        }
        let down = (t - up_len).min(target.rv - j.rv);
        Ball::new(&target.center, j.rv + down)
    }

    /// Median of three points in the tree (`a ∧_base b`).
    pub fn meet(a: &Ball, b: &Ball, base: &Ball) -> Result<Ball> {
        let ab = a.join(b)?;
        let ac = a.join(base)?;
        let bc = b.join(base)?;
        let mut best = ab;
        for c in [ac, bc] {
            if c.rv > best.rv {
                best = c;
            }
        }
        Ok(best)
    }

    /// Direction at `self` containing `target` (which must differ from `self`).
    pub fn direction_to(&self, target: &Ball) -> Result<Direction> {
        if target.lt(self)? {
            let k = truncate_incl(&target.center, self.rv)?;
            Ok(Direction { base: self.clone(), kind: DirKind::Down(k.key()), witness: Some(k) })
        } else {
            Ok(Direction { base: self.clone(), kind: DirKind::Up, witness: None })
        }
    }

    /// Direction at `self` containing the classical point `x`.
    pub fn direction_to_scalar(&self, x: &Scalar) -> Result<Direction> {
        if self.contains_scalar(x)? {
            let k = truncate_incl(x, self.rv)?;
            Ok(Direction { base: self.clone(), kind: DirKind::Down(k.key()), witness: Some(k) })
        } else {
            Ok(Direction { base: self.clone(), kind: DirKind::Up, witness: None })
        }
    }

    /// Whether `eta` lies in the open component `U(dir)` of `P¹ \ {self}`.
    pub fn in_direction(dir: &Direction, eta: &Ball) -> Result<bool> {
        if *eta == dir.base {
            return Ok(false);
        }
        Ok(dir.base.direction_to(eta)?.kind == dir.kind)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum DirKind {
    Up,
    /// Residue class at the base, keyed by a center truncated at the base radius.
    Down(ScalarKey),
}

/// A tangent direction at a type II point.
#[derive(Clone, Debug)]
pub struct Direction {
    pub base: Ball,
    pub kind: DirKind,
    witness: Option<Scalar>,
}

impl PartialEq for Direction {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.kind == other.kind
    }
}

impl Eq for Direction {}

impl Direction {
    pub fn up(base: &Ball) -> Direction {
        Direction { base: base.clone(), kind: DirKind::Up, witness: None }
    }

    pub fn is_up(&self) -> bool {
        self.kind == DirKind::Up
    }

    /// A point of `U(self)` at distance `t` from the base.
    pub fn probe(&self, t: Q) -> Result<Ball> {
        match &self.witness {
            None => Ok(self.base.up(t)),
            Some(w) => Ball::new(w, self.base.rv + t),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "{} -> inf", self.base),
            Some(w) => write!(f, "{} -> {}", self.base, format_scalar(w)),
        }
    }
}

/// A point of the Berkovich line.
#[derive(Clone, Debug)]
pub enum BerkPoint {
    Finite(Scalar),
    Ball(Ball),
    Infinity,
}

impl PartialEq for BerkPoint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (BerkPoint::Infinity, BerkPoint::Infinity) => true,
            (BerkPoint::Ball(a), BerkPoint::Ball(b)) => a == b,
            (BerkPoint::Finite(x), BerkPoint::Finite(y)) => (x - y).is_approx_zero(),
            _ => false,
        }
    }
}

impl BerkPoint {
    /// A ball, normalized to a classical point when `rv = +∞`.
    pub fn ball(center: &Scalar, rv: ValQ) -> Result<BerkPoint> {
        match rv {
            ValQ::Inf => Ok(BerkPoint::Finite(center.clone())),
            ValQ::Fin(r) => Ok(BerkPoint::Ball(Ball::new(center, r)?)),
        }
    }

    pub fn as_ball(&self) -> Result<&Ball> {
        match self {
            BerkPoint::Ball(b) => Ok(b),
            _ => Err(Error::TypeIPoint),
        }
    }

    /// The order `⪯` with `∞` maximal.
    pub fn leq(&self, other: &BerkPoint) -> Result<bool> {
        match (self, other) {
            (_, BerkPoint::Infinity) => Ok(true),
            (BerkPoint::Infinity, _) => Ok(false),
            (BerkPoint::Finite(x), BerkPoint::Finite(y)) => Ok((x - y).is_approx_zero()),
            (BerkPoint::Ball(_), BerkPoint::Finite(_)) => Ok(false),
            (BerkPoint::Finite(x), BerkPoint::Ball(b)) => b.contains_scalar(x),
            (BerkPoint::Ball(a), BerkPoint::Ball(b)) => a.leq(b),
        }
    }

    /// Least upper bound `ξ₁ ∧_∞ ξ₂`.
    pub fn join_inf(&self, other: &BerkPoint) -> Result<BerkPoint> {
        match (self, other) {
            (BerkPoint::Infinity, _) | (_, BerkPoint::Infinity) => Ok(BerkPoint::Infinity),
            (BerkPoint::Ball(a), BerkPoint::Ball(b)) => Ok(BerkPoint::Ball(a.join(b)?)),
            (BerkPoint::Finite(x), BerkPoint::Ball(b)) | (BerkPoint::Ball(b), BerkPoint::Finite(x)) => {
                let r = val_min(&(x - b.center()), b.rv())?;
                Ok(BerkPoint::Ball(Ball::new(b.center(), r)?))
            }
            (BerkPoint::Finite(x), BerkPoint::Finite(y)) => match (x - y).val() {
                Val::Exact(v) => Ok(BerkPoint::Ball(Ball::new(x, v)?)),
                _ => Ok(self.clone()),
            },
        }
    }

    /// `ξ₁ ∧_{ξ₀} ξ₂`: the median of the three points.
    pub fn meet(a: &BerkPoint, b: &BerkPoint, base: &BerkPoint) -> Result<BerkPoint> {
        let cands = [a.join_inf(b)?, a.join_inf(base)?, b.join_inf(base)?];
        let mut best = cands[0].clone();
        for c in &cands[1..] {
            if c.leq(&best)? {
                best = c.clone();
            }
        }
        Ok(best)
    }

    pub fn rho(&self, other: &BerkPoint) -> Result<Q> {
        self.as_ball()?.rho(other.as_ball()?)
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerkPoint::Finite(x) => write!(f, "{}", format_scalar(x)),
            BerkPoint::Ball(b) => write!(f, "{b}"),
            BerkPoint::Infinity => write!(f, "inf"),
        }
    }
}
