use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_integer::Integer;
use num_rational::Rational64;

/// Exact rationals; every valuation, radius and distance is one of these.
pub type Q = Rational64;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Renders a rational as `a` or `a/b`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `a`, `-a`, `a/b`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().ok()?;
        let b: i64 = b.trim().parse().ok()?;
        if b == 0 {
            return None;
        }
        Some(Q::new(a, b))
    } else {
        s.parse::<i64>().ok().map(Q::from_integer)
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub(crate) fn ceil_q(x: &Q) -> i64 {
    x.ceil().to_integer()
}

pub(crate) fn floor_q(x: &Q) -> i64 {
    x.floor().to_integer()
}

pub(crate) fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// A valuation: an exact rational or `+∞` (the valuation of zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValQ {
    Fin(Q),
    Inf,
}

impl ValQ {
    pub fn is_inf(&self) -> bool {
        matches!(self, ValQ::Inf)
    }

    pub fn fin(&self) -> Option<Q> {
        match self {
            ValQ::Fin(x) => Some(*x),
            ValQ::Inf => None,
        }
    }
}

impl PartialOrd for ValQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValQ {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValQ::Inf, ValQ::Inf) => Ordering::Equal,
            (ValQ::Inf, _) => Ordering::Greater,
            (_, ValQ::Inf) => Ordering::Less,
            (ValQ::Fin(a), ValQ::Fin(b)) => a.cmp(b),
        }
    }
}

impl Add for ValQ {
    type Output = ValQ;
    fn add(self, rhs: ValQ) -> ValQ {
        match (self, rhs) {
            (ValQ::Fin(a), ValQ::Fin(b)) => ValQ::Fin(a + b),
            _ => ValQ::Inf,
        }
    }
}

impl From<Q> for ValQ {
    fn from(x: Q) -> Self {
        ValQ::Fin(x)
    }
}

impl fmt::Display for ValQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValQ::Fin(x) => write!(f, "{}", fmt_q(x)),
            ValQ::Inf => write!(f, "inf"),
        }
    }
}

/// What is known about the valuation of a finite-precision scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    /// The valuation is exactly this value.
    Exact(Q),
    /// Every known digit vanishes; the valuation is at least this value.
    AtLeast(Q),
    /// The scalar is the exact zero.
    Inf,
}

impl Val {
    pub fn exact(&self) -> Option<Q> {
        match self {
            Val::Exact(x) => Some(*x),
            _ => None,
        }
    }

    /// A lower bound for the valuation.
    pub fn lower(&self) -> ValQ {
        match self {
            Val::Exact(x) | Val::AtLeast(x) => ValQ::Fin(*x),
            Val::Inf => ValQ::Inf,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Val::Exact(_))
    }
}
