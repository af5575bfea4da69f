//! Finite-precision elements of `W_u[Π]/(Π^e − p)`.
//!
//! A nonzero scalar is `Π^shift · u` where `u` is a unit given by `e` blocks
//! of level coordinates modulo `p^M`; `rel` counts the Π-adic digits of `u`
//! that are known.  Two special forms record the exact zero and an element
//! whose known digits all vanish.  Compatible uniformizers satisfy
//! `Π_E^(E/e) = Π_e`, so stages with different `e` embed into each other.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::tower::{addmod, inv_mod_u64, mulmod, submod, Level};
use super::valq::{ceil_q, lcm_u32, Val, Q};
use crate::error::{Error, Result};

/// A stage of the tower: an unramified level together with a ramification
/// index `e` (uniformizer `Π_e = p^(1/e)`).
#[derive(Clone)]
pub struct Stage {
    pub(crate) level: Arc<Level>,
    pub(crate) e: u32,
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stage(u={}, f={}, e={})", self.level.index, self.level.dim, self.e)
    }
}

impl PartialEq for Stage {
    fn eq(&self, other: &Self) -> bool {
        self.level.index == other.level.index && self.e == other.e
    }
}

impl Eq for Stage {}

impl Stage {
    pub fn new(level: Arc<Level>, e: u32) -> Stage {
        Stage { level, e }
    }

    pub fn level(&self) -> &Arc<Level> {
        &self.level
    }

    pub fn ramification(&self) -> u32 {
        self.e
    }

    pub fn residue_degree(&self) -> usize {
        self.level.dim
    }

    pub fn prime(&self) -> u64 {
        self.level.p
    }

    pub(crate) fn cap(&self) -> i64 {
        self.e as i64 * self.level.digits as i64
    }

    fn len(&self) -> usize {
        self.e as usize * self.level.dim
    }

    /// The smallest stage containing both.
    pub fn join(a: &Stage, b: &Stage) -> Stage {
        let level = if a.level.index >= b.level.index { a.level.clone() } else { b.level.clone() };
        Stage { level, e: lcm_u32(a.e, b.e) }
    }

    pub fn with_e(&self, e: u32) -> Stage {
        Stage { level: self.level.clone(), e }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Repr {
    Zero,
    /// Known to be divisible by `Π^abs`, nothing more.
    Small(i64),
    Unit {
        shift: i64,
        rel: i64,
        coords: Vec<u64>,
    },
}

/// An element of a finite tamely ramified extension of `Q_p`, to finite precision.
#[derive(Clone)]
pub struct Scalar {
    stage: Stage,
    repr: Repr,
}

/// Hashable canonical form of a scalar, used for ball keys.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ScalarKey {
    level: usize,
    e: u32,
    shift: i64,
    coords: Vec<u64>,
}

impl Scalar {
    pub fn zero(stage: &Stage) -> Scalar {
        Scalar { stage: stage.clone(), repr: Repr::Zero }
    }

    /// An element known only to be divisible by `Π^abs`.
    pub fn small(stage: &Stage, abs: i64) -> Scalar {
        Scalar { stage: stage.clone(), repr: Repr::Small(abs) }
    }

    pub fn one(stage: &Stage) -> Scalar {
        Self::pi_pow(stage, 0)
    }

    /// `Π_e^k`.
    pub fn pi_pow(stage: &Stage, k: i64) -> Scalar {
        let mut coords = vec![0u64; stage.len()];
        coords[0] = 1;
        Scalar { stage: stage.clone(), repr: Repr::Unit { shift: k, rel: stage.cap(), coords } }
    }

    /// `p^x` for a rational `x`, in the smallest ramified stage over `stage`
    /// that contains it.
    pub fn p_power(stage: &Stage, x: Q) -> Scalar {
        let e = lcm_u32(stage.e, *x.denom() as u32);
        let st = stage.with_e(e);
        Self::pi_pow(&st, (x * Q::from_integer(e as i64)).to_integer())
    }

    pub fn from_int(stage: &Stage, n: i64) -> Scalar {
        Self::from_bigrational(stage, &BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(stage: &Stage, x: &Q) -> Scalar {
        Self::from_bigrational(stage, &BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom())))
    }

    pub fn from_bigrational(stage: &Stage, x: &BigRational) -> Scalar {
        if x.is_zero() {
            return Self::zero(stage);
        }
        let lvl = &stage.level;
        let p = BigInt::from(lvl.p);
        let mut num = x.numer().clone();
        let mut den = x.denom().clone();
        let mut v: i64 = 0;
        while (&num % &p).is_zero() {
            num /= &p;
            v += 1;
        }
        while (&den % &p).is_zero() {
            den /= &p;
            v -= 1;
        }
        let pm = BigInt::from(lvl.pm);
        let n = num.mod_floor(&pm).to_u64().unwrap();
        let d = den.mod_floor(&pm).to_u64().unwrap();
        let u = mulmod(n, inv_mod_u64(d, lvl.pm).unwrap(), lvl.pm);
        let base = Stage { level: stage.level.clone(), e: 1 };
        let mut coords = vec![0u64; lvl.dim];
        coords[0] = u;
        let s = Scalar { stage: base.clone(), repr: Repr::Unit { shift: v, rel: base.cap(), coords } };
        s.coerce(stage)
    }

    /// A unit at shift 0 with the given level coordinates (entries < p^M).
    pub(crate) fn from_level_elem(stage: &Stage, elem: &[u64]) -> Scalar {
        let mut coords = vec![0u64; stage.len()];
        coords[..elem.len()].copy_from_slice(elem);
        normalize(stage, 0, stage.cap(), coords)
    }

    pub fn stage(&self) -> &Stage {
        &self.stage
    }

    pub fn prime(&self) -> u64 {
        self.stage.level.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// True when no nonzero digit is known (exact zero or unresolved).
    pub fn is_approx_zero(&self) -> bool {
        !matches!(self.repr, Repr::Unit { .. })
    }

    pub fn val(&self) -> Val {
        let e = self.stage.e as i64;
        match &self.repr {
            Repr::Zero => Val::Inf,
            Repr::Small(a) => Val::AtLeast(Q::new(*a, e)),
            Repr::Unit { shift, .. } => Val::Exact(Q::new(*shift, e)),
        }
    }

    /// Exact valuation, or a precision error if the scalar is unresolved.
    pub fn val_exact(&self) -> Result<Q> {
        match self.val() {
            Val::Exact(v) => Ok(v),
            Val::Inf => Err(Error::PrecisionExhausted("valuation of exact zero requested".into())),
            Val::AtLeast(v) => Err(Error::PrecisionExhausted(format!("valuation unresolved (at least {v})"))),
        }
    }

    /// Absolute precision in valuation units (`None` for the exact zero).
    pub fn precision(&self) -> Option<Q> {
        let e = self.stage.e as i64;
        match &self.repr {
            Repr::Zero => None,
            Repr::Small(a) => Some(Q::new(*a, e)),
            Repr::Unit { shift, rel, .. } => Some(Q::new(shift + rel, e)),
        }
    }

    /// Embeds into a finer stage (same chain, `e` dividing the target's).
    pub fn coerce(&self, target: &Stage) -> Scalar {
        if self.stage == *target {
            return self.clone();
        }
        assert!(target.level.index >= self.stage.level.index && target.e.is_multiple_of(self.stage.e));
        let g = (target.e / self.stage.e) as i64;
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Small(a) => Repr::Small(a * g),
            Repr::Unit { shift, rel, coords } => {
                let f_old = self.stage.level.dim;
                let f_new = target.level.dim;
                let mut out = vec![0u64; target.len()];
                for r in 0..self.stage.e as usize {
                    let nr = r * g as usize;
                    out[nr * f_new..nr * f_new + f_old].copy_from_slice(&coords[r * f_old..(r + 1) * f_old]);
                }
                Repr::Unit { shift: shift * g, rel: (rel * g).min(target.cap()), coords: out }
            }
        };
        Scalar { stage: target.clone(), repr }
    }

    pub fn inv(&self) -> Result<Scalar> {
        match &self.repr {
            Repr::Zero => Err(Error::DivisionByZero),
            Repr::Small(_) => Err(Error::PrecisionExhausted("inverse of an element with no known digit".into())),
            Repr::Unit { shift, rel, coords } => {
                let u = unit_inverse(&self.stage, coords)?;
                Ok(normalize(&self.stage, -shift, *rel, u))
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = Scalar::one(&self.stage);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Multiplication by `Π_e^k` in the scalar's own stage.
    pub fn mul_pi(&self, k: i64) -> Scalar {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Small(a) => Scalar::small(&self.stage, a + k),
            Repr::Unit { shift, rel, coords } => Scalar {
                stage: self.stage.clone(),
                repr: Repr::Unit { shift: shift + k, rel: *rel, coords: coords.clone() },
            },
        }
    }

    /// Image in the residue field of the scalar's level (coordinates mod p).
    pub fn residue(&self) -> Result<Vec<u64>> {
        let f = self.stage.level.dim;
        match &self.repr {
            Repr::Zero => Ok(vec![0; f]),
            Repr::Small(a) => {
                if *a > 0 {
                    Ok(vec![0; f])
                } else {
                    Err(Error::PrecisionExhausted("residue of an unresolved element".into()))
                }
            }
            Repr::Unit { shift, coords, .. } => {
                if *shift < 0 {
                    Err(Error::NegativeValuation)
                } else if *shift > 0 {
                    Ok(vec![0; f])
                } else {
                    Ok(coords[..f].iter().map(|c| c % self.stage.level.p).collect())
                }
            }
        }
    }

    /// Drops every digit of valuation `>= w`; the result is a finite digit
    /// expansion treated as known to full capacity.
    pub fn truncate(&self, w: Q) -> Result<Scalar> {
        let e = self.stage.e as i64;
        let b = ceil_q(&(w * Q::from_integer(e)));
        match &self.repr {
            Repr::Zero => Ok(self.clone()),
            Repr::Small(a) => {
                if *a >= b {
                    Ok(Scalar::zero(&self.stage))
                } else {
                    Err(Error::PrecisionExhausted(format!("truncation at {w} needs digits beyond the known precision")))
                }
            }
            Repr::Unit { shift, rel, coords } => {
                if b <= *shift {
                    return Ok(Scalar::zero(&self.stage));
                }
                if shift + rel < b {
                    return Err(Error::PrecisionExhausted(format!(
                        "truncation at {w} needs digits beyond the known precision"
                    )));
                }
                let mut c = coords.clone();
                mask(&self.stage, b - shift, &mut c);
                Ok(Scalar {
                    stage: self.stage.clone(),
                    repr: Repr::Unit { shift: *shift, rel: self.stage.cap(), coords: c },
                })
            }
        }
    }

    /// Nonzero digits as `(absolute Π-position, level coordinate index, digit)`.
    pub(crate) fn digits(&self) -> Vec<(i64, usize, u64)> {
        let mut out = Vec::new();
        if let Repr::Unit { shift, rel, coords } = &self.repr {
            let e = self.stage.e as i64;
            let f = self.stage.level.dim;
            let p = self.stage.level.p;
            for r in 0..e as usize {
                for i in 0..f {
                    let mut x = coords[r * f + i];
                    let mut k = 0i64;
                    while x > 0 {
                        let d = x % p;
                        let pos = r as i64 + e * k;
                        if d != 0 && pos < *rel {
                            out.push((shift + pos, i, d));
                        }
                        x /= p;
                        k += 1;
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Rewrites a finite digit expansion in the smallest stage containing it.
    pub fn minimize(&self) -> Scalar {
        let Repr::Unit { shift, .. } = &self.repr else {
            return self.clone();
        };
        let ds = self.digits();
        let e = self.stage.e as i64;
        let mut g = e;
        let mut max_i = 0usize;
        for (pos, i, _) in &ds {
            g = g.gcd(pos);
            max_i = max_i.max(*i);
        }
        if g == 0 {
            g = e;
        }
        let new_e = (e / g) as u32;
        let level = self.stage.level.smallest_containing(max_i);
        if new_e as i64 == e && level.index == self.stage.level.index {
            return self.clone();
        }
        let st = Stage { level, e: new_e };
        let f = st.level.dim;
        let ne = new_e as i64;
        let new_shift = shift / g;
        let mut coords = vec![0u64; st.len()];
        let pows = &st.level.pows;
        for (pos, i, d) in ds {
            let n = pos / g - new_shift;
            let r = n.rem_euclid(ne) as usize;
            let k = n.div_euclid(ne) as usize;
            if k < pows.len() - 1 {
                let idx = r * f + i;
                coords[idx] = addmod(coords[idx], mulmod(d, pows[k], st.level.pm), st.level.pm);
            }
        }
        normalize(&st, new_shift, st.cap(), coords)
    }

    /// Canonical key of a (truncated, minimized) scalar.
    pub fn key(&self) -> ScalarKey {
        let m = self.minimize();
        match &m.repr {
            Repr::Unit { shift, coords, .. } => {
                ScalarKey { level: m.stage.level.index, e: m.stage.e, shift: *shift, coords: coords.clone() }
            }
            _ => ScalarKey { level: 0, e: 1, shift: i64::MAX, coords: Vec::new() },
        }
    }

    /// For a scalar in `Q_p` (level 0, e = 1): the exact rational given by its
    /// known digits, i.e. `p^shift * u` with `0 <= u < p^rel`.
    pub fn digit_rational(&self) -> Option<BigRational> {
        if self.stage.level.dim != 1 || self.stage.e != 1 {
            return None;
        }
        match &self.repr {
            Repr::Zero | Repr::Small(_) => Some(BigRational::zero()),
            Repr::Unit { shift, coords, .. } => {
                let p = BigInt::from(self.stage.level.p);
                let u = BigRational::from_integer(BigInt::from(coords[0]));
                Some(if *shift >= 0 {
                    u * BigRational::from_integer(num_traits::pow(p, *shift as usize))
                } else {
                    u / BigRational::from_integer(num_traits::pow(p, (-shift) as usize))
                })
            }
        }
    }

    /// A small rational congruent to the scalar to its known precision, if
    /// one exists (rational reconstruction).
    pub fn small_rational(&self) -> Option<BigRational> {
        if self.stage.level.dim != 1 || self.stage.e != 1 {
            return None;
        }
        match &self.repr {
            Repr::Zero => Some(BigRational::zero()),
            Repr::Small(_) => None,
            Repr::Unit { shift, rel, coords } => {
                let modulus = (self.stage.level.p as i128).pow(*rel as u32);
                let (a, b) = rational_reconstruct(coords[0] as i128 % modulus, modulus)?;
                let p = BigInt::from(self.stage.level.p);
                let base = BigRational::new(BigInt::from(a), BigInt::from(b));
                Some(if *shift >= 0 {
                    base * BigRational::from_integer(num_traits::pow(p, *shift as usize))
                } else {
                    base / BigRational::from_integer(num_traits::pow(p, (-shift) as usize))
                })
            }
        }
    }

    pub(crate) fn unit_coords(&self) -> Option<(i64, i64, &[u64])> {
        match &self.repr {
            Repr::Unit { shift, rel, coords } => Some((*shift, *rel, coords)),
            _ => None,
        }
    }

    pub(crate) fn small_abs(&self) -> Option<i64> {
        match &self.repr {
            Repr::Small(a) => Some(*a),
            _ => None,
        }
    }

    pub fn neg(&self) -> Scalar {
        match &self.repr {
            Repr::Unit { shift, rel, coords } => {
                let pm = self.stage.level.pm;
                let c = coords.iter().map(|&x| submod(0, x, pm)).collect();
                normalize(&self.stage, *shift, *rel, c)
            }
            _ => self.clone(),
        }
    }
}

fn rational_reconstruct(x: i128, m: i128) -> Option<(i128, i128)> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m, x.rem_euclid(m));
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let (mut a, mut b) = (r1, t1);
    if b < 0 {
        a = -a;
        b = -b;
    }
    if num_integer::Integer::gcd(&a, &b) != 1 {
        return None;
    }
    Some((a, b))
}

fn vp(x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut x = x;
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    k
}

/// Zeroes every digit at relative Π-position `>= rel`.
fn mask(stage: &Stage, rel: i64, coords: &mut [u64]) {
    let e = stage.e as i64;
    let f = stage.level.dim;
    let m = stage.level.digits as i64;
    for r in 0..e {
        let kmax = if rel > r { ((rel - r + e - 1) / e).min(m) } else { 0 };
        if kmax < m {
            let modulus = stage.level.pows[kmax as usize];
            for c in &mut coords[r as usize * f..(r as usize + 1) * f] {
                *c %= modulus;
            }
        }
    }
}

pub(crate) fn normalize(stage: &Stage, shift: i64, rel: i64, mut coords: Vec<u64>) -> Scalar {
    let rel = rel.min(stage.cap());
    if rel <= 0 {
        return Scalar::small(stage, shift + rel.max(0));
    }
    mask(stage, rel, &mut coords);
    let e = stage.e as i64;
    let f = stage.level.dim;
    let p = stage.level.p;
    let m = stage.level.digits;
    let mut t = i64::MAX;
    for r in 0..e as usize {
        for i in 0..f {
            let c = coords[r * f + i];
            if c != 0 {
                t = t.min(r as i64 + e * vp(c, p, m) as i64);
            }
        }
    }
    if t == i64::MAX || t >= rel {
        return Scalar::small(stage, shift + rel);
    }
    if t == 0 {
        return Scalar { stage: stage.clone(), repr: Repr::Unit { shift, rel, coords } };
    }
    let pm = stage.level.pm;
    let pows = &stage.level.pows;
    let mut out = vec![0u64; coords.len()];
    for r in 0..e {
        let n = r - t;
        let qd = n.div_euclid(e);
        let s = n.rem_euclid(e) as usize;
        for i in 0..f {
            let x = coords[r as usize * f + i];
            if x == 0 {
                continue;
            }
            out[s * f + i] = if qd >= 0 { mulmod(x, pows[qd as usize], pm) } else { x / pows[(-qd) as usize] };
        }
    }
    Scalar { stage: stage.clone(), repr: Repr::Unit { shift: shift + t, rel: rel - t, coords: out } }
}

/// Product of two unit coordinate vectors in `W_u[Π]/(Π^e − p)` modulo `p^M`.
fn ring_mul(stage: &Stage, a: &[u64], b: &[u64]) -> Vec<u64> {
    let e = stage.e as usize;
    let f = stage.level.dim;
    let lvl = &stage.level;
    let pm = lvl.pm;
    if e == 1 && f == 1 {
        return vec![mulmod(a[0], b[0], pm)];
    }
    let mut acc = vec![0u64; (2 * e - 1) * f];
    for r1 in 0..e {
        let ab = &a[r1 * f..(r1 + 1) * f];
        if ab.iter().all(|&x| x == 0) {
            continue;
        }
        for r2 in 0..e {
            let bb = &b[r2 * f..(r2 + 1) * f];
            if bb.iter().all(|&x| x == 0) {
                continue;
            }
            lvl.mul_acc(&mut acc[(r1 + r2) * f..(r1 + r2 + 1) * f], ab, bb, pm);
        }
    }
    let p = lvl.p;
    for r in (e..2 * e - 1).rev() {
        for i in 0..f {
            let x = acc[r * f + i];
            if x != 0 {
                let idx = (r - e) * f + i;
                acc[idx] = addmod(acc[idx], mulmod(x, p, pm), pm);
            }
        }
    }
    acc.truncate(e * f);
    acc
}

fn unit_inverse(stage: &Stage, u: &[u64]) -> Result<Vec<u64>> {
    let f = stage.level.dim;
    let r0 = stage.level.res_inv(&u[..f])?;
    let mut x = vec![0u64; stage.len()];
    x[..f].copy_from_slice(&r0);
    let pm = stage.level.pm;
    let mut prec = 1i64;
    while prec < stage.cap() {
        let ux = ring_mul(stage, u, &x);
        let mut two_minus: Vec<u64> = ux.iter().map(|&c| submod(0, c, pm)).collect();
        two_minus[0] = addmod(two_minus[0], 2, pm);
        x = ring_mul(stage, &x, &two_minus);
        prec *= 2;
    }
    Ok(x)
}

fn add_impl(a: &Scalar, b: &Scalar) -> Scalar {
    let st = if a.stage == b.stage { a.stage.clone() } else { Stage::join(&a.stage, &b.stage) };
    let a = a.coerce(&st);
    let b = b.coerce(&st);
    match (&a.repr, &b.repr) {
        (Repr::Zero, _) => b,
        (_, Repr::Zero) => a,
        (Repr::Small(x), Repr::Small(y)) => Scalar::small(&st, *x.min(y)),
        (Repr::Small(x), Repr::Unit { shift, rel, coords }) | (Repr::Unit { shift, rel, coords }, Repr::Small(x)) => {
            if *x <= *shift {
                Scalar::small(&st, *x)
            } else {
                normalize(&st, *shift, (*rel).min(x - shift), coords.clone())
            }
        }
        (Repr::Unit { shift: sa, rel: ra, coords: ca }, Repr::Unit { shift: sb, rel: rb, coords: cb }) => {
            let (sa, ra, ca, sb, rb, cb) =
                if sa <= sb { (*sa, *ra, ca, *sb, *rb, cb) } else { (*sb, *rb, cb, *sa, *ra, ca) };
            let abs = (sa + ra).min(sb + rb);
            if abs <= sa {
                return Scalar::small(&st, abs);
            }
            let e = st.e as i64;
            let f = st.level.dim;
            let m = st.level.digits as i64;
            let pm = st.level.pm;
            let k = sb - sa;
            let mut out = ca.clone();
            for r in 0..e {
                let n = r + k;
                let qd = n / e;
                if qd >= m {
                    continue;
                }
                let s = (n % e) as usize;
                let fac = st.level.pows[qd as usize];
                for i in 0..f {
                    let x = cb[r as usize * f + i];
                    if x != 0 {
                        let idx = s * f + i;
                        out[idx] = addmod(out[idx], mulmod(x, fac, pm), pm);
                    }
                }
            }
            normalize(&st, sa, abs - sa, out)
        }
    }
}

fn mul_impl(a: &Scalar, b: &Scalar) -> Scalar {
    let st = if a.stage == b.stage { a.stage.clone() } else { Stage::join(&a.stage, &b.stage) };
    let a = a.coerce(&st);
    let b = b.coerce(&st);
    match (&a.repr, &b.repr) {
        (Repr::Zero, _) | (_, Repr::Zero) => Scalar::zero(&st),
        (Repr::Small(x), Repr::Small(y)) => Scalar::small(&st, x + y),
        (Repr::Small(x), Repr::Unit { shift, .. }) | (Repr::Unit { shift, .. }, Repr::Small(x)) => {
            Scalar::small(&st, x + shift)
        }
        (Repr::Unit { shift: sa, rel: ra, coords: ca }, Repr::Unit { shift: sb, rel: rb, coords: cb }) => {
            let c = ring_mul(&st, ca, cb);
            normalize(&st, sa + sb, (*ra).min(*rb), c)
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        add_impl(self, rhs)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        add_impl(self, &rhs.neg())
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        mul_impl(self, rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        add_impl(&self, &rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        mul_impl(&self, &rhs)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::literal::format_scalar(self))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::literal::format_scalar(self))
    }
}

/// Multiplies by a rational integer without allocating a separate stage.
pub(crate) fn scale_int(a: &Scalar, k: i64) -> Scalar {
    if k == 1 {
        return a.clone();
    }
    a * &Scalar::from_int(&a.stage, k)
}

pub(crate) fn bigrational_to_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub(crate) fn bigrational_small(x: &BigRational, limit: u64) -> bool {
    let l = BigInt::from(limit);
    x.numer().abs() <= l && x.denom().abs() <= l
}
