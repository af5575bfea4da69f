//! Scalar literals.
//!
//! Accepted input forms:
//! * `num/den` or `num`: a rational number embedded in `Q_p`;
//! * `p^(a/b)*u`, `p^k*u`, `p^(a/b)`: a rational power of `p` times a rational;
//! * `[u=U,e=E] d@N + (d0,d1,..)@N + ...`: a finite digit expansion
//!   `Σ d·Π_E^N` over level `U` of the tower (the form printed for scalars
//!   outside `Q_p`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::scalar::{bigrational_small, bigrational_to_string, Scalar, Stage};
use super::tower::Tower;
use super::valq::{fmt_q, Q};
use crate::error::{Error, Result};

fn parse_bigrational(s: &str) -> Result<BigRational> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
    let bad = || Error::Parse(format!("malformed rational literal '{s}'"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        Ok(BigRational::new(a, b))
    } else {
        let a: BigInt = s.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(a))
    }
}

fn parse_exponent(s: &str) -> Result<Q> {
    let t = s.trim();
    let inner = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t);
    super::valq::parse_q(inner).ok_or_else(|| Error::Parse(format!("malformed exponent '{s}'")))
}

/// Splits on `*` outside parentheses.
fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parses a scalar literal into the base stage of `tower` (or the ramified
/// stage a rational power of `p` requires).
pub fn parse_scalar(tower: &Tower, s: &str) -> Result<Scalar> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar literal".into()));
    }
    if s.starts_with('[') {
        return parse_digit_literal(tower, s);
    }
    let base = Stage::new(tower.base(), 1);
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s.strip_prefix('+').unwrap_or(s).trim()),
    };
    let mut acc = Scalar::one(&base);
    let mut rational = BigRational::one();
    for fac in split_factors(body) {
        let fac = fac.trim();
        if let Some(exp) = fac.strip_prefix("p^") {
            let x = parse_exponent(exp)?;
            acc = &acc * &Scalar::p_power(&base, x);
        } else if fac == "p" {
            acc = &acc * &Scalar::p_power(&base, Q::from_integer(1));
        } else {
            rational *= parse_bigrational(fac)?;
        }
    }
    if neg {
        rational = -rational;
    }
    Ok(&acc * &Scalar::from_bigrational(&base, &rational))
}

/// Rational value of a literal, when it is one (used for exact resultants).
pub fn literal_rational(tower: &Tower, s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.starts_with('[') {
        return None;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s.strip_prefix('+').unwrap_or(s).trim()),
    };
    let mut r = BigRational::one();
    let p = BigInt::from(tower.prime());
    for fac in split_factors(body) {
        let fac = fac.trim();
        if let Some(exp) = fac.strip_prefix("p^") {
            let x = parse_exponent(exp).ok()?;
            if !x.is_integer() {
                return None;
            }
            let k = x.to_integer();
            let pk = BigRational::from_integer(num_traits::pow(p.clone(), k.unsigned_abs() as usize));
            r = if k >= 0 { r * pk } else { r / pk };
        } else if fac == "p" {
            r *= BigRational::from_integer(p.clone());
        } else {
            r *= parse_bigrational(fac).ok()?;
        }
    }
    Some(if neg { -r } else { r })
}

fn parse_digit_literal(tower: &Tower, s: &str) -> Result<Scalar> {
    let bad = |m: &str| Error::Parse(format!("malformed digit literal '{s}': {m}"));
    let close = s.find(']').ok_or_else(|| bad("missing ']'"))?;
    let header = &s[1..close];
    let mut u = 0usize;
    let mut e = 1u32;
    for kv in header.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad("header"))?;
        match k.trim() {
            "u" => u = v.trim().parse().map_err(|_| bad("level"))?,
            "e" => e = v.trim().parse().map_err(|_| bad("ramification"))?,
            _ => return Err(bad("header key")),
        }
    }
    let level = tower.level(u).ok_or_else(|| bad("unknown level"))?;
    if e == 0 || (e as u64).is_multiple_of(tower.prime()) {
        return Err(bad("ramification index"));
    }
    let st = Stage::new(level.clone(), e);
    let mut acc = Scalar::zero(&st);
    let body = s[close + 1..].trim();
    if body == "0" || body.is_empty() {
        return Ok(acc);
    }
    for term in body.split('+') {
        let (d, n) = term.trim().split_once('@').ok_or_else(|| bad("term"))?;
        let n: i64 = n.trim().parse().map_err(|_| bad("position"))?;
        let d = d.trim();
        let digits: Vec<u64> = if let Some(inner) = d.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
            inner.split(',').map(|x| x.trim().parse::<u64>().map_err(|_| bad("digit"))).collect::<Result<_>>()?
        } else {
            vec![d.parse::<u64>().map_err(|_| bad("digit"))?]
        };
        if digits.len() > level.dim || digits.iter().any(|&x| x >= tower.prime()) {
            return Err(bad("digit vector"));
        }
        let mut elem = vec![0u64; level.dim];
        elem[..digits.len()].copy_from_slice(&digits);
        if elem.iter().all(|&x| x == 0) {
            continue;
        }
        let t = Scalar::from_level_elem(&st, &elem).mul_pi(n);
        acc = &acc + &t;
    }
    Ok(acc)
}

fn format_digits(s: &Scalar) -> String {
    let st = s.stage();
    let mut terms = Vec::new();
    for (pos, i, d) in s.digits() {
        let _ = i;
        let _ = d;
        terms.push(pos);
    }
    terms.dedup();
    let f = st.level().residue_degree();
    let ds = s.digits();
    let mut out = Vec::new();
    for pos in terms {
        let mut v = vec![0u64; f];
        for (q, i, d) in &ds {
            if *q == pos {
                v[*i] = *d;
            }
        }
        let last = v.iter().rposition(|&x| x != 0).unwrap_or(0);
        let digit = if last == 0 {
            format!("{}", v[0])
        } else {
            format!("({})", v[..=last].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        };
        out.push(format!("{digit}@{pos}"));
    }
    format!(
        "[u={},e={}] {}",
        st.level().index(),
        st.ramification(),
        if out.is_empty() { "0".to_string() } else { out.join(" + ") }
    )
}

/// Human-oriented rendering: small rationals when recognizable, otherwise
/// the digit literal, with the precision bound for unresolved values.
pub fn format_scalar(s: &Scalar) -> String {
    if s.is_exact_zero() {
        return "0".into();
    }
    if let Some(a) = s.small_abs() {
        let e = s.stage().ramification() as i64;
        return format!("O(p^({}))", fmt_q(&Q::new(a, e)));
    }
    if let Some(r) = s.small_rational() {
        if bigrational_small(&r, 1_000_000) {
            return bigrational_to_string(&r);
        }
    }
    if let Some(r) = s.digit_rational() {
        return bigrational_to_string(&r);
    }
    format_digits(&s.minimize())
}

/// Exact rendering of a finite digit expansion (a truncated center).
pub fn format_exact(s: &Scalar) -> String {
    if s.is_approx_zero() {
        return "0".into();
    }
    let m = s.minimize();
    match m.digit_rational() {
        Some(r) => bigrational_to_string(&r),
        None => format_digits(&m),
    }
}
