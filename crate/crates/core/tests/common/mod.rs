#![allow(dead_code)]

use std::sync::Arc;

use berktree::berkline::Ball;
use berktree::polydyn::Poly;
use berktree::valfield::{parse_scalar, Tower, Q};

pub fn tower(p: u64) -> Arc<Tower> {
    Tower::new(p, None).unwrap()
}

pub fn ball(t: &Tower, c: &str, rv: Q) -> Ball {
    Ball::new(&parse_scalar(t, c).unwrap(), rv).unwrap()
}

/// `(d-1) p z^d - d z^(d-1)`.
pub fn faber_family(t: &Arc<Tower>, d: usize) -> Poly {
    let p = t.prime();
    Poly::parse(t, &format!("{}z^{d} - {d}z^{}", (d as u64 - 1) * p, d - 1)).unwrap()
}

/// `z^4/(4p^2) - (p+1) z^3/(3p^3) + z^2/(2p^3)`.
pub fn quartic_example(t: &Arc<Tower>) -> Poly {
    let p = t.prime();
    let s = format!("1/{}*z^4 - {}/{}*z^3 + 1/{}*z^2", 4 * p * p, p + 1, 3 * p * p * p, 2 * p * p * p);
    Poly::parse(t, &s).unwrap()
}

/// `p·a z^d + b z^(d-1) + c z` with units `a`, `b`: a tame nonsimple polynomial
/// whose base point is `B(0, -1)`.
pub fn scaled_poly(t: &Arc<Tower>, d: usize, a: i64, b: i64, c: i64) -> Poly {
    let p = t.prime() as i64;
    let mut coeffs = vec!["0".to_string(); d + 1];
    coeffs[d] = (a * p).to_string();
    coeffs[d - 1] = b.to_string();
    coeffs[1] = (c * p).to_string();
    Poly::parse(t, &coeffs.join(",")).unwrap()
}

pub fn unit(p: u64, x: i64) -> bool {
    x.rem_euclid(p as i64) != 0
}
