//! Dense univariate polynomials with scalar coefficients (lowest degree first).

use super::scalar::{scale_int, Scalar, Stage};

pub fn common_stage(f: &[Scalar]) -> Stage {
    let mut st = f[0].stage().clone();
    for c in &f[1..] {
        if *c.stage() != st {
            st = Stage::join(&st, c.stage());
        }
    }
    st
}

pub fn coerce_all(f: &[Scalar], st: &Stage) -> Vec<Scalar> {
    f.iter().map(|c| c.coerce(st)).collect()
}

pub fn eval(f: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = f.last().unwrap().clone();
    for c in f.iter().rev().skip(1) {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn derivative(f: &[Scalar]) -> Vec<Scalar> {
    if f.len() <= 1 {
        return vec![Scalar::zero(f[0].stage())];
    }
    f.iter().enumerate().skip(1).map(|(k, c)| scale_int(c, k as i64)).collect()
}

/// Coefficients of `f(a + z)`, by repeated synthetic division (no factorials).
pub fn taylor_shift(f: &[Scalar], a: &Scalar) -> Vec<Scalar> {
    let mut c = f.to_vec();
    let n = c.len() - 1;
    for i in 0..n {
        for k in (i..n).rev() {
            let t = &c[k + 1] * a;
            c[k] = &c[k] + &t;
        }
    }
    c
}

pub fn add(f: &[Scalar], g: &[Scalar]) -> Vec<Scalar> {
    let n = f.len().max(g.len());
    (0..n)
        .map(|i| match (f.get(i), g.get(i)) {
            (Some(a), Some(b)) => a + b,
            (Some(a), None) => a.clone(),
            (None, Some(b)) => b.clone(),
            _ => unreachable!(),
        })
        .collect()
}

pub fn mul(f: &[Scalar], g: &[Scalar]) -> Vec<Scalar> {
    let st = Stage::join(&common_stage(f), &common_stage(g));
    let mut out = vec![Scalar::zero(&st); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_exact_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            if b.is_exact_zero() {
                continue;
            }
            let t = a * b;
            out[i + j] = &out[i + j] + &t;
        }
    }
    out
}

/// Coefficients of `f(g(z))` by Horner's scheme.
pub fn compose(f: &[Scalar], g: &[Scalar]) -> Vec<Scalar> {
    let mut acc = vec![f.last().unwrap().clone()];
    for c in f.iter().rev().skip(1) {
        acc = mul(&acc, g);
        acc[0] = &acc[0] + c;
    }
    acc
}

/// Drops trailing exact zeros.
pub fn trim(mut f: Vec<Scalar>) -> Vec<Scalar> {
    while f.len() > 1 && f.last().unwrap().is_exact_zero() {
        f.pop();
    }
    f
}
