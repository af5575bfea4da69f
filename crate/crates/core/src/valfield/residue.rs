//! Polynomials over the residue field `F_q` of a level: gcds, Frobenius
//! powers, root extraction and distinct-degree splitting.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tower::{addmod, submod, Level};

pub(crate) type Elem = Vec<u64>;
pub(crate) type FPoly = Vec<Elem>;

/// Field of `p^f` elements attached to a level.
pub(crate) struct Fq<'a> {
    pub level: &'a Arc<Level>,
}

impl<'a> Fq<'a> {
    pub fn new(level: &'a Arc<Level>) -> Self {
        Fq { level }
    }

    fn p(&self) -> u64 {
        self.level.p
    }

    pub fn q(&self) -> u128 {
        self.level.residue_size()
    }

    pub fn zero(&self) -> Elem {
        vec![0; self.level.dim]
    }

    pub fn one(&self) -> Elem {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn is_zero(a: &Elem) -> bool {
        a.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(&x, &y)| addmod(x, y, self.p())).collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        a.iter().zip(b).map(|(&x, &y)| submod(x, y, self.p())).collect()
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        a.iter().map(|&x| submod(0, x, self.p())).collect()
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.level.mul(a, b, self.p())
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        self.level.res_inv(a).expect("nonzero residue")
    }

    /// The element whose coordinates are the base-`p` digits of `idx`.
    pub fn elem_at_index(&self, mut idx: u128) -> Elem {
        let p = self.p() as u128;
        let mut v = self.zero();
        for c in v.iter_mut() {
            *c = (idx % p) as u64;
            idx /= p;
        }
        v
    }

    pub fn random(&self, rng: &mut ChaCha8Rng) -> Elem {
        let p = self.p();
        (0..self.level.dim).map(|_| rng.gen_range(0..p)).collect()
    }

    pub fn trim(&self, mut f: FPoly) -> FPoly {
        while f.last().is_some_and(Self::is_zero) {
            f.pop();
        }
        f
    }

    pub fn poly_sub(&self, a: &FPoly, b: &FPoly) -> FPoly {
        let n = a.len().max(b.len());
        let z = self.zero();
        let out = (0..n).map(|i| self.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
        self.trim(out)
    }

    pub fn poly_mul(&self, a: &FPoly, b: &FPoly) -> FPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if Self::is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                self.level.mul_acc(&mut out[i + j], x, y, self.p());
            }
        }
        self.trim(out)
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn divrem(&self, a: &FPoly, b: &FPoly) -> (FPoly, FPoly) {
        let b = self.trim(b.clone());
        let mut r = self.trim(a.clone());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead = b.last().unwrap();
        let lead_inv = if *lead == self.one() { self.one() } else { self.inv(lead) };
        let mut quo = vec![self.zero(); r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let c = self.mul(r.last().unwrap(), &lead_inv);
            for (i, bi) in b.iter().enumerate() {
                let t = self.mul(&c, bi);
                r[shift + i] = self.sub(&r[shift + i], &t);
            }
            quo[shift] = c;
            r = self.trim(r);
        }
        (self.trim(quo), r)
    }

    pub fn rem(&self, a: &FPoly, b: &FPoly) -> FPoly {
        self.divrem(a, b).1
    }

    pub fn monic(&self, f: &FPoly) -> FPoly {
        let f = self.trim(f.clone());
        if f.is_empty() {
            return f;
        }
        let li = self.inv(f.last().unwrap());
        f.iter().map(|c| self.mul(c, &li)).collect()
    }

    pub fn gcd(&self, a: &FPoly, b: &FPoly) -> FPoly {
        let mut a = self.trim(a.clone());
        let mut b = self.trim(b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        self.monic(&a)
    }

    pub fn mulmod(&self, a: &FPoly, b: &FPoly, m: &FPoly) -> FPoly {
        self.rem(&self.poly_mul(a, b), m)
    }

    pub fn powmod(&self, base: &FPoly, mut k: u128, m: &FPoly) -> FPoly {
        let mut acc = self.rem(&vec![self.one()], m);
        let mut b = self.rem(base, m);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mulmod(&acc, &b, m);
            }
            b = self.mulmod(&b, &b, m);
            k >>= 1;
        }
        acc
    }

    pub fn x(&self) -> FPoly {
        vec![self.zero(), self.one()]
    }

    pub fn eval(&self, f: &FPoly, x: &Elem) -> Elem {
        let mut acc = self.zero();
        for c in f.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    /// `x^(q^k) mod m`.
    fn frobenius_x(&self, k: usize, m: &FPoly) -> FPoly {
        let mut cur = self.rem(&self.x(), m);
        for _ in 0..k {
            cur = self.powmod(&cur, self.q(), m);
        }
        cur
    }

    /// Roots lying in this field, with multiplicities, in a deterministic order.
    pub fn roots(&self, f: &FPoly) -> Vec<(Elem, usize)> {
        let f = self.monic(f);
        if f.len() <= 1 {
            return Vec::new();
        }
        let xq = self.frobenius_x(1, &f);
        let h = self.gcd(&f, &self.poly_sub(&xq, &self.x()));
        let mut distinct = if h.len() <= 1 {
            Vec::new()
        } else if self.q() <= 4096 || self.p() == 2 {
            let mut v = Vec::new();
            let mut idx = 0u128;
            while idx < self.q() && v.len() < h.len() - 1 {
                let a = self.elem_at_index(idx);
                if Self::is_zero(&self.eval(&h, &a)) {
                    v.push(a);
                }
                idx += 1;
            }
            v
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0ff_1e1d);
            let mut out = Vec::new();
            self.split_linear(&h, &mut rng, &mut out);
            out
        };
        distinct.sort();
        distinct
            .into_iter()
            .map(|r| {
                let lin = vec![self.neg(&r), self.one()];
                let mut g = f.clone();
                let mut mult = 0;
                loop {
                    let (qt, rm) = self.divrem(&g, &lin);
                    if !rm.is_empty() {
                        break;
                    }
                    mult += 1;
                    g = qt;
                }
                (r, mult)
            })
            .collect()
    }

    fn split_linear(&self, h: &FPoly, rng: &mut ChaCha8Rng, out: &mut Vec<Elem>) {
        let h = self.monic(h);
        if h.len() <= 1 {
            return;
        }
        if h.len() == 2 {
            out.push(self.neg(&h[0]));
            return;
        }
        let e = (self.q() - 1) / 2;
        loop {
            let a = self.random(rng);
            let lin = vec![a, self.one()];
            let t = self.poly_sub(&self.powmod(&lin, e, &h), &vec![self.one()]);
            let g = self.gcd(&h, &t);
            if g.len() > 1 && g.len() < h.len() {
                let (other, _) = self.divrem(&h, &g);
                self.split_linear(&g, rng, out);
                self.split_linear(&other, rng, out);
                return;
            }
        }
    }

    /// Degrees of the distinct irreducible factors of `f`.
    pub fn factor_degrees(&self, f: &FPoly) -> Vec<usize> {
        let mut rem = self.monic(f);
        let mut degs = Vec::new();
        let mut k = 1;
        while rem.len() > 1 {
            let xk = self.frobenius_x(k, &rem);
            let h = self.gcd(&rem, &self.poly_sub(&xk, &self.x()));
            if h.len() > 1 {
                degs.push(k);
                loop {
                    let g = self.gcd(&rem, &h);
                    if g.len() <= 1 {
                        break;
                    }
                    rem = self.divrem(&rem, &g).0;
                }
            }
            k += 1;
        }
        degs
    }

    /// Irreducible factors of `f` grouped as `(degree, multiplicity, count)`,
    /// by distinct-degree splitting with repeated gcds for multiplicities.
    pub fn factor_pattern(&self, f: &FPoly) -> Vec<(usize, usize, usize)> {
        let mut rem = self.monic(f);
        let mut out = Vec::new();
        let mut xk = if rem.len() > 1 { self.rem(&self.x(), &rem) } else { Vec::new() };
        let mut k = 1;
        while rem.len() > 1 {
            xk = self.powmod(&xk, self.q(), &rem);
            let h = self.gcd(&rem, &self.poly_sub(&xk, &self.x()));
            if h.len() > 1 {
                let mut t = h;
                let mut mult = 0;
                loop {
                    mult += 1;
                    rem = self.divrem(&rem, &t).0;
                    let t2 = self.gcd(&rem, &t);
                    let gone = (t.len() - t2.len()) / k;
                    if gone > 0 {
                        out.push((k, mult, gone));
                    }
                    if t2.len() <= 1 {
                        break;
                    }
                    t = t2;
                }
                if rem.len() > 1 {
                    xk = self.rem(&xk, &rem);
                }
            }
            k += 1;
        }
        out
    }

    /// Rabin's irreducibility test for a monic polynomial of degree `k`.
    pub fn is_irreducible(&self, h: &FPoly) -> bool {
        let k = h.len() - 1;
        if k == 1 {
            return true;
        }
        let xk = self.frobenius_x(k, h);
        if !self.poly_sub(&xk, &self.rem(&self.x(), h)).is_empty() {
            return false;
        }
        for r in prime_factors(k) {
            let xr = self.frobenius_x(k / r, h);
            let g = self.gcd(h, &self.poly_sub(&xr, &self.x()));
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            out.push(k);
            while n.is_multiple_of(k) {
                n /= k;
            }
        }
        k += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The first monic irreducible polynomial of degree `k` over the residue
/// field of `level`, in a fixed enumeration order.
pub(crate) fn find_irreducible(level: &Arc<Level>, k: usize) -> Vec<Vec<u64>> {
    let fq = Fq::new(level);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6265_726b ^ ((level.dim as u64) << 8) ^ k as u64);
    loop {
        let mut h: FPoly = (0..k).map(|_| fq.random(&mut rng)).collect();
        h.push(fq.one());
        if !Fq::is_zero(&h[0]) && fq.is_irreducible(&h) {
            return h;
        }
    }
}

pub(crate) fn lcm_all(v: &[usize]) -> usize {
    use num_integer::Integer;
    v.iter().fold(1usize, |a, &b| a.lcm(&b))
}
