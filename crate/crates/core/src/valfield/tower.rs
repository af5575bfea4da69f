//! Unramified levels of the coefficient tower.
//!
//! Level 0 is `Z/p^M`.  Level `u+1` is level `u` adjoined a root of a monic
//! lift of an irreducible residue polynomial, so every level is a Galois ring
//! with residue field `F_{p^f}` and the chain is nested: an element of level
//! `u` occupies the first `f_u` coordinates of any higher level.

use std::sync::Arc;

use parking_lot::RwLock;

use crate::error::{Error, Result};

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub(crate) fn submod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

pub(crate) fn inv_mod_u64(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// One unramified level of the tower.
pub struct Level {
    pub(crate) index: usize,
    pub(crate) degree: usize,
    pub(crate) dim: usize,
    pub(crate) p: u64,
    pub(crate) digits: u32,
    pub(crate) pm: u64,
    pub(crate) pows: Vec<u64>,
    /// Residue defining polynomial over the parent level, monic, lowest first.
    pub(crate) modulus: Vec<Vec<u64>>,
    table: Vec<u64>,
    table_p: Vec<u64>,
    pub(crate) parent: Option<Arc<Level>>,
}

impl std::fmt::Debug for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Level(u={}, f={}, p={})", self.index, self.dim, self.p)
    }
}

impl Level {
    fn base(p: u64, digits: u32) -> Level {
        let mut pows = vec![1u64];
        for _ in 0..digits {
            pows.push(pows.last().unwrap() * p);
        }
        Level {
            index: 0,
            degree: 1,
            dim: 1,
            p,
            digits,
            pm: pows[digits as usize],
            pows,
            modulus: Vec::new(),
            table: vec![1],
            table_p: vec![1],
            parent: None,
        }
    }

    fn extension(parent: &Arc<Level>, modulus: Vec<Vec<u64>>) -> Level {
        let m = modulus.len() - 1;
        let pd = parent.dim;
        let dim = pd * m;
        let pm = parent.pm;
        let mut table = vec![0u64; dim * dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let (i1, j1) = (a / pd, a % pd);
                let (i2, j2) = (b / pd, b % pd);
                let mut poly = vec![vec![0u64; pd]; 2 * m - 1];
                let mut ea = vec![0u64; pd];
                ea[j1] = 1;
                let mut eb = vec![0u64; pd];
                eb[j2] = 1;
                poly[i1 + i2] = parent.mul(&ea, &eb, pm);
                for n in (m..2 * m - 1).rev() {
                    let c = std::mem::replace(&mut poly[n], vec![0u64; pd]);
                    if c.iter().all(|&x| x == 0) {
                        continue;
                    }
                    for (t, h) in modulus.iter().take(m).enumerate() {
                        let prod = parent.mul(&c, h, pm);
                        for (x, y) in poly[n - m + t].iter_mut().zip(prod) {
                            *x = submod(*x, y, pm);
                        }
                    }
                }
                let row = &mut table[(a * dim + b) * dim..(a * dim + b + 1) * dim];
                for i in 0..m {
                    row[i * pd..(i + 1) * pd].copy_from_slice(&poly[i]);
                }
            }
        }
        let table_p = table.iter().map(|x| x % parent.p).collect();
        Level {
            index: parent.index + 1,
            degree: m,
            dim,
            p: parent.p,
            digits: parent.digits,
            pm,
            pows: parent.pows.clone(),
            modulus,
            table,
            table_p,
            parent: Some(parent.clone()),
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Residue degree `f` of this level over `F_p`.
    pub fn residue_degree(&self) -> usize {
        self.dim
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn parent(&self) -> Option<&Arc<Level>> {
        self.parent.as_ref()
    }

    /// Number of elements of the residue field.
    pub fn residue_size(&self) -> u128 {
        (self.p as u128).pow(self.dim as u32)
    }

    /// Product of two level elements modulo `m` (either `p^M` or `p`).
    pub(crate) fn mul(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.dim];
        self.mul_acc(&mut out, a, b, m);
        out
    }

    /// Multiply-accumulate `out += a*b` modulo `m`.
    pub(crate) fn mul_acc(&self, out: &mut [u64], a: &[u64], b: &[u64], m: u64) {
        let dim = self.dim;
        if dim == 1 {
            out[0] = addmod(out[0], mulmod(a[0], b[0], m), m);
            return;
        }
        if m == self.p && m < 1 << 16 {
            let mut acc = vec![0u64; dim];
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    if bj == 0 {
                        continue;
                    }
                    let c = ai * bj % m;
                    let row = &self.table_p[(i * dim + j) * dim..(i * dim + j + 1) * dim];
                    for (o, &t) in acc.iter_mut().zip(row) {
                        *o += c * t;
                    }
                }
            }
            for (o, x) in out.iter_mut().zip(acc) {
                *o = (*o + x) % m;
            }
            return;
        }
        let table = if m == self.p { &self.table_p } else { &self.table };
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = mulmod(ai, bj, m);
                let row = &table[(i * dim + j) * dim..(i * dim + j + 1) * dim];
                for (o, &t) in out.iter_mut().zip(row) {
                    if t != 0 {
                        *o = addmod(*o, mulmod(c, t, m), m);
                    }
                }
            }
        }
    }

    /// `a^k` in the residue field of this level.
    pub(crate) fn res_pow(&self, a: &[u64], mut k: u128) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = vec![0u64; self.dim];
        acc[0] = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base, self.p);
            }
            base = self.mul(&base, &base, self.p);
            k >>= 1;
        }
        acc
    }

    /// Inverse in the residue field.
    pub(crate) fn res_inv(&self, a: &[u64]) -> Result<Vec<u64>> {
        if a.iter().all(|&x| x % self.p == 0) {
            return Err(Error::DivisionByZero);
        }
        if self.dim == 1 {
            return Ok(vec![inv_mod_u64(a[0], self.p).unwrap()]);
        }
        let red: Vec<u64> = a.iter().map(|x| x % self.p).collect();
        Ok(self.res_pow(&red, self.residue_size() - 2))
    }

    /// The highest level in this chain (walking towards the base) whose
    /// dimension still exceeds `idx`.
    pub(crate) fn smallest_containing(self: &Arc<Level>, idx: usize) -> Arc<Level> {
        let mut cur = self.clone();
        while let Some(par) = cur.parent.clone() {
            if par.dim > idx {
                cur = par;
            } else {
                break;
            }
        }
        cur
    }

    /// Degree of this level's residue field over its parent.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Residue modulus as integer coefficient vectors (for serialization).
    pub fn modulus(&self) -> &[Vec<u64>] {
        &self.modulus
    }
}

/// The append-only chain of unramified levels shared by one analysis.
pub struct Tower {
    p: u64,
    digits: u32,
    levels: RwLock<Vec<Arc<Level>>>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tower(p={}, digits={}, levels={})", self.p, self.digits, self.levels.read().len())
    }
}

impl Tower {
    /// Largest digit count `M` with `p^M < 2^62`.
    pub fn max_digits(p: u64) -> u32 {
        let mut m = 0u32;
        let mut v: u128 = 1;
        while v * (p as u128) < (1u128 << 62) {
            v *= p as u128;
            m += 1;
        }
        m
    }

    /// A tower over `Q_p` carrying `digits` p-adic digits of relative
    /// precision (defaults to the machine-word maximum).
    pub fn new(p: u64, digits: Option<u32>) -> Result<Arc<Tower>> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        let max = Self::max_digits(p);
        let digits = digits.unwrap_or(max);
        if digits < 2 || digits > max {
            return Err(Error::Invalid(format!(
                "precision {digits} outside the supported range 2..={max} for p = {p}"
            )));
        }
        Ok(Arc::new(Tower { p, digits, levels: RwLock::new(vec![Arc::new(Level::base(p, digits))]) }))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn base(&self) -> Arc<Level> {
        self.levels.read()[0].clone()
    }

    pub fn top(&self) -> Arc<Level> {
        self.levels.read().last().unwrap().clone()
    }

    pub fn level(&self, i: usize) -> Option<Arc<Level>> {
        self.levels.read().get(i).cloned()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.read().len()
    }

    /// Appends a level of relative degree `k` over the level `below`, unless
    /// another caller already extended past it.  Returns the new top.
    pub(crate) fn extend(&self, below: usize, k: usize) -> Arc<Level> {
        let mut levels = self.levels.write();
        if levels.len() - 1 != below {
            return levels.last().unwrap().clone();
        }
        let top = levels.last().unwrap().clone();
        let h = super::residue::find_irreducible(&top, k);
        let lvl = Arc::new(Level::extension(&top, h));
        levels.push(lvl.clone());
        lvl
    }

    /// Appends a level with an explicitly given residue modulus (used when
    /// re-reading serialized trees).
    pub fn push_level(&self, modulus: Vec<Vec<u64>>) -> Result<Arc<Level>> {
        let mut levels = self.levels.write();
        let top = levels.last().unwrap().clone();
        if modulus.len() < 2 || modulus.iter().any(|c| c.len() != top.dim) {
            return Err(Error::Invalid("malformed level modulus".into()));
        }
        let lvl = Arc::new(Level::extension(&top, modulus));
        levels.push(lvl.clone());
        Ok(lvl)
    }
}
