//! Action of a polynomial and its iterates on the Berkovich line: images,
//! local degrees, directional multiplicities, preimage fibers and the base
//! point `ξ_B`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use crate::berkline::{val_ge, Ball, BerkPoint, DirKind, Direction};
use crate::error::{Error, Result};
use crate::valfield::literal::literal_rational;
use crate::valfield::{parse_scalar, split_roots, upoly, Scalar, Stage, Tower, Val, Q};

/// Default bound on `d^j` for explicit iterate coefficients.
pub const ITERATE_DEGREE_BOUND: usize = 1296;

/// A polynomial of degree `d >= 2` over the tower's field.
#[derive(Clone)]
pub struct Poly {
    tower: Arc<Tower>,
    coeffs: Vec<Scalar>,
    rational: Option<Vec<BigRational>>,
}

/// A point of a fiber with its local degree.
#[derive(Clone, Debug)]
pub struct FiberEntry {
    pub point: Ball,
    pub local_degree: u64,
}

/// The base point `ξ_B` and whether the polynomial is simple.
#[derive(Clone, Debug)]
pub struct BasePoint {
    pub ball: Ball,
    pub simple: bool,
    /// The classical fixed point whose ray carries `ξ_B`.
    pub fixed_point: Scalar,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exact_zero() {
                continue;
            }
            let cs = match &self.rational {
                Some(r) => crate::valfield::scalar::bigrational_to_string(&r[k]),
                None => c.to_string(),
            };
            terms.push(match k {
                0 => format!("({cs})"),
                1 => format!("({cs})*z"),
                _ => format!("({cs})*z^{k}"),
            });
        }
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn new(tower: &Arc<Tower>, coeffs: Vec<Scalar>) -> Result<Poly> {
        let coeffs = upoly::trim(coeffs);
        if coeffs.len() < 3 {
            return Err(Error::Invalid("polynomial degree must be at least 2".into()));
        }
        if coeffs.last().unwrap().is_approx_zero() {
            return Err(Error::Invalid("leading coefficient is not a unit multiple of a power of p".into()));
        }
        let st = upoly::common_stage(&coeffs);
        let coeffs = upoly::coerce_all(&coeffs, &st);
        Ok(Poly { tower: tower.clone(), coeffs, rational: None })
    }

    pub fn from_rationals(tower: &Arc<Tower>, coeffs: &[BigRational]) -> Result<Poly> {
        let st = Stage::new(tower.base(), 1);
        let sc = coeffs.iter().map(|c| Scalar::from_bigrational(&st, c)).collect();
        let mut p = Poly::new(tower, sc)?;
        let mut r = coeffs.to_vec();
        while r.len() > p.coeffs.len() {
            r.pop();
        }
        p.rational = Some(r);
        Ok(p)
    }

    /// Parses `c0, c1, ...` (lowest degree first, optionally bracketed) or a
    /// sum of terms `c*z^k` with scalar-literal coefficients.
    pub fn parse(tower: &Arc<Tower>, text: &str) -> Result<Poly> {
        let t = text.trim();
        let coeff_strs: Vec<String> = if t.contains('z') {
            parse_expression(t)?
        } else {
            let inner = t.strip_prefix('[').and_then(|x| x.strip_suffix(']')).unwrap_or(t);
            inner.split(',').map(|s| s.trim().trim_matches('"').to_string()).collect()
        };
        let mut scalars = Vec::new();
        let mut rats = Some(Vec::new());
        for s in &coeff_strs {
            scalars.push(parse_scalar(tower, s)?);
            match (literal_rational(tower, s), rats.as_mut()) {
                (Some(r), Some(v)) => v.push(r),
                _ => rats = None,
            }
        }
        match rats {
            Some(r) => Poly::from_rationals(tower, &r),
            None => Poly::new(tower, scalars),
        }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn prime(&self) -> u64 {
        self.tower.prime()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Exact rational coefficients, when the polynomial was given by them.
    pub fn rational_coeffs(&self) -> Option<&[BigRational]> {
        self.rational.as_deref()
    }

    pub fn stage(&self) -> &Stage {
        self.coeffs[0].stage()
    }

    pub fn base_stage(&self) -> Stage {
        Stage::new(self.tower.base(), 1)
    }

    pub fn leading(&self) -> &Scalar {
        self.coeffs.last().unwrap()
    }

    /// Tame by the sufficient criterion `p > d`.
    pub fn is_tame(&self) -> bool {
        self.prime() > self.degree() as u64
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        upoly::eval(&self.coeffs, x)
    }

    /// Coefficients of `P(a + z)`.
    pub fn taylor(&self, a: &Scalar) -> Vec<Scalar> {
        let st = Stage::join(self.stage(), a.stage());
        upoly::taylor_shift(&upoly::coerce_all(&self.coeffs, &st), &a.coerce(&st))
    }

    pub fn derivative(&self) -> Vec<Scalar> {
        upoly::derivative(&self.coeffs)
    }

    /// Image of a ball together with the local degree of `P` there.
    pub fn image_ball(&self, b: &Ball) -> Result<(Ball, u64)> {
        let c = self.taylor(b.center());
        let (s, deg) = weierstrass(&c, b.rv(), true)?;
        Ok((Ball::new(&c[0], s)?, deg as u64))
    }

    pub fn image_point(&self, x: &BerkPoint) -> Result<BerkPoint> {
        match x {
            BerkPoint::Infinity => Ok(BerkPoint::Infinity),
            BerkPoint::Finite(a) => Ok(BerkPoint::Finite(self.eval(a))),
            BerkPoint::Ball(b) => Ok(BerkPoint::Ball(self.image_ball(b)?.0)),
        }
    }

    pub fn local_degree(&self, b: &Ball) -> Result<u64> {
        Ok(self.image_ball(b)?.1)
    }

    /// Image of `b` under `P^j` and the local degree of `P^j` at `b`.
    pub fn image_iter(&self, b: &Ball, j: usize) -> Result<(Ball, u64)> {
        let mut cur = b.clone();
        let mut deg = 1u64;
        for _ in 0..j {
            let (nb, d) = self.image_ball(&cur)?;
            cur = nb;
            deg *= d;
        }
        Ok((cur, deg))
    }

    /// Directional multiplicity `m_P(v)`.
    pub fn directional_multiplicity(&self, dir: &Direction) -> Result<u64> {
        let b = &dir.base;
        match &dir.kind {
            DirKind::Up => self.local_degree(b),
            DirKind::Down(_) => {
                let w = dir.probe(Q::from_integer(1))?;
                let c = self.taylor(w.center());
                Ok(weierstrass(&c, b.rv(), false)?.1 as u64)
            }
        }
    }

    /// Surplus multiplicity `s_P(v)` (nonzero only toward `∞` for polynomials).
    pub fn surplus(&self, dir: &Direction) -> Result<u64> {
        match dir.kind {
            DirKind::Up => Ok(self.degree() as u64 - self.local_degree(&dir.base)?),
            DirKind::Down(_) => Ok(0),
        }
    }

    /// The image direction `P_*(v)` at `P(ξ)`.
    pub fn push_direction(&self, dir: &Direction) -> Result<Direction> {
        let (img, _) = self.image_ball(&dir.base)?;
        match dir.kind {
            DirKind::Up => Ok(Direction::up(&img)),
            DirKind::Down(_) => {
                let w = dir.probe(Q::from_integer(1))?;
                img.direction_to_scalar(&self.eval(w.center()))
            }
        }
    }

    /// Directional multiplicity of `P^j` by the chain rule.
    pub fn directional_multiplicity_iter(&self, dir: &Direction, j: usize) -> Result<u64> {
        let mut d = dir.clone();
        let mut m = 1u64;
        for _ in 0..j {
            m *= self.directional_multiplicity(&d)?;
            d = self.push_direction(&d)?;
        }
        Ok(m)
    }

    /// `P^{-1}(ξ)` with local degrees.
    pub fn preimages(&self, target: &Ball) -> Result<Vec<FiberEntry>> {
        let mut f = self.coeffs.clone();
        let st = Stage::join(f[0].stage(), target.center().stage());
        f = upoly::coerce_all(&f, &st);
        f[0] = &f[0] - &target.center().coerce(&st);
        let roots = split_roots(&self.tower, &f)?;
        let mut out: Vec<FiberEntry> = Vec::new();
        let mut seen: HashMap<Ball, ()> = HashMap::new();
        for (alpha, _) in &roots {
            let c = self.taylor(alpha);
            let w = solve_radius(&c, target.rv())?;
            let ball = Ball::new(alpha, w)?;
            if seen.insert(ball.clone(), ()).is_some() {
                continue;
            }
            let (img, deg) = self.image_ball(&ball)?;
            if img != *target {
                return Err(Error::CheckFailed(format!("preimage {ball} maps to {img}, expected {target}")));
            }
            out.push(FiberEntry { point: ball, local_degree: deg });
        }
        let total: u64 = out.iter().map(|e| e.local_degree).sum();
        if total != self.degree() as u64 {
            return Err(Error::CheckFailed(format!(
                "fiber of {target} has total local degree {total}, expected {}",
                self.degree()
            )));
        }
        Ok(out)
    }

    /// `(P^j)^{-1}(ξ)` with local degrees of `P^j`, by `j`-fold pullback.
    pub fn iterate_fiber(&self, j: usize, target: &Ball) -> Result<Vec<FiberEntry>> {
        let mut cur = vec![FiberEntry { point: target.clone(), local_degree: 1 }];
        for _ in 0..j {
            let mut next = Vec::new();
            for e in &cur {
                for f in self.preimages(&e.point)? {
                    next.push(FiberEntry { point: f.point, local_degree: f.local_degree * e.local_degree });
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Explicit coefficients of `P^j`.
    pub fn iterate_poly(&self, j: usize, bound: usize) -> Result<Poly> {
        let d = self.degree();
        let deg = (d as u128).checked_pow(j as u32).unwrap_or(u128::MAX);
        if deg > bound as u128 {
            return Err(Error::DegreeBoundExceeded { degree: deg.min(usize::MAX as u128) as usize, bound });
        }
        let mut acc = self.coeffs.clone();
        for _ in 1..j {
            acc = upoly::compose(&self.coeffs, &acc);
        }
        let mut out = Poly::new(&self.tower, acc)?;
        if let Some(r) = &self.rational {
            let mut racc = r.clone();
            for _ in 1..j {
                racc = compose_rational(r, &racc);
            }
            out.rational = Some(racc);
        }
        Ok(out)
    }

    /// Finite fixed points with multiplicities.
    pub fn fixed_points(&self) -> Result<Vec<(Scalar, usize)>> {
        let mut f = self.coeffs.clone();
        f[1] = &f[1] - &Scalar::one(f[1].stage());
        split_roots(&self.tower, &f)
    }

    /// Finite critical points with multiplicities (`∞` is always critical).
    pub fn critical_points(&self) -> Result<Vec<(Scalar, usize)>> {
        split_roots(&self.tower, &self.derivative())
    }

    /// The base point `ξ_B`, from the Taylor data at a classical fixed point.
    pub fn base_point(&self) -> Result<BasePoint> {
        let fixed = self.fixed_points()?;
        let z = fixed
            .iter()
            .map(|(x, _)| x)
            .min_by_key(|x| (x.stage().level().index(), x.stage().ramification()))
            .ok_or_else(|| Error::NoFixedParameter("no finite fixed point".into()))?
            .clone();
        let c = self.taylor(&z);
        let d = self.degree();
        let vd = c[d].val_exact()?;
        let t_fix = -vd / Q::from_integer(d as i64 - 1);
        let mut t_r: Option<Q> = None;
        for (k, ck) in c.iter().enumerate().take(d).skip(1) {
            let dk = Q::from_integer((d - k) as i64);
            match ck.val() {
                Val::Inf => {}
                Val::Exact(v) => {
                    let t = (v - vd) / dk;
                    t_r = Some(t_r.map_or(t, |x: Q| x.min(t)));
                }
                Val::AtLeast(b) => {
                    if (b - vd) / dk < t_fix {
                        return Err(Error::NoFixedParameter(format!(
                            "Taylor coefficient {k} at the fixed point is unresolved"
                        )));
                    }
                }
            }
        }
        let simple = t_r.is_none_or(|t| t_fix <= t);
        let rv = if simple { t_fix } else { t_r.unwrap() };
        let ball = Ball::new(&z, rv)?;
        let bp = BasePoint { ball, simple, fixed_point: z };
        self.check_base_point(&bp)?;
        Ok(bp)
    }

    fn check_base_point(&self, bp: &BasePoint) -> Result<()> {
        let fib = self.preimages(&bp.ball)?;
        let (img, _) = self.image_ball(&bp.ball)?;
        if bp.simple {
            if fib.len() != 1 || fib[0].point != bp.ball {
                return Err(Error::CheckFailed("simple base point is not totally invariant".into()));
            }
            return Ok(());
        }
        if !bp.ball.lt(&img)? {
            return Err(Error::CheckFailed("base point does not map strictly upward".into()));
        }
        let mut dirs: Vec<DirKind> = Vec::new();
        for e in &fib {
            if !e.point.lt(&bp.ball)? {
                return Err(Error::CheckFailed(format!("preimage {} not below the base point", e.point)));
            }
            let k = bp.ball.direction_to(&e.point)?.kind;
            if !dirs.contains(&k) {
                dirs.push(k);
            }
        }
        if fib.len() < 2 || dirs.len() < 2 {
            return Err(Error::CheckFailed("base point fiber does not branch".into()));
        }
        Ok(())
    }

    /// `v_p` of the leading coefficient of `P^j`.
    pub fn iterate_leading_val(&self, j: usize) -> Result<Q> {
        let v = self.leading().val_exact()?;
        let d = self.degree() as i64;
        let mut s = 0i64;
        let mut pw = 1i64;
        for _ in 0..j {
            s += pw;
            pw *= d;
        }
        Ok(v * Q::from_integer(s))
    }

    /// Whether the classical point `x` lies in the ball (convenience).
    pub fn ball_contains(b: &Ball, x: &Scalar) -> Result<bool> {
        val_ge(&(x - b.center()), b.rv())
    }
}

/// `min_{k>=1} v(c_k) + k·r` and the largest (closed disk) or smallest (open
/// disk) index attaining it.
pub(crate) fn weierstrass(c: &[Scalar], r: Q, largest: bool) -> Result<(Q, usize)> {
    let mut best: Option<(Q, usize)> = None;
    for (k, ck) in c.iter().enumerate().skip(1) {
        if let Val::Exact(v) = ck.val() {
            let s = v + Q::from_integer(k as i64) * r;
            best = match best {
                None => Some((s, k)),
                Some((bs, bk)) => {
                    if s < bs || (s == bs && largest) {
                        Some((s, k))
                    } else {
                        Some((bs, bk))
                    }
                }
            };
        }
    }
    let (s, k) = best.ok_or_else(|| Error::PrecisionExhausted("all Taylor coefficients unresolved".into()))?;
    for (i, ck) in c.iter().enumerate().skip(1) {
        if let Val::AtLeast(b) = ck.val() {
            if b + Q::from_integer(i as i64) * r <= s {
                return Err(Error::PrecisionExhausted(format!(
                    "Taylor coefficient {i} unresolved at radius valuation {r}"
                )));
            }
        }
    }
    Ok((s, k))
}

/// The unique `w` with `min_{k>=1} v(c_k) + k·w = u`.
fn solve_radius(c: &[Scalar], u: Q) -> Result<Q> {
    let mut w: Option<Q> = None;
    for (k, ck) in c.iter().enumerate().skip(1) {
        if let Val::Exact(v) = ck.val() {
            let t = (u - v) / Q::from_integer(k as i64);
            w = Some(w.map_or(t, |x: Q| x.max(t)));
        }
    }
    let w = w.ok_or_else(|| Error::PrecisionExhausted("all Taylor coefficients unresolved".into()))?;
    for (k, ck) in c.iter().enumerate().skip(1) {
        if let Val::AtLeast(b) = ck.val() {
            if (u - b) / Q::from_integer(k as i64) >= w {
                return Err(Error::PrecisionExhausted(format!(
                    "Taylor coefficient {k} unresolved while solving for a preimage radius"
                )));
            }
        }
    }
    Ok(w)
}

fn compose_rational(f: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
    let mut acc = vec![f.last().unwrap().clone()];
    for c in f.iter().rev().skip(1) {
        let mut next = vec![BigRational::zero(); acc.len() + g.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in g.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        next[0] += c;
        acc = next;
    }
    acc
}

/// Splits a polynomial expression into coefficient literals (lowest first).
fn parse_expression(s: &str) -> Result<Vec<String>> {
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    for (i, &ch) in chars.iter().enumerate() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && i > 0 && chars[i - 1] != '^' => {
                if !cur.is_empty() {
                    terms.push((neg, std::mem::take(&mut cur)));
                }
                neg = ch == '-';
            }
            '-' if i == 0 => neg = true,
            '+' if i == 0 => {}
            _ => cur.push(ch),
        }
    }
    if !cur.is_empty() {
        terms.push((neg, cur));
    }
    let mut by_deg: Vec<Option<String>> = Vec::new();
    for (neg, t) in terms {
        let (coef, k) = match t.find('z') {
            None => (t.clone(), 0usize),
            Some(pos) => {
                let c = t[..pos].trim_end_matches('*').to_string();
                let rest = &t[pos + 1..];
                let k = if rest.is_empty() {
                    1
                } else {
                    let e = rest.strip_prefix('^').ok_or_else(|| Error::Parse(format!("malformed term '{t}'")))?;
                    let e = e.trim_start_matches('(').trim_end_matches(')');
                    e.parse::<usize>().map_err(|_| Error::Parse(format!("malformed exponent in '{t}'")))?
                };
                (if c.is_empty() { "1".to_string() } else { c }, k)
            }
        };
        let coef = if neg { format!("-{coef}") } else { coef };
        if by_deg.len() <= k {
            by_deg.resize(k + 1, None);
        }
        by_deg[k] = Some(match by_deg[k].take() {
            None => coef,
            Some(prev) => return Err(Error::Parse(format!("repeated degree {k} (terms '{prev}' and '{coef}')"))),
        });
    }
    Ok(by_deg.into_iter().map(|c| c.unwrap_or_else(|| "0".into())).collect())
}
