//! Root splitting: Newton-polygon slopes, residue-field roots, Hensel lifting
//! and recursive refinement of clustered roots.

use std::sync::Arc;

use super::newton::{NewtonPolygon, Segment};
use super::residue::{lcm_all, Elem, FPoly, Fq};
use super::scalar::{Scalar, Stage};
use super::tower::{Level, Tower};
use super::upoly::{coerce_all, common_stage, derivative, eval, taylor_shift};
use super::valq::{floor_q, lcm_u32, Val, Q};
use crate::error::{Error, Result};

/// Recursion depth allowed when separating clustered roots.
pub const MAX_CLUSTER_DEPTH: usize = 48;

/// All roots of `f` with multiplicities (multiplicities of clusters that
/// cannot be separated at the working precision are merged).
pub fn split_roots(tower: &Tower, f: &[Scalar]) -> Result<Vec<(Scalar, usize)>> {
    let f = super::upoly::trim(f.to_vec());
    if f.len() < 2 {
        return Err(Error::Invalid("split_roots needs degree >= 1".into()));
    }
    let out = split_rec(tower, &f, 0, false)?;
    let total: usize = out.iter().map(|r| r.1).sum();
    if total != f.len() - 1 {
        return Err(Error::CheckFailed(format!("root multiplicities sum to {total}, degree is {}", f.len() - 1)));
    }
    Ok(out)
}

fn split_rec(tower: &Tower, f: &[Scalar], depth: usize, positive_only: bool) -> Result<Vec<(Scalar, usize)>> {
    if depth > MAX_CLUSTER_DEPTH {
        return Err(Error::WildCase("root clustering recursion depth exceeded".into()));
    }
    let st = common_stage(f);
    let f = coerce_all(f, &st);
    let np = NewtonPolygon::of(&f)?;
    let mut out = Vec::new();
    if np.zero_order > 0 {
        out.push((zero_cluster(&f, np.zero_order, &st)?, np.zero_order));
    }
    for seg in &np.segments {
        if positive_only && seg.slope <= Q::from_integer(0) {
            continue;
        }
        out.extend(split_segment(tower, &f, &st, seg, depth)?);
    }
    Ok(out)
}

/// The cluster of roots at 0 produced by exactly or approximately vanishing
/// low coefficients.
fn zero_cluster(f: &[Scalar], k0: usize, st: &Stage) -> Result<Scalar> {
    let lead = f[k0].val_exact()?;
    let mut bound: Option<Q> = None;
    for (i, c) in f.iter().enumerate().take(k0) {
        if let Val::AtLeast(b) = c.val() {
            let r = (b - lead) / Q::from_integer((k0 - i) as i64);
            bound = Some(bound.map_or(r, |x: Q| x.min(r)));
        }
    }
    Ok(match bound {
        None => Scalar::zero(st),
        Some(b) => Scalar::small(st, floor_q(&(b * Q::from_integer(st.e as i64)))),
    })
}

fn split_segment(tower: &Tower, f: &[Scalar], st: &Stage, seg: &Segment, depth: usize) -> Result<Vec<(Scalar, usize)>> {
    let p = st.level.p;
    let big_e = lcm_u32(st.e, *seg.slope.denom() as u32);
    if (big_e as u64).is_multiple_of(p) {
        return Err(Error::WildCase(format!(
            "roots of valuation {} need ramification index {big_e} divisible by p = {p}",
            seg.slope
        )));
    }
    let st_e = st.with_e(big_e);
    let c = Scalar::pi_pow(&st_e, (seg.slope * Q::from_integer(big_e as i64)).to_integer());
    let mut scaled = Vec::with_capacity(f.len());
    let mut ck = Scalar::one(&st_e);
    for a in f {
        scaled.push(&a.coerce(&st_e) * &ck);
        ck = &ck * &c;
    }
    let lam = scaled[seg.start].val_exact()? * Q::from_integer(big_e as i64);
    let unscale = Scalar::pi_pow(&st_e, -lam.to_integer());
    let big_f: Vec<Scalar> = scaled.iter().map(|a| a * &unscale).collect();
    let mut rho: FPoly = Vec::new();
    for a in &big_f[seg.start..=seg.end] {
        rho.push(a.residue()?);
    }
    let res_roots = residue_roots(tower, &st.level, &rho)?;
    let mut out = Vec::new();
    for (lvl, r_bar, mu) in res_roots {
        let stu = Stage::new(lvl, big_e);
        let r = Scalar::from_level_elem(&stu, &r_bar);
        let fu = coerce_all(&big_f, &stu);
        if mu == 1 {
            let y = hensel_lift(&fu, &r)?;
            out.push((&c * &y, 1));
        } else {
            let g = taylor_shift(&fu, &r);
            let sub = split_rec(tower, &g, depth + 1, true)?;
            let got: usize = sub.iter().map(|s| s.1).sum();
            if got != mu {
                return Err(Error::PrecisionExhausted(format!(
                    "cluster of multiplicity {mu} resolved into {got} roots"
                )));
            }
            for (t, m) in sub {
                out.push((&c * &(&r + &t), m));
            }
        }
    }
    let total: usize = out.iter().map(|r| r.1).sum();
    if total != seg.length {
        return Err(Error::CheckFailed(format!("segment of length {} produced {total} roots", seg.length)));
    }
    Ok(out)
}

fn embed_elem(e: &Elem, dim: usize) -> Elem {
    let mut v = vec![0u64; dim];
    v[..e.len()].copy_from_slice(e);
    v
}

/// Largest residue degree `[k : F_p]` the tower may grow to.
pub const MAX_RESIDUE_DEGREE: usize = 24;

/// Roots of a residue polynomial, searched in the polynomial's own level,
/// then in higher existing levels, extending the tower at the top when needed.
pub(crate) fn residue_roots(tower: &Tower, level: &Arc<Level>, rho: &FPoly) -> Result<Vec<(Arc<Level>, Elem, usize)>> {
    let deg = rho.len() - 1;
    let mut idx = level.index;
    loop {
        let lvl = tower.level(idx).expect("level index within the tower");
        let fq = Fq::new(&lvl);
        let poly: FPoly = rho.iter().map(|c| embed_elem(c, lvl.dim)).collect();
        let roots = fq.roots(&poly);
        let found: usize = roots.iter().map(|r| r.1).sum();
        if found == deg {
            return Ok(roots.into_iter().map(|(r, m)| (lvl.clone(), r, m)).collect());
        }
        if idx + 1 < tower.num_levels() {
            idx += 1;
            continue;
        }
        let mut rest = fq.monic(&poly);
        for (r, m) in &roots {
            let lin = vec![fq.neg(r), fq.one()];
            for _ in 0..*m {
                rest = fq.divrem(&rest, &lin).0;
            }
        }
        let k = lcm_all(&fq.factor_degrees(&rest));
        let top = tower.top().dim;
        if top * k > MAX_RESIDUE_DEGREE {
            return Err(Error::ResidueDegreeExceeded { degree: top * k, bound: MAX_RESIDUE_DEGREE });
        }
        tower.extend(idx, k);
        idx += 1;
    }
}

/// Newton iteration from an approximate simple root.
pub fn hensel_lift(f: &[Scalar], r0: &Scalar) -> Result<Scalar> {
    let df = derivative(f);
    let f0 = eval(f, r0);
    let d0 = eval(&df, r0);
    let vd = d0.val_exact().map_err(|_| Error::HenselPreconditionFailed)?;
    match f0.val() {
        Val::Inf => return Ok(r0.clone()),
        Val::Exact(v) | Val::AtLeast(v) => {
            if v <= vd * Q::from_integer(2) {
                return Err(Error::HenselPreconditionFailed);
            }
        }
    }
    let mut r = r0.clone();
    for _ in 0..128 {
        let fr = eval(f, &r);
        let dr = eval(&df, &r);
        let corr = fr.div(&dr)?;
        let done = fr.is_approx_zero();
        r = &r - &corr;
        if done {
            return Ok(r);
        }
    }
    Err(Error::PrecisionExhausted("Hensel iteration did not converge".into()))
}
