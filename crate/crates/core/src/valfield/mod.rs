//! Exact valuations and finite-precision arithmetic in tamely ramified
//! extensions of `Q_p`, with Newton polygons and root splitting.

pub mod literal;
pub mod newton;
pub(crate) mod residue;
pub mod roots;
pub mod scalar;
pub mod tower;
pub mod upoly;
pub mod valq;

pub use literal::{format_exact, format_scalar, parse_scalar};
pub use newton::{NewtonPolygon, Segment};
pub use roots::{hensel_lift, split_roots};
pub use scalar::{Scalar, ScalarKey, Stage};
pub use tower::{Level, Tower};
pub use valq::{fmt_q, parse_q, q, qi, Val, ValQ, Q};

use crate::error::Result;

/// Valuation of a scalar (exact rational, or +∞ for the exact zero).
pub fn valuation(a: &Scalar) -> Result<ValQ> {
    match a.val() {
        Val::Inf => Ok(ValQ::Inf),
        Val::Exact(v) => Ok(ValQ::Fin(v)),
        Val::AtLeast(_) => Err(crate::error::Error::PrecisionExhausted("valuation of an unresolved element".into())),
    }
}

/// Reduction modulo the maximal ideal, as a vector over `F_p` in the basis of
/// the scalar's residue field.
pub fn residue_image(a: &Scalar) -> Result<Vec<u64>> {
    a.residue()
}

/// An irreducible factor class of a reduced polynomial.
#[derive(Clone, Debug)]
pub struct ResidueFactor {
    pub degree: usize,
    pub multiplicity: usize,
    /// Number of distinct irreducible factors with this degree and multiplicity.
    pub count: usize,
    /// Lifts of the roots when they lie in the residue field of the input.
    pub roots: Vec<Scalar>,
}

/// Factors the polynomial over the residue field whose `k`-th coefficient is
/// the leading residue `x/π^v(x)` of `terms[k]`, or zero for `None`.
pub fn residue_factors(terms: &[Option<Scalar>]) -> Result<Vec<ResidueFactor>> {
    use crate::error::Error;
    let st = terms
        .iter()
        .flatten()
        .fold(None::<Stage>, |acc, x| Some(acc.map_or(x.stage().clone(), |s| Stage::join(&s, x.stage()))))
        .ok_or_else(|| Error::Invalid("zero reduction".into()))?;
    let st = st.with_e(1);
    let lvl = st.level().clone();
    let mut f: residue::FPoly = Vec::with_capacity(terms.len());
    for t in terms {
        let c = match t {
            None => vec![0u64; lvl.dim],
            Some(x) => {
                let y = x.coerce(&Stage::join(&st, x.stage()));
                let (_, _, coords) = y
                    .unit_coords()
                    .ok_or_else(|| Error::PrecisionExhausted("reduction of an unresolved coefficient".into()))?;
                coords[..lvl.dim].iter().map(|c| c % lvl.p).collect()
            }
        };
        f.push(c);
    }
    let fq = residue::Fq::new(&lvl);
    let f = fq.trim(f);
    let linear: Vec<(residue::Elem, usize)> = fq.roots(&f);
    let mut out = Vec::new();
    for (degree, multiplicity, count) in fq.factor_pattern(&f) {
        let roots = if degree == 1 {
            linear.iter().filter(|r| r.1 == multiplicity).map(|r| Scalar::from_level_elem(&st, &r.0)).collect()
        } else {
            Vec::new()
        };
        out.push(ResidueFactor { degree, multiplicity, count, roots });
    }
    Ok(out)
}
