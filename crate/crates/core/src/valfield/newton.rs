use super::scalar::Scalar;
use super::valq::{fmt_q, Val, Q};
use crate::error::{Error, Result};

/// One edge of a Newton polygon.  `slope` is the common valuation of the
/// roots it accounts for; `start..end` are the coefficient indices it joins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub slope: Q,
    pub length: usize,
    pub start: usize,
    pub end: usize,
}

/// Lower convex hull of `{(k, v(a_k))}`, read as root valuations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Order of vanishing at 0 (exact zeros and unresolved low coefficients).
    pub zero_order: usize,
    /// Segments ordered by strictly increasing root valuation.
    pub segments: Vec<Segment>,
}

impl NewtonPolygon {
    pub fn of(coeffs: &[Scalar]) -> Result<NewtonPolygon> {
        let vals: Vec<Val> = coeffs.iter().map(|c| c.val()).collect();
        Self::from_vals(&vals)
    }

    pub fn from_vals(vals: &[Val]) -> Result<NewtonPolygon> {
        let deg = vals
            .iter()
            .rposition(|v| !matches!(v, Val::Inf))
            .ok_or_else(|| Error::Invalid("Newton polygon of the zero polynomial".into()))?;
        if !vals[deg].is_exact() {
            return Err(Error::PrecisionExhausted("leading coefficient unresolved".into()));
        }
        let k0 = vals.iter().position(|v| v.is_exact()).unwrap();
        let pts: Vec<(i64, Q)> = (k0..=deg).filter_map(|i| vals[i].exact().map(|v| (i as i64, v))).collect();
        let mut hull: Vec<(i64, Q)> = Vec::new();
        for pt in pts {
            while hull.len() >= 2 {
                let (x1, y1) = hull[hull.len() - 2];
                let (x2, y2) = hull[hull.len() - 1];
                let cross = (y2 - y1) * Q::from_integer(pt.0 - x1) - (pt.1 - y1) * Q::from_integer(x2 - x1);
                if cross >= Q::from_integer(0) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        for (i, v) in vals.iter().enumerate().take(deg).skip(k0 + 1) {
            if let Val::AtLeast(b) = v {
                let w = hull.windows(2).find(|w| w[0].0 <= i as i64 && i as i64 <= w[1].0).unwrap();
                let (x1, y1) = w[0];
                let (x2, y2) = w[1];
                let h = y1 + (y2 - y1) * Q::new(i as i64 - x1, x2 - x1);
                if *b <= h {
                    return Err(Error::PrecisionExhausted(format!(
                        "coefficient {i} unresolved below the Newton polygon (known >= {}, hull {})",
                        fmt_q(b),
                        fmt_q(&h)
                    )));
                }
            }
        }
        let mut segments: Vec<Segment> = hull
            .windows(2)
            .map(|w| Segment {
                slope: (w[0].1 - w[1].1) / Q::from_integer(w[1].0 - w[0].0),
                length: (w[1].0 - w[0].0) as usize,
                start: w[0].0 as usize,
                end: w[1].0 as usize,
            })
            .collect();
        segments.reverse();
        Ok(NewtonPolygon { zero_order: k0, segments })
    }

    /// Root valuations with multiplicity (`None` stands for the root 0).
    pub fn root_valuations(&self) -> Vec<Option<Q>> {
        let mut out = vec![None; self.zero_order];
        for s in &self.segments {
            out.extend(std::iter::repeat_n(Some(s.slope), s.length));
        }
        out
    }
}
