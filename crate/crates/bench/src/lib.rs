//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use berktree::{Poly, Tower};

pub fn tower(p: u64) -> Arc<Tower> {
    Tower::new(p, None).expect("prime")
}

/// `(d-1) p z^d - d z^(d-1)`.
pub fn faber_family(t: &Arc<Tower>, d: usize) -> Poly {
    let p = t.prime();
    Poly::parse(t, &format!("{}z^{d} - {d}z^{}", (d as u64 - 1) * p, d - 1)).expect("polynomial")
}

/// `z^4/(4p^2) - (p+1) z^3/(3p^3) + z^2/(2p^3)`.
pub fn quartic_example(t: &Arc<Tower>) -> Poly {
    let p = t.prime();
    let s = format!("1/{}*z^4 - {}/{}*z^3 + 1/{}*z^2", 4 * p * p, p + 1, 3 * p * p * p, 2 * p * p * p);
    Poly::parse(t, &s).expect("polynomial")
}
