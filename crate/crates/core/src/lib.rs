//! Exact computation of the dynamical invariants of a polynomial over a
//! non-archimedean field: Trucco's trees `Γ_n`, crucial curvatures and their
//! barycenters, ordRes, and the certified minimal resultant locus.
//!
//! All valuations, radii and distances are exact rationals; elements of
//! tamely ramified extensions of `Q_p` are carried at a fixed relative
//! precision with explicit precision tracking.

pub mod berkline;
pub mod crucial;
pub mod error;
pub mod polydyn;
pub mod report;
pub mod resloc;
pub mod trucco_tree;
pub mod valfield;

pub use berkline::{Ball, BerkPoint, Direction};
pub use crucial::{BarycenterResult, TreeMeasure};
pub use error::{Error, Result};
pub use polydyn::{FiberEntry, Poly};
pub use resloc::{DepthReport, LocusMethod, MinResLocResult, OrdResSample};
pub use trucco_tree::{DynTree, TreeFamily};
pub use valfield::{Scalar, Stage, Tower, Val, ValQ, Q};
