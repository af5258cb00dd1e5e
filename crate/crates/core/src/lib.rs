//! Exact arithmetic for quadratic twists of the modular curves X0(15) and X0(21):
//! reduction types, root numbers, truncated L-series evidence, a mod-ell
//! surjectivity check, point descent through a quadratic twist, and a search
//! for admissible multiquadratic fields.

pub mod cli;
pub mod curve;
pub mod descent;
pub mod error;
pub mod fieldsearch;
pub mod galois;
pub mod lseries;
pub mod numtheory;
pub mod reduction;
pub mod rootnum;
mod util;

pub use curve::{CurveTable, ShortModel, WeierstrassModel};
pub use error::{Error, Result};
pub use numtheory::Prime;
pub use reduction::{ReductionData, ReductionKind};
pub use rootnum::{RootNumber, Sign};
