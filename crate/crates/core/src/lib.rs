//! Exact continued-fraction arithmetic and certified numerics for the
//! irrationality measure function psi(t) = min_{1<=q<=t} ||q alpha||, its
//! integral, the Gauss map's natural extension, and seeded statistical
//! experiments over uniformly drawn reals.
//!
//! Everything numeric is either exact (big integers, rationals, quadratic
//! surds) or a certified enclosure (directed-rounding f64 intervals), so
//! inequalities with constants a few decimals apart can be decided honestly.

pub mod cf;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod interval;
pub mod measure;
pub mod surd;

pub use cf::{ConvergentPair, ExtractedDigits, PartialQuotients, ReversedTail, TailEnclosure};
pub use error::{Error, Result};
pub use interval::{Interval, MeasuredValue};
pub use surd::QuadraticSurd;
