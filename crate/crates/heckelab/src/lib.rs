//! Hecke modifications of vector bundles on the projective line over finite
//! fields: closed formulas, Hall algebra products, brute-force enumeration,
//! and unramified automorphic forms built on top of them.

pub mod bundles;
pub mod deltas;
pub mod error;
pub mod forms;
pub mod fpoly;
pub mod hall;
pub mod hecke;
pub mod oracle;
pub mod qcalc;
#[cfg(test)]
mod testutil;

pub use bundles::{BundleType, ClosedPoint, ProjBundleClass};
pub use deltas::DeltaVec;
pub use error::{Error, Result};
pub use hall::{HallElement, HallEngine, HallTerm};
pub use qcalc::{QPoly, QRat};
