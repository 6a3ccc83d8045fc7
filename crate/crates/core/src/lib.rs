// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod error;
pub mod extension;
pub mod field;
pub mod geometry;
pub mod monotone;
pub mod nonlinearity;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{GridField, SpectralField};
pub use geometry::{Domain, EigenBasis, Grid};
pub use spectral::FracExponent;
