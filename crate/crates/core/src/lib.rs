//! Design of constant-modulus slow-time radar codes whose slow-time
//! ambiguity function is suppressed over a range–Doppler interference map.
//!
//! The weighted interference energy is a quartic function of the code. It is
//! minimized on the complex-circle manifold by a Riemannian trust-region
//! solver ([`rtr`]), optionally wrapped in an alternating-direction penalty
//! loop ([`adpm`]).

pub mod adpm;
pub mod error;
pub mod manifold;
pub mod model;
pub mod quartic;
pub mod rtr;
pub mod run;
pub mod scenarios;
pub mod selfcheck;
mod trs;

pub use error::{Error, Result};
pub use model::{Code, InterferenceMap, MapBin, C64};
