//! Numerical simulation of the generalized quantum Zeno effect.
//!
//! A Markovian evolution `e^{t𝓛}` (or a time-dependent propagator) that is
//! intercepted `n` times by a quantum operation `M` with a spectral gap
//! converges, as `n → ∞`, to the evolution generated by `P𝓛P` on the range
//! of the spectral projector `P` of `M` for eigenvalue 1. The modules here
//! compute every object in that statement and the intermediate bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod error;
pub mod harness;
pub mod lindblad;
pub mod random;
pub mod spectral;
pub mod superop;
pub mod timedep;
pub mod zeno_static;

pub use error::{Error, Result};
