//! jitterlab: analysis, transformation, and simulation of sampled LTI
//! systems whose sampling clock is afflicted by timing jitter.
//!
//! A jittered sample interval is written (1 + ε_k)·ts with ε_k > -1. The
//! central fact the crate is built around: a system sampled with such a
//! clock is indistinguishable, sample by sample, from a jitter-free system
//! whose A and B matrices are scaled by (1 + ε_k). The [analysis] module
//! exposes that correspondence in both directions, [sim] checks it
//! numerically against direct integration, and [lti]/[matfun] provide the
//! discretization and matrix-function machinery underneath.

pub mod analysis;
pub mod error;
pub mod io;
pub mod jitter;
pub mod lti;
pub mod matfun;
pub mod sim;

pub use error::{Error, Result};
