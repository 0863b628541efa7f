//! Generalized Hölder seminorms on finite metric spaces via chaining nets,
//! and Monte Carlo checks of sharp supremum bounds for stochastic integrals.
//!
//! The crate is organised bottom-up:
//!
//! - [`modulus`]: moduli of continuity and their dyadic growth constants.
//! - [`metric`]: finite metric spaces, greedy covers, dimension fitting.
//! - [`chaining`]: nested nets, edge sets and the numbered pair sequence.
//! - [`holder`]: exact and embedded seminorms and their comparison constants.
//! - [`stochastic`]: path simulation and maximal-inequality experiments.
//! - [`pam`]: the 1D parabolic Anderson model and its space-time modulus.

pub mod chaining;
pub mod error;
pub mod holder;
pub mod mc;
pub mod metric;
pub mod modulus;
pub mod pam;
pub mod report;
pub mod rng;
pub mod samples;
pub mod stochastic;

pub use error::{Error, Result};
