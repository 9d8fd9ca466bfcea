//! Convolution of polynomial maps into finite groups `G(Z/p^k)`.
//!
//! Fiber counting, densities, non-commutative Fourier analysis, exponential
//! sums and Igusa zeta functions, plus the sign-vector construction of a
//! compactly supported trig polynomial whose norms separate `L^1` from
//! `L^{1+eps}`.

pub mod error;
pub mod ring;
pub mod poly;
pub mod linalg;
pub mod group;
pub mod morphism;
pub mod counting;
pub mod cache;
pub mod density;
pub mod fourier;

pub mod sums;
pub mod appendix;

pub use error::{Error, Result};
