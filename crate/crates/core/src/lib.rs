//! Finite element laboratory for positive solutions of the planar
//! Lane–Emden problem `−Δu = u^p` in Ω, `u = 0` on ∂Ω.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod fem;
pub mod geometry;
pub mod numerics;
pub mod solver;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
