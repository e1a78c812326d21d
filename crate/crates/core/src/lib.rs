//! Networks with certified linear growth, and simulation-side verification of
//! SDE/ODE approximation bounds.
//!
//! The crate has two halves. The constructive half represents feed-forward
//! networks exactly ([`network`]), compiles gadget networks (identity blocks,
//! trapezoid bumps, min/max, box indicators, piecewise-linear interpolants,
//! clamping constructions, squashing indicators) in [`builders`], and issues
//! sound global growth certificates `|phi(x)| <= C~ (1 + |x|)` in [`certify`].
//! The empirical half simulates SDEs with shared Brownian increments
//! ([`sde`]), integrates ODE flows ([`flow`]), and computes the closed-form
//! constants of the quantitative error bounds ([`bounds`]). Coefficients and
//! targets are specified either as expressions ([`expr`]) or as serialized
//! networks.
//!
//! Simulation is bit-reproducible: ensembles are counter-indexed per
//! `(seed, path, step, component)` and reductions run in fixed order, so the
//! worker count never changes a result.

pub mod activation;
pub mod bounds;
pub mod builders;
pub mod certify;
mod error;
pub mod expr;
pub mod flow;
pub mod grid;
pub mod network;
pub mod rng;
pub mod sde;

pub use activation::ActivationKind;
pub use error::{Error, Result};
pub use expr::Expr;
pub use network::{AffineLayer, Diagnostic, EvalScratch, Network};
