//! Compilation of exact network gadgets: identity blocks, trapezoid bumps,
//! min/max, box indicators, 1-D piecewise-linear interpolants, clamping
//! constructions and squashing-activation indicators.
//!
//! Every builder returns an ordinary [`crate::Network`]; the gadgets are exact
//! piecewise-affine (or squashing-composed) functions, and the tests pin them
//! against independent scalar oracles.

mod approx;
mod clamp;
mod cpwl;
mod gadgets;
mod squash;

pub use approx::{constrained_approximator, ApproxMode, ApproxParams, ConstrainedApprox};
pub use clamp::{clamp_network, clamp_network_with, clamp_scalar_range, ClampParams, ClampedNetwork};
pub use cpwl::cpwl_interpolant_1d;
pub use gadgets::{box_indicator, bump_1d, max_gadget, min_gadget, relu_identity_block};
pub use squash::{squash_bump, squash_box_indicator, SquashParams};

use crate::error::{Error, Result};

/// Axis-aligned product of closed intervals; the domain of all approximation
/// claims.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CompactBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<CompactBox> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::input("box bounds must be non-empty and equal length"));
        }
        for (i, (a, b)) in lower.iter().zip(upper.iter()).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::input(format!(
                    "box component {i} requires finite lower < upper, got [{a}, {b}]"
                )));
            }
        }
        Ok(CompactBox { lower, upper })
    }

    /// One-dimensional interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<CompactBox> {
        CompactBox::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(xi, (a, b))| *xi >= *a && *xi <= *b)
    }

    /// The enlargement `J`: each interval widened by the margin on both sides.
    pub fn enlarged(&self, margin: &Enlargement) -> CompactBox {
        let c = margin.value();
        CompactBox {
            lower: self.lower.iter().map(|a| a - c).collect(),
            upper: self.upper.iter().map(|b| b + c).collect(),
        }
    }
}

/// Positive margin `c` turning `K` into `J = prod [a_i - c, b_i + c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enlargement(f64);

impl Enlargement {
    pub fn new(c: f64) -> Result<Enlargement> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::input(format!("enlargement margin must be > 0, got {c}")));
        }
        Ok(Enlargement(c))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}
