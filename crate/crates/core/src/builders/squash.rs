//! Box indicators from squashing activations: the bump
//! `h_i(x) = s(c1 (2x + c - 2 a_i)) - s(c1 (2x - c - 2 b_i))`,
//! its recentering `h~_i = h_i - (1 - 2 eta)`, the aggregate
//! `phi0(x) = s(c2 (2 sum_i h~_i(x_i) + zeta))`, and the composition with a
//! ReLU trapezoid that turns `phi0` into an exact 0/1 indicator.
//!
//! `s` is the activation rescaled to limits 0 and 1; for the logistic sigmoid
//! it is the activation itself, for tanh and the rational sigmoid it is the
//! affine rescaling `(rho + 1)/2`, folded into the adjacent affine layers.

use super::gadgets::bump_1d;
use super::{CompactBox, Enlargement};
use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::network::{AffineLayer, Network};

/// Derived parameters of the squashing construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashParams {
    pub zeta: f64,
    /// `eta = (1 - zeta) / (2 (n0 - 1) + 3)`.
    pub eta: f64,
    /// Threshold with `s(x) <= eta` for `x <= -C_eta` and `s(x) >= 1 - eta`
    /// for `x >= C_eta`.
    pub c_eta: f64,
    /// `C_eta / c`.
    pub c1: f64,
    /// `C_eta / zeta`.
    pub c2: f64,
    pub n0: usize,
}

/// Limits `(lo, hi)` of a monotone sigmoidal activation, used to rescale it
/// to a squashing function with limits 0 and 1.
fn squashing_limits(act: &ActivationKind) -> Result<(f64, f64)> {
    match act {
        ActivationKind::LogisticSigmoid => Ok((0.0, 1.0)),
        ActivationKind::Tanh => Ok((-1.0, 1.0)),
        ActivationKind::RationalSigmoid => Ok((-1.0, 1.0)),
        // Custom activations are taken at their word: squashing means
        // monotone with limits 0 and 1 (checked numerically below).
        ActivationKind::Custom { .. } => Ok((0.0, 1.0)),
        other => Err(Error::input(format!(
            "activation `{}` is not squashing (monotone sigmoidal)",
            other.tag()
        ))),
    }
}

/// Rescaled evaluation `s(x) = (rho(x) - lo) / (hi - lo)`.
fn squash_eval(act: &ActivationKind, lo: f64, hi: f64, x: f64) -> f64 {
    (act.apply(x) - lo) / (hi - lo)
}

/// Threshold `C_eta` for the rescaled activation: closed form for the three
/// built-in sigmoids, bisection on `[0, 1e6]` otherwise.
fn threshold_c_eta(act: &ActivationKind, lo: f64, hi: f64, eta: f64) -> Result<f64> {
    match act {
        // s(C) = 1 - eta  =>  C = ln((1 - eta)/eta).
        ActivationKind::LogisticSigmoid => Ok(((1.0 - eta) / eta).ln()),
        // (1 + tanh C)/2 = 1 - eta  =>  C = atanh(1 - 2 eta) = ln((1-eta)/eta)/2.
        ActivationKind::Tanh => Ok(0.5 * ((1.0 - eta) / eta).ln()),
        // (1 + C/(1+C))/2 = 1 - eta  =>  C = (1 - 2 eta) / (2 eta).
        ActivationKind::RationalSigmoid => Ok((1.0 - 2.0 * eta) / (2.0 * eta)),
        custom @ ActivationKind::Custom { .. } => {
            // Monotonicity spot check before trusting the bisection bracket.
            let mut prev = squash_eval(custom, lo, hi, -1e6);
            let mut x = -1e6;
            while x <= 1e6 {
                let v = squash_eval(custom, lo, hi, x);
                if v < prev - 1e-12 {
                    return Err(Error::input(format!(
                        "custom activation is not monotone near x = {x}"
                    )));
                }
                prev = v;
                x += 2e5;
            }
            // Smallest c with s(c) >= 1 - eta and s(-c) <= eta.
            let satisfied =
                |c: f64| squash_eval(custom, lo, hi, c) >= 1.0 - eta && squash_eval(custom, lo, hi, -c) <= eta;
            if !satisfied(1e6) {
                return Err(Error::Numeric(
                    "bisection bracket [0, 1e6] does not reach the squashing limits".to_string(),
                ));
            }
            let (mut lo_c, mut hi_c) = (0.0f64, 1e6f64);
            for _ in 0..1000 {
                let mid = 0.5 * (lo_c + hi_c);
                if satisfied(mid) {
                    hi_c = mid;
                } else {
                    lo_c = mid;
                }
                if hi_c - lo_c <= 1e-12 * hi_c.max(1.0) {
                    return Ok(hi_c);
                }
            }
            Err(Error::Numeric(
                "bisection for C_eta did not converge within 1000 iterations".to_string(),
            ))
        }
        _ => unreachable!("filtered by squashing_limits"),
    }
}

/// Build `phi0` for the box `K` with margin `c`: a network with activation
/// `rho1` whose output lies in `(1 - eta, 1]` on `K` and in `[0, eta)`
/// outside `J`, together with the derived parameters.
pub fn squash_bump(
    k: &CompactBox,
    c: &Enlargement,
    zeta: f64,
    rho1: &ActivationKind,
) -> Result<(Network, SquashParams)> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::input(format!("zeta must lie in (0,1), got {zeta}")));
    }
    let (lo, hi) = squashing_limits(rho1)?;
    let n0 = k.dim();
    let eta = (1.0 - zeta) / (2.0 * (n0 as f64 - 1.0) + 3.0);
    let c_eta = threshold_c_eta(rho1, lo, hi, eta)?;
    let cv = c.value();
    let c1 = c_eta / cv;
    let c2 = c_eta / zeta;
    let alpha = 1.0 / (hi - lo);

    // Layer 1: 2 n0 rho1-neurons, rho1(c1 (2 x_i + c - 2 a_i)) and
    // rho1(c1 (2 x_i - c - 2 b_i)).
    let mut w1 = Vec::with_capacity(2 * n0 * n0);
    let mut b1 = Vec::with_capacity(2 * n0);
    for i in 0..n0 {
        let mut row_a = vec![0.0; n0];
        let mut row_b = vec![0.0; n0];
        row_a[i] = 2.0 * c1;
        row_b[i] = 2.0 * c1;
        w1.extend_from_slice(&row_a);
        w1.extend_from_slice(&row_b);
        b1.push(c1 * (cv - 2.0 * k.lower()[i]));
        b1.push(c1 * (-cv - 2.0 * k.upper()[i]));
    }
    let layer1 = AffineLayer::uniform(n0, 2 * n0, w1, b1, rho1.clone())?;

    // Layer 2: one rho1-neuron on c2 (2 sum h~_i + zeta). With
    // h_i = alpha (rho_a - rho_b) the affine form is
    //   sum_i 2 c2 alpha (rho_a_i - rho_b_i) + c2 (zeta - 2 n0 (1 - 2 eta)).
    let mut w2 = Vec::with_capacity(2 * n0);
    for _ in 0..n0 {
        w2.push(2.0 * c2 * alpha);
        w2.push(-2.0 * c2 * alpha);
    }
    let b2 = c2 * (zeta - 2.0 * n0 as f64 * (1.0 - 2.0 * eta));
    let layer2 = AffineLayer::uniform(2 * n0, 1, w2, vec![b2], rho1.clone())?;

    // Readout: rescale back to [0, 1]: phi0 = alpha (rho1(pre) - lo).
    let readout =
        AffineLayer::uniform(1, 1, vec![alpha], vec![-alpha * lo], ActivationKind::Identity)?;

    let net = Network::new(vec![layer1, layer2, readout])?;
    Ok((
        net,
        SquashParams {
            zeta,
            eta,
            c_eta,
            c1,
            c2,
            n0,
        },
    ))
}

/// Compose `phi0` with the ReLU trapezoid with breakpoints
/// `(eta, 1 - eta, 1, 2 (1 - eta))`, producing an indicator `U1` that is
/// exactly 1 on `K` and exactly 0 outside `J`.
pub fn squash_box_indicator(phi0: &Network, params: &SquashParams) -> Result<Network> {
    let eta = params.eta;
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::input(format!(
            "squash indicator requires eta in (0, 1/2), got {eta}"
        )));
    }
    if phi0.output_dim() != 1 {
        return Err(Error::input("phi0 must have scalar output"));
    }
    // Trapezoid rising on [eta, 1-eta], plateau [1-eta, 1], falling on
    // [1, 2(1-eta)]: bump_1d(a = 1-eta, b = 1, c = 1-2eta).
    let trapezoid = bump_1d(1.0 - eta, 1.0, 1.0 - 2.0 * eta)?;
    phi0.then(&trapezoid)
}
