//! Exact 1-D continuous piecewise-linear interpolants as ReLU networks.

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::network::{AffineLayer, Network};

/// ReLU network exactly equal to the continuous piecewise-linear interpolant
/// through `(knots, values)` with the given tail slopes:
///
/// `phi(x) = v_0 + s_0 (x - k_0) + sum_j (s_{j+1} - s_j) relu(x - k_j)`
///
/// where `s_0 = left_slope`, `s_j` are the segment slopes and the last slope
/// is `right_slope`. Callers building compactly supported pieces pass tail
/// slopes 0.
pub fn cpwl_interpolant_1d(
    knots: &[f64],
    values: &[f64],
    left_slope: f64,
    right_slope: f64,
) -> Result<Network> {
    if knots.len() < 2 {
        return Err(Error::input("interpolant needs at least 2 knots"));
    }
    if knots.len() != values.len() {
        return Err(Error::input(format!(
            "{} knots but {} values",
            knots.len(),
            values.len()
        )));
    }
    if !knots.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::input("knots must be strictly increasing"));
    }
    if !(left_slope.is_finite() && right_slope.is_finite())
        || knots.iter().chain(values.iter()).any(|v| !v.is_finite())
    {
        return Err(Error::input("knots, values and slopes must be finite"));
    }

    let m = knots.len();
    // slopes[0] = left tail, slopes[j] = segment (k_{j-1}, k_j), slopes[m] = right tail.
    let mut slopes = Vec::with_capacity(m + 1);
    slopes.push(left_slope);
    for j in 1..m {
        slopes.push((values[j] - values[j - 1]) / (knots[j] - knots[j - 1]));
    }
    slopes.push(right_slope);

    // Hidden layer: relu(x - k_j) for each knot plus one identity register
    // carrying x for the left-tail slope term.
    let n_hidden = m + 1;
    let mut w1 = Vec::with_capacity(n_hidden);
    let mut b1 = Vec::with_capacity(n_hidden);
    let mut tags = Vec::with_capacity(n_hidden);
    for k in knots {
        w1.push(1.0);
        b1.push(-k);
        tags.push(ActivationKind::Relu);
    }
    w1.push(1.0);
    b1.push(0.0);
    tags.push(ActivationKind::Identity);
    let hidden = AffineLayer::new(1, n_hidden, w1, b1, tags)?;

    let mut w2 = Vec::with_capacity(n_hidden);
    for j in 0..m {
        w2.push(slopes[j + 1] - slopes[j]);
    }
    w2.push(left_slope);
    let readout = AffineLayer::uniform(
        n_hidden,
        1,
        w2,
        vec![values[0] - left_slope * knots[0]],
        ActivationKind::Identity,
    )?;
    Network::new(vec![hidden, readout])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct piecewise-linear evaluation, the oracle for the network form.
    pub(crate) fn cpwl_oracle(
        knots: &[f64],
        values: &[f64],
        left_slope: f64,
        right_slope: f64,
        x: f64,
    ) -> f64 {
        let m = knots.len();
        if x <= knots[0] {
            return values[0] + left_slope * (x - knots[0]);
        }
        if x >= knots[m - 1] {
            return values[m - 1] + right_slope * (x - knots[m - 1]);
        }
        let j = knots.partition_point(|k| *k <= x);
        let (k0, k1) = (knots[j - 1], knots[j]);
        let (v0, v1) = (values[j - 1], values[j]);
        v0 + (v1 - v0) / (k1 - k0) * (x - k0)
    }

    #[test]
    fn single_segment_with_flat_tails() {
        let net = cpwl_interpolant_1d(&[0.0, 1.0], &[0.0, 1.0], 0.0, 0.0).unwrap();
        assert!((net.eval_scalar(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((net.eval_scalar(7.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((net.eval_scalar(-3.0).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(cpwl_interpolant_1d(&[0.0], &[1.0], 0.0, 0.0).is_err());
        assert!(cpwl_interpolant_1d(&[0.0, 0.0], &[1.0, 2.0], 0.0, 0.0).is_err());
        assert!(cpwl_interpolant_1d(&[1.0, 0.0], &[1.0, 2.0], 0.0, 0.0).is_err());
        assert!(cpwl_interpolant_1d(&[0.0, 1.0], &[1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn sin_interpolant_matches_direct_evaluation() {
        // 401 uniform knots over [-2.5, 2.5] for sin(5x).
        let m = 401;
        let knots: Vec<f64> = (0..m).map(|i| -2.5 + 5.0 * i as f64 / (m - 1) as f64).collect();
        let values: Vec<f64> = knots.iter().map(|x| (5.0 * x).sin()).collect();
        let net = cpwl_interpolant_1d(&knots, &values, 0.0, 0.0).unwrap();
        let mut max_err = 0.0f64;
        for i in 0..10_000 {
            // Off-knot points across a wider range than the knots.
            let x = -3.1 + 6.2 * (i as f64 + 0.5) / 10_000.0;
            let got = net.eval_scalar(x).unwrap();
            let want = cpwl_oracle(&knots, &values, 0.0, 0.0, x);
            max_err = max_err.max((got - want).abs());
        }
        assert!(max_err <= 1e-12, "max |net - interpolant| = {max_err}");
    }

    #[test]
    fn sin_interpolant_error_obeys_hat_bound() {
        // Classical bound for C^2 targets: sup |f - interp| <= mesh^2 |f''| / 8,
        // with |f''| = 25 for sin(5x).
        let m = 401;
        let knots: Vec<f64> = (0..m).map(|i| -2.5 + 5.0 * i as f64 / (m - 1) as f64).collect();
        let values: Vec<f64> = knots.iter().map(|x| (5.0 * x).sin()).collect();
        let net = cpwl_interpolant_1d(&knots, &values, 0.0, 0.0).unwrap();
        let mesh = 5.0 / (m - 1) as f64;
        let bound = mesh * mesh * 25.0 / 8.0;
        let mut max_err = 0.0f64;
        for i in 0..20_000 {
            let x = -2.0 + 4.0 * i as f64 / 19_999.0;
            let err = (net.eval_scalar(x).unwrap() - (5.0 * x).sin()).abs();
            max_err = max_err.max(err);
        }
        assert!(
            max_err <= bound,
            "sup error {max_err} exceeds hat bound {bound}"
        );
    }

    #[test]
    fn nonzero_tail_slopes() {
        let knots = [-1.0, 0.0, 2.0];
        let values = [1.0, -1.0, 3.0];
        let net = cpwl_interpolant_1d(&knots, &values, -0.5, 2.5).unwrap();
        for i in 0..5000 {
            let x = -10.0 + 20.0 * i as f64 / 4999.0;
            let got = net.eval_scalar(x).unwrap();
            let want = cpwl_oracle(&knots, &values, -0.5, 2.5, x);
            assert!((got - want).abs() <= 1e-12, "at {x}: {got} vs {want}");
        }
    }
}
