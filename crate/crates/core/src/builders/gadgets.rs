//! Exact ReLU gadgets: identity blocks, trapezoid bumps, min/max, and the
//! box indicator `U(x) = min_i U_i(x_i)`.
//!
//! Saturation in these gadgets is arranged so that a saturated ReLU sees a
//! strictly non-positive pre-activation: its output is then exactly 0.0 in
//! floating point, which makes plateaus exactly 1 and tails exactly 0 rather
//! than merely close. The clamping construction inherits exact vanishing
//! outside the enlargement `J` from this.

use super::{CompactBox, Enlargement};
use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::network::{AffineLayer, Network};

/// In-register pass-through shift for multi-layer assemblies whose
/// intermediate values lie in `[0, 1]`: `2 + 1` per the automatic rule
/// "2 plus the bound on intermediate values".
pub(crate) const UNIT_REGISTER_SHIFT: f64 = 3.0;

/// One-layer ReLU block computing the identity `x -> x` exactly on all inputs
/// with `min_i x_i >= -shift`, via `relu(x + N) - N`.
///
/// Outside the validity region the block saturates to `-N` componentwise;
/// this is documented behavior, not an error.
pub fn relu_identity_block(dim: usize, shift: f64) -> Result<Network> {
    if dim == 0 {
        return Err(Error::input("identity block needs dim >= 1"));
    }
    if !(shift.is_finite() && shift > 0.0) {
        return Err(Error::input(format!("identity shift must be > 0, got {shift}")));
    }
    let mut w1 = vec![0.0; dim * dim];
    let mut w2 = vec![0.0; dim * dim];
    for i in 0..dim {
        w1[i * dim + i] = 1.0;
        w2[i * dim + i] = 1.0;
    }
    let hidden = AffineLayer::uniform(dim, dim, w1, vec![shift; dim], ActivationKind::Relu)?;
    let readout = AffineLayer::uniform(dim, dim, w2, vec![-shift; dim], ActivationKind::Identity)?;
    Network::new(vec![hidden, readout])
}

/// ReLU network computing the continuous piecewise-affine trapezoid: 0 on
/// `(-inf, a-c]`, affine up to 1 on `[a-c, a]`, 1 on `[a, b]`, affine down on
/// `[b, b+c]`, 0 on `[b+c, inf)`.
///
/// Realization: two ReLU layers of enhanced neurons,
/// `U(x) = relu(1 - relu((a-x)/c) - relu((x-b)/c))`.
/// Both edge neurons are exactly zero on the plateau, and the outer neuron is
/// exactly zero outside `[a-c, b+c]`, so the plateau value is exactly 1 and
/// the tails are exactly 0.
pub fn bump_1d(a: f64, b: f64, c: f64) -> Result<Network> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::input(format!("bump requires a < b, got a={a}, b={b}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::input(format!("bump edge width must be > 0, got c={c}")));
    }
    let (edges, outer, readout) = bump_layers(a, b, c, 0)?;
    Network::new(vec![edges, outer, readout])
}

/// The three layers of `bump_1d` for input coordinate `coord` of an
/// `in_dim`-dimensional input; `in_dim == coord + 1` callers use it directly.
fn bump_layers(a: f64, b: f64, c: f64, coord: usize) -> Result<(AffineLayer, AffineLayer, AffineLayer)> {
    let in_dim = coord + 1;
    let w_left = -1.0 / c;
    let w_right = 1.0 / c;
    let mut row_left = vec![0.0; in_dim];
    let mut row_right = vec![0.0; in_dim];
    row_left[coord] = w_left;
    row_right[coord] = w_right;
    // Biases chosen so the pre-activations vanish exactly at the inner
    // breakpoints: the bias is the negated eval-time product.
    let edges = AffineLayer::uniform(
        in_dim,
        2,
        [row_left, row_right].concat(),
        vec![-(w_left * a), -(w_right * b)],
        ActivationKind::Relu,
    )?;
    let outer = AffineLayer::uniform(2, 1, vec![-1.0, -1.0], vec![1.0], ActivationKind::Relu)?;
    let readout = AffineLayer::uniform(1, 1, vec![1.0], vec![0.0], ActivationKind::Identity)?;
    Ok((edges, outer, readout))
}

/// Exact pairwise maximum, `max(x, y) = relu(x - y) + y`.
pub fn max_gadget() -> Network {
    let hidden = AffineLayer::new(
        2,
        2,
        vec![1.0, -1.0, 0.0, 1.0],
        vec![0.0, 0.0],
        vec![ActivationKind::Relu, ActivationKind::Identity],
    )
    .expect("static layer");
    let readout =
        AffineLayer::uniform(2, 1, vec![1.0, 1.0], vec![0.0], ActivationKind::Identity)
            .expect("static layer");
    Network::new(vec![hidden, readout]).expect("static network")
}

/// Exact pairwise minimum, `min(x, y) = x - relu(x - y)`.
pub fn min_gadget() -> Network {
    let hidden = AffineLayer::new(
        2,
        2,
        vec![1.0, -1.0, 1.0, 0.0],
        vec![0.0, 0.0],
        vec![ActivationKind::Relu, ActivationKind::Identity],
    )
    .expect("static layer");
    let readout =
        AffineLayer::uniform(2, 1, vec![-1.0, 1.0], vec![0.0], ActivationKind::Identity)
            .expect("static layer");
    Network::new(vec![hidden, readout]).expect("static network")
}

/// ReLU network computing `min_i U_i(x_i)` for the per-coordinate trapezoids
/// of `K` enlarged by `c`: value 1 on `K`, exactly 0 outside `J`, in `[0, 1]`
/// everywhere.
///
/// Built by evaluating all 1-D bumps in parallel and chaining them through
/// `min(m, u) = m - relu(m - u)`, carrying pending values in ReLU in-register
/// neurons `relu(v + N)` with the automatic shift `N = 3` (intermediates are
/// bounded by 1).
pub fn box_indicator(k: &CompactBox, c: &Enlargement) -> Result<Network> {
    let n = k.dim();
    let cv = c.value();
    let shift = UNIT_REGISTER_SHIFT;

    // Layer 1: 2n edge neurons, relu((a_i - x_i)/c) and relu((x_i - b_i)/c).
    let mut w1 = Vec::with_capacity(2 * n * n);
    let mut b1 = Vec::with_capacity(2 * n);
    for i in 0..n {
        let w_left = -1.0 / cv;
        let w_right = 1.0 / cv;
        let mut row_left = vec![0.0; n];
        let mut row_right = vec![0.0; n];
        row_left[i] = w_left;
        row_right[i] = w_right;
        w1.extend_from_slice(&row_left);
        w1.extend_from_slice(&row_right);
        b1.push(-(w_left * k.lower()[i]));
        b1.push(-(w_right * k.upper()[i]));
    }
    let layer1 = AffineLayer::uniform(n, 2 * n, w1, b1, ActivationKind::Relu)?;

    // Layer 2: n outer neurons, u_i = relu(1 - left_i - right_i).
    let mut w2 = vec![0.0; n * 2 * n];
    for i in 0..n {
        w2[i * 2 * n + 2 * i] = -1.0;
        w2[i * 2 * n + 2 * i + 1] = -1.0;
    }
    let layer2 = AffineLayer::uniform(2 * n, n, w2, vec![1.0; n], ActivationKind::Relu)?;

    let mut layers = vec![layer1, layer2];

    if n == 1 {
        layers.push(AffineLayer::uniform(
            1,
            1,
            vec![1.0],
            vec![0.0],
            ActivationKind::Identity,
        )?);
        return Network::new(layers);
    }

    // Min chain. Step j consumes the running minimum m and u_j, producing
    //   d = relu(m - u_j), p = relu(m + N), q_l = relu(u_l + N) for l > j,
    // from which the next step reads m' = p - d - N and u_l = q_l - N.
    //
    // Entering step 2 the inputs are the raw layer-2 outputs [u_1..u_n]
    // (unshifted); afterwards registers are shifted by N. The +N/-N constants
    // cancel symbolically between steps, so registers accumulate no rounding.
    for j in 1..n {
        let first = j == 1;
        let in_dim = if first { n } else { 1 + 1 + (n - j) };
        // Affine forms of (m, u_j) in terms of the current layer inputs:
        // index map for non-first steps: 0 = d, 1 = p, 2.. = q_{j+1}..q_{n-1}.
        let pending = n - 1 - j; // u_{j+1}.. to carry forward
        let out_dim = 2 + pending;
        let mut w = vec![0.0; out_dim * in_dim];
        let mut b = vec![0.0; out_dim];
        let (m_terms, u_terms, reg_bias): (Vec<(usize, f64)>, Vec<(usize, f64)>, f64) = if first {
            (vec![(0, 1.0)], vec![(j, 1.0)], shift)
        } else {
            // m = p - d - N; u_j = q_j - N (q_j is input index 2).
            (vec![(1, 1.0), (0, -1.0)], vec![(2, 1.0)], 0.0)
        };
        let m_bias = if first { 0.0 } else { -shift };
        let u_bias = if first { 0.0 } else { -shift };
        // d = relu(m - u_j)
        for &(i, co) in &m_terms {
            w[i] += co;
        }
        for &(i, co) in &u_terms {
            w[i] -= co;
        }
        b[0] = m_bias - u_bias;
        // p = relu(m + N): for non-first steps m + N = p - d (the -N and +N
        // cancel), giving bias exactly 0.
        for &(i, co) in &m_terms {
            w[in_dim + i] += co;
        }
        b[1] = m_bias + reg_bias + if first { 0.0 } else { shift };
        // q registers for pending u values
        for (slot, l) in (0..pending).zip(j + 1..n) {
            let row = 2 + slot;
            let src = if first { l } else { 3 + (l - (j + 1)) };
            w[row * in_dim + src] = 1.0;
            b[row] = if first { shift } else { 0.0 };
        }
        layers.push(AffineLayer::uniform(in_dim, out_dim, w, b, ActivationKind::Relu)?);
    }

    // Readout: m_n = p - d - N.
    let readout = AffineLayer::uniform(
        2,
        1,
        vec![-1.0, 1.0],
        vec![-shift],
        ActivationKind::Identity,
    )?;
    layers.push(readout);
    Network::new(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_block_examples() {
        let net = relu_identity_block(1, 10.0).unwrap();
        // One rounding at relu(x + N): exact to ulp(N + x).
        assert!((net.eval_scalar(0.3).unwrap() - 0.3).abs() < 1e-12);

        let net2 = relu_identity_block(2, 5.0).unwrap();
        let out = net2.eval(&[-5.0, 3.0]).unwrap();
        assert_eq!(out, vec![-5.0, 3.0]); // boundary: relu(0) - 5 = -5

        // Outside the validity region: relu(-1) - 1 = -1, not -2.
        let net3 = relu_identity_block(1, 1.0).unwrap();
        assert_eq!(net3.eval_scalar(-2.0).unwrap(), -1.0);

        assert!(relu_identity_block(1, 0.0).is_err());
        assert!(relu_identity_block(1, -3.0).is_err());
    }

    /// Direct scalar form of the trapezoid, used as the oracle.
    fn bump_oracle(a: f64, b: f64, c: f64, x: f64) -> f64 {
        if x <= a - c || x >= b + c {
            0.0
        } else if x < a {
            (x - (a - c)) / c
        } else if x <= b {
            1.0
        } else {
            ((b + c) - x) / c
        }
    }

    #[test]
    fn bump_examples() {
        let net = bump_1d(0.0, 1.0, 0.5).unwrap();
        assert_eq!(net.eval_scalar(0.5).unwrap(), 1.0);
        assert_eq!(net.eval_scalar(-0.5).unwrap(), 0.0);
        assert!((net.eval_scalar(-0.25).unwrap() - 0.5).abs() < 1e-14);
        assert!(bump_1d(1.0, 0.0, 0.5).is_err());
        assert!(bump_1d(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bump_matches_oracle_everywhere() {
        let (a, b, c) = (-0.7, 1.3, 0.25);
        let net = bump_1d(a, b, c).unwrap();
        let breakpoints = [a - c, a, b, b + c];
        let mut points: Vec<f64> = (0..5000).map(|i| -4.0 + 8.0 * i as f64 / 4999.0).collect();
        points.extend_from_slice(&breakpoints);
        points.extend([-1e3, 1e3, -50.0, 50.0]);
        for x in points {
            let got = net.eval_scalar(x).unwrap();
            let want = bump_oracle(a, b, c, x);
            assert!(
                (got - want).abs() <= 1e-12,
                "bump({x}) = {got}, oracle {want}"
            );
        }
        // Exact plateau and exact tails.
        assert_eq!(net.eval_scalar(0.2).unwrap(), 1.0);
        assert_eq!(net.eval_scalar(-500.0).unwrap(), 0.0);
        assert_eq!(net.eval_scalar(500.0).unwrap(), 0.0);
    }

    #[test]
    fn min_max_gadgets() {
        let mx = max_gadget();
        let mn = min_gadget();
        assert_eq!(mx.eval(&[3.0, 1.0]).unwrap()[0], 3.0);
        assert_eq!(mn.eval(&[3.0, 1.0]).unwrap()[0], 1.0);
        assert_eq!(mx.eval(&[-2.0, 7.5]).unwrap()[0], 7.5);
        assert_eq!(mn.eval(&[-2.0, 7.5]).unwrap()[0], -2.0);
        // Ties: max(x, x) = x exactly.
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64;
            assert_eq!(mx.eval(&[x, x]).unwrap()[0], x);
            assert_eq!(mn.eval(&[x, x]).unwrap()[0], x);
        }
    }

    #[test]
    fn box_indicator_examples() {
        let k = CompactBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let c = Enlargement::new(0.5).unwrap();
        let u = box_indicator(&k, &c).unwrap();
        assert_eq!(u.eval(&[0.5, 0.5]).unwrap()[0], 1.0);
        assert_eq!(u.eval(&[0.5, 2.0]).unwrap()[0], 0.0);
        assert!((u.eval(&[0.5, 1.25]).unwrap()[0] - 0.5).abs() < 1e-13);
        assert!(u.eval(&[0.5]).is_err()); // dimension mismatch
    }

    #[test]
    fn box_indicator_matches_min_of_bumps() {
        let k = CompactBox::new(vec![-1.0, 0.0, 0.5], vec![0.0, 2.0, 1.5]).unwrap();
        let c = Enlargement::new(0.3).unwrap();
        let u = box_indicator(&k, &c).unwrap();
        let oracle = |x: &[f64]| -> f64 {
            (0..3)
                .map(|i| bump_oracle(k.lower()[i], k.upper()[i], 0.3, x[i]))
                .fold(f64::INFINITY, f64::min)
        };
        // Deterministic pseudo-grid over a wide range.
        let mut s = 0x1234_5678_u64;
        for _ in 0..4000 {
            let mut x = [0.0f64; 3];
            for xi in &mut x {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *xi = -3.0 + 7.0 * ((s >> 11) as f64 / (1u64 << 53) as f64);
            }
            let got = u.eval(&x).unwrap()[0];
            let want = oracle(&x);
            assert!(
                (got - want).abs() <= 1e-12,
                "U({x:?}) = {got}, oracle {want}"
            );
        }
        // Exactly zero far outside J.
        assert_eq!(u.eval(&[100.0, 1.0, 1.0]).unwrap()[0], 0.0);
        assert_eq!(u.eval(&[-0.5, 1.0, -40.0]).unwrap()[0], 0.0);
        // Exactly one on K.
        assert_eq!(u.eval(&[-0.5, 1.0, 1.0]).unwrap()[0], 1.0);
    }
}
