//! The clamping construction
//! `phi = -relu(-relu(phi1 + C*U) + 2C*U) + C*U = min(max(phi1, -C*U), C*U)`
//! and the scalar range clamp `g(z) = min(max(z, -C), C)`.
//!
//! With the indicator `U` exactly zero outside `J`, the assembled network is
//! exactly zero there too: every ReLU in the clamp tail then sees a
//! non-positive pre-activation, and the readout constants cancel bit-exactly
//! because build-time biases reuse the eval-time products.

use super::gadgets::{box_indicator, UNIT_REGISTER_SHIFT};
use super::{CompactBox, Enlargement};
use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::grid;
use crate::network::{AffineLayer, EvalScratch, Network};

/// Sampling parameters for the clamp precondition check `sup_J |phi1| <= C`.
#[derive(Debug, Clone, Copy)]
pub struct ClampParams {
    /// Total grid points over `J` for the precondition sweep.
    pub grid_points: usize,
}

impl Default for ClampParams {
    fn default() -> Self {
        ClampParams {
            grid_points: 100_000,
        }
    }
}

/// A clamp-constructed network together with the region data a sound
/// growth certificate needs: the kernel box `K`, the support `J` outside
/// which the network vanishes exactly, the clamp bound `C`, and the
/// breakpoints of the piecewise-affine pieces per input dimension.
#[derive(Debug, Clone)]
pub struct ClampedNetwork {
    pub network: Network,
    pub kernel: CompactBox,
    pub support: CompactBox,
    pub bound: f64,
    pub breakpoints: Vec<Vec<f64>>,
}

impl ClampedNetwork {
    /// Extend the per-dimension breakpoint lists (e.g. with interpolation
    /// knots of the inner network).
    pub fn with_breakpoints(mut self, mut extra: Vec<Vec<f64>>) -> ClampedNetwork {
        for (dst, src) in self.breakpoints.iter_mut().zip(extra.iter_mut()) {
            dst.append(src);
            dst.sort_by(|a, b| a.partial_cmp(b).unwrap());
            dst.dedup();
        }
        self
    }
}

/// Clamp `phi1` to the box `K` with margin `c`: the result equals `phi1` on
/// `K`, vanishes exactly outside `J = K` enlarged by `c`, and is bounded by
/// `min(|phi1|, C*U)` in between.
///
/// Precondition `sup_J |phi1| <= C` is checked by a dense grid sweep
/// (default 1e5 points); violation is refused with the witnessing point.
pub fn clamp_network(
    phi1: &Network,
    c_bound: f64,
    k: &CompactBox,
    c: &Enlargement,
) -> Result<ClampedNetwork> {
    clamp_network_with(phi1, c_bound, k, c, ClampParams::default())
}

/// [`clamp_network`] with explicit sampling parameters.
pub fn clamp_network_with(
    phi1: &Network,
    c_bound: f64,
    k: &CompactBox,
    c: &Enlargement,
    params: ClampParams,
) -> Result<ClampedNetwork> {
    if phi1.output_dim() != 1 {
        return Err(Error::input(format!(
            "clamp requires scalar output, got dim {}",
            phi1.output_dim()
        )));
    }
    if phi1.input_dim() != k.dim() {
        return Err(Error::input(format!(
            "network input dim {} does not match box dim {}",
            phi1.input_dim(),
            k.dim()
        )));
    }
    if !(c_bound.is_finite() && c_bound > 0.0) {
        return Err(Error::input(format!("clamp bound must be > 0, got {c_bound}")));
    }
    let j = k.enlarged(c);

    // Precondition sweep over J.
    let mut scratch = EvalScratch::default();
    for point in grid::product_grid(&j, params.grid_points) {
        let v = phi1.eval_with(&point, &mut scratch)?[0];
        if v.abs() > c_bound {
            return Err(Error::Precondition {
                msg: format!("sampled sup_J |phi1| = {} exceeds clamp bound {c_bound}", v.abs()),
                witness: point,
            });
        }
    }

    let indicator = box_indicator(k, c)?;
    let network = clamp_with_indicator(phi1, &indicator, c_bound)?;
    let cv = c.value();
    let breakpoints = (0..k.dim())
        .map(|i| {
            let (a, b) = (k.lower()[i], k.upper()[i]);
            vec![a - cv, a, b, b + cv]
        })
        .collect();
    Ok(ClampedNetwork {
        network,
        kernel: k.clone(),
        support: j,
        bound: c_bound,
        breakpoints,
    })
}

/// Core clamp assembly shared by the box-indicator and squashing-indicator
/// routes: runs `phi1` and `indicator` in parallel on the shared input and
/// appends the two ReLU clamp layers plus readout.
///
/// Requires `indicator` to map into `[0, 1]`; exactness of the result outside
/// the support follows from the indicator being exactly zero there.
pub(crate) fn clamp_with_indicator(
    phi1: &Network,
    indicator: &Network,
    c_bound: f64,
) -> Result<Network> {
    if indicator.input_dim() != phi1.input_dim() || indicator.output_dim() != 1 {
        return Err(Error::input("indicator must share the input and have scalar output"));
    }
    // Register shifts: phi1 values on J are bounded by C, indicator values
    // by 1; shift is 2 plus the bound.
    let shift_phi = 2.0 + c_bound;
    let shift_u = UNIT_REGISTER_SHIFT;
    let (merged, s_v, s_u) = parallel_pair(phi1, indicator, shift_phi, shift_u)?;

    // Merged output: [v at 0 (maybe shifted by s_v), u at 1 (maybe s_u)].
    // Clamp layer 1: q1 = relu(v + C*u), register ru = relu(u + N_u).
    let p_su = c_bound * s_u;
    let cl1 = AffineLayer::new(
        2,
        2,
        vec![1.0, c_bound, 0.0, 1.0],
        vec![-s_v - p_su, shift_u - s_u],
        vec![ActivationKind::Relu, ActivationKind::Relu],
    )?;
    // Clamp layer 2: q2 = relu(-q1 + 2C*(ru - N_u)), register ru2 = relu(ru).
    let two_c = 2.0 * c_bound;
    let cl2 = AffineLayer::new(
        2,
        2,
        vec![-1.0, two_c, 0.0, 1.0],
        vec![-(two_c * shift_u), 0.0],
        vec![ActivationKind::Relu, ActivationKind::Relu],
    )?;
    // Readout: -q2 + C*(ru2 - N_u).
    let readout = AffineLayer::uniform(
        2,
        1,
        vec![-1.0, c_bound],
        vec![-(c_bound * shift_u)],
        ActivationKind::Identity,
    )?;

    let mut layers = merged.layers().to_vec();
    layers.push(cl1);
    layers.push(cl2);
    layers.push(readout);
    Network::new(layers)
}

/// Run two networks with a shared input side by side, aligning depths with
/// ReLU in-register padding. Returns the merged network (output
/// `[a_out..., b_out...]`) and the residual register shift still applied to
/// each branch's output (0 if that branch needed no padding).
pub(crate) fn parallel_pair(
    a: &Network,
    b: &Network,
    shift_a: f64,
    shift_b: f64,
) -> Result<(Network, f64, f64)> {
    if a.input_dim() != b.input_dim() {
        return Err(Error::input("parallel branches must share the input dimension"));
    }
    let depth = a.depth().max(b.depth());
    let ext_a = extend_with_registers(a, depth, shift_a)?;
    let ext_b = extend_with_registers(b, depth, shift_b)?;
    let mut layers = Vec::with_capacity(depth);
    for (la, lb) in ext_a.iter().zip(ext_b.iter()) {
        layers.push(block_diag(la, lb, layers.is_empty())?);
    }
    let net = Network::new(layers)?;
    let res_a = if a.depth() < depth { shift_a } else { 0.0 };
    let res_b = if b.depth() < depth { shift_b } else { 0.0 };
    Ok((net, res_a, res_b))
}

/// Layers of `net` padded to `depth` with in-register layers. The first pad
/// shifts by `+N`; later pads copy the (now non-negative) value through ReLU
/// exactly, so only one rounding is introduced and outputs stay shifted.
fn extend_with_registers(net: &Network, depth: usize, shift: f64) -> Result<Vec<AffineLayer>> {
    let mut layers = net.layers().to_vec();
    let dim = net.output_dim();
    let mut first_pad = true;
    while layers.len() < depth {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        let bias = if first_pad { shift } else { 0.0 };
        layers.push(AffineLayer::uniform(
            dim,
            dim,
            w,
            vec![bias; dim],
            ActivationKind::Relu,
        )?);
        first_pad = false;
    }
    Ok(layers)
}

/// Block-diagonal merge of two layers; at the input layer both blocks read
/// the same (shared) columns instead.
fn block_diag(a: &AffineLayer, b: &AffineLayer, shared_input: bool) -> Result<AffineLayer> {
    let in_dim = if shared_input {
        debug_assert_eq!(a.in_dim, b.in_dim);
        a.in_dim
    } else {
        a.in_dim + b.in_dim
    };
    let out_dim = a.out_dim + b.out_dim;
    let mut w = vec![0.0; out_dim * in_dim];
    for r in 0..a.out_dim {
        w[r * in_dim..r * in_dim + a.in_dim]
            .copy_from_slice(&a.weights[r * a.in_dim..(r + 1) * a.in_dim]);
    }
    let col_off = if shared_input { 0 } else { a.in_dim };
    for r in 0..b.out_dim {
        let row = a.out_dim + r;
        w[row * in_dim + col_off..row * in_dim + col_off + b.in_dim]
            .copy_from_slice(&b.weights[r * b.in_dim..(r + 1) * b.in_dim]);
    }
    let mut biases = a.biases.clone();
    biases.extend_from_slice(&b.biases);
    let mut tags = a.activations.clone();
    tags.extend_from_slice(&b.activations);
    AffineLayer::new(in_dim, out_dim, w, biases, tags)
}

/// Range clamp `g(phi1(x)) = min(max(phi1(x), -C), C)`, realized as
/// `-relu(-relu(phi1 + C) + 2C) + C`; output lies in `[-C, C]` everywhere.
pub fn clamp_scalar_range(phi1: &Network, c_bound: f64) -> Result<Network> {
    if !(c_bound.is_finite() && c_bound > 0.0) {
        return Err(Error::input(format!("clamp bound must be > 0, got {c_bound}")));
    }
    if phi1.output_dim() != 1 {
        return Err(Error::input(format!(
            "scalar range clamp requires output dim 1, got {}",
            phi1.output_dim()
        )));
    }
    let l1 = AffineLayer::uniform(1, 1, vec![1.0], vec![c_bound], ActivationKind::Relu)?;
    let l2 = AffineLayer::uniform(1, 1, vec![-1.0], vec![2.0 * c_bound], ActivationKind::Relu)?;
    let l3 = AffineLayer::uniform(1, 1, vec![-1.0], vec![c_bound], ActivationKind::Identity)?;
    let tail = Network::new(vec![l1, l2, l3])?;
    phi1.then(&tail)
}
