//! Exact representation and evaluation of feed-forward networks with
//! heterogeneous per-neuron activations.
//!
//! A [`Network`] is an ordered list of [`AffineLayer`]s; layer `l` computes
//! `act(W x + b)` componentwise, where each output neuron carries its own
//! [`ActivationKind`]. Per-neuron tags (rather than per-layer) let one layer
//! mix ReLU neurons with identity pass-through registers, which the gadget
//! builders rely on. The final layer of a network is typically
//! identity-activated (a linear readout).
//!
//! Evaluation is total on all of real input space, pure, and deterministic.

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// One affine layer with a per-neuron activation applied to each output.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLayer {
    /// Row-major weight matrix, `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activations: Vec<ActivationKind>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl AffineLayer {
    /// Build a layer, checking dimension consistency.
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activations: Vec<ActivationKind>,
    ) -> Result<AffineLayer> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::input(format!(
                "weight matrix has {} entries, expected {out_dim} x {in_dim}",
                weights.len()
            )));
        }
        if biases.len() != out_dim {
            return Err(Error::input(format!(
                "bias vector has length {}, expected {out_dim}",
                biases.len()
            )));
        }
        if activations.len() != out_dim {
            return Err(Error::input(format!(
                "activation tags have length {}, expected {out_dim}",
                activations.len()
            )));
        }
        Ok(AffineLayer {
            weights,
            biases,
            activations,
            in_dim,
            out_dim,
        })
    }

    /// Layer with the same activation on every neuron.
    pub fn uniform(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: ActivationKind,
    ) -> Result<AffineLayer> {
        let tags = vec![activation; out_dim];
        AffineLayer::new(in_dim, out_dim, weights, biases, tags)
    }

    #[inline]
    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for row in 0..self.out_dim {
            let mut acc = self.biases[row];
            let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
            for (wj, xj) in w.iter().zip(input.iter()) {
                acc += wj * xj;
            }
            out.push(self.activations[row].apply(acc));
        }
    }

    /// Frobenius norm of the weight matrix; an upper bound for the spectral
    /// norm, computed exactly without iteration.
    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Largest declared activation Lipschitz constant in this layer.
    pub fn max_activation_lipschitz(&self) -> Result<f64> {
        let mut max = 0.0f64;
        for (i, act) in self.activations.iter().enumerate() {
            match act.lipschitz() {
                Some(l) => max = max.max(l),
                None => {
                    return Err(Error::Certification(format!(
                        "activation `{}` at neuron {i} has no declared Lipschitz constant",
                        act.tag()
                    )))
                }
            }
        }
        Ok(max)
    }
}

/// Reusable evaluation buffers; avoids per-call allocation in hot loops.
#[derive(Default, Clone)]
pub struct EvalScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

/// A feed-forward network: the composition of its layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<AffineLayer>,
    input_dim: usize,
    output_dim: usize,
}

impl Network {
    /// Assemble a network from layers, enforcing the dimension chain.
    pub fn new(layers: Vec<AffineLayer>) -> Result<Network> {
        if layers.is_empty() {
            return Err(Error::input("network must have at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::input(format!(
                    "layer {i} output dim {} does not match layer {} input dim {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                )));
            }
        }
        let input_dim = layers[0].in_dim;
        let output_dim = layers[layers.len() - 1].out_dim;
        Ok(Network {
            layers,
            input_dim,
            output_dim,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Evaluate at `x`, reusing caller-provided scratch buffers. Returns a
    /// slice into the scratch holding the output vector.
    pub fn eval_with<'s>(&self, x: &[f64], scratch: &'s mut EvalScratch) -> Result<&'s [f64]> {
        if x.len() != self.input_dim {
            return Err(Error::input(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite input component {bad}")));
        }
        scratch.a.clear();
        scratch.a.extend_from_slice(x);
        for layer in &self.layers {
            layer.forward_into(&scratch.a, &mut scratch.b);
            std::mem::swap(&mut scratch.a, &mut scratch.b);
        }
        Ok(&scratch.a)
    }

    /// Evaluate at `x`, allocating the output.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = EvalScratch::default();
        self.eval_with(x, &mut scratch).map(|s| s.to_vec())
    }

    /// Convenience for scalar-input scalar-output networks.
    pub fn eval_scalar(&self, x: f64) -> Result<f64> {
        let out = self.eval(&[x])?;
        if out.len() != 1 {
            return Err(Error::input(format!(
                "eval_scalar on network with output dim {}",
                out.len()
            )));
        }
        Ok(out[0])
    }

    /// Upper bound on the global Lipschitz constant in the Euclidean metric:
    /// the product over layers of `frobenius(W_l) * max activation Lipschitz`.
    /// The Frobenius norm upper-bounds the operator norm, so the result is a
    /// valid (possibly coarse) bound.
    pub fn lipschitz_upper_bound(&self) -> Result<f64> {
        let mut bound = 1.0;
        for layer in &self.layers {
            bound *= layer.frobenius_norm() * layer.max_activation_lipschitz()?;
        }
        Ok(bound)
    }

    /// Check all structural invariants. `Ok(())` iff dimensions chain and all
    /// parameters are finite; otherwise a diagnostic naming the first
    /// violation.
    pub fn validate(&self) -> std::result::Result<(), Diagnostic> {
        if self.layers.is_empty() {
            return Err(Diagnostic::Empty);
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.weights.len() != layer.in_dim * layer.out_dim {
                return Err(Diagnostic::WeightShape { layer: i });
            }
            if layer.biases.len() != layer.out_dim || layer.activations.len() != layer.out_dim {
                return Err(Diagnostic::WeightShape { layer: i });
            }
            if let Some(idx) = layer.weights.iter().position(|w| !w.is_finite()) {
                return Err(Diagnostic::NonFiniteWeight {
                    layer: i,
                    row: idx / layer.in_dim,
                    col: idx % layer.in_dim,
                });
            }
            if let Some(idx) = layer.biases.iter().position(|b| !b.is_finite()) {
                return Err(Diagnostic::NonFiniteBias { layer: i, index: idx });
            }
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Diagnostic::DimensionChain {
                    from_layer: i,
                    to_layer: i + 1,
                    out_dim: pair[0].out_dim,
                    in_dim: pair[1].in_dim,
                });
            }
        }
        Ok(())
    }

    /// Stack `self` then `other`: the returned network evaluates
    /// `other(self(x))`. The seam is a plain layer concatenation, so the
    /// composition is exact.
    pub fn then(&self, other: &Network) -> Result<Network> {
        if self.output_dim != other.input_dim {
            return Err(Error::input(format!(
                "cannot compose: output dim {} feeds input dim {}",
                self.output_dim, other.input_dim
            )));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Network::new(layers)
    }

    /// True iff some layer uses a custom activation (which the text format
    /// cannot represent).
    pub fn has_custom_activation(&self) -> bool {
        self.layers
            .iter()
            .any(|l| l.activations.iter().any(|a| matches!(a, ActivationKind::Custom { .. })))
    }

    /// Serialize to the plain-text document format.
    ///
    /// Floats are written in shortest round-trip form, so save -> load -> eval
    /// reproduces evaluations bit-exactly.
    pub fn to_text(&self) -> Result<String> {
        if self.has_custom_activation() {
            return Err(Error::Format(
                "networks with custom activations cannot be serialized".to_string(),
            ));
        }
        let mut s = String::new();
        let _ = writeln!(s, "lingrow-network v1");
        let _ = writeln!(s, "input_dim {}", self.input_dim);
        let _ = writeln!(s, "output_dim {}", self.output_dim);
        let _ = writeln!(s, "layers {}", self.layers.len());
        for layer in &self.layers {
            let _ = writeln!(s, "layer {} {}", layer.in_dim, layer.out_dim);
            let tags: Vec<String> = layer.activations.iter().map(|a| a.tag()).collect();
            let _ = writeln!(s, "activations {}", tags.join(" "));
            let _ = writeln!(s, "weights");
            for row in 0..layer.out_dim {
                let row_s: Vec<String> = layer.weights
                    [row * layer.in_dim..(row + 1) * layer.in_dim]
                    .iter()
                    .map(|w| format!("{w:?}"))
                    .collect();
                let _ = writeln!(s, "{}", row_s.join(" "));
            }
            let _ = writeln!(s, "biases");
            let bias_s: Vec<String> = layer.biases.iter().map(|b| format!("{b:?}")).collect();
            let _ = writeln!(s, "{}", bias_s.join(" "));
        }
        Ok(s)
    }

    /// Parse the plain-text document format.
    pub fn from_text(text: &str) -> Result<Network> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| -> Result<&str> {
            lines
                .next()
                .ok_or_else(|| Error::Format(format!("unexpected end of document, expected {what}")))
        };
        let header = next("header")?;
        if header.trim() != "lingrow-network v1" {
            return Err(Error::Format(format!("unrecognized header `{header}`")));
        }
        let input_dim = parse_kv(next("input_dim")?, "input_dim")?;
        let output_dim = parse_kv(next("output_dim")?, "output_dim")?;
        let n_layers = parse_kv(next("layers")?, "layers")?;
        let mut layers = Vec::with_capacity(n_layers);
        for li in 0..n_layers {
            let decl = next("layer declaration")?;
            let mut it = decl.split_whitespace();
            if it.next() != Some("layer") {
                return Err(Error::Format(format!("expected `layer`, got `{decl}`")));
            }
            let in_dim: usize = parse_num(it.next(), "layer in_dim")?;
            let out_dim: usize = parse_num(it.next(), "layer out_dim")?;
            let acts_line = next("activations")?;
            let acts_line = acts_line
                .strip_prefix("activations")
                .ok_or_else(|| Error::Format(format!("expected `activations`, got `{acts_line}`")))?;
            let mut activations = Vec::with_capacity(out_dim);
            for tag in acts_line.split_whitespace() {
                let act = ActivationKind::from_tag(tag)
                    .ok_or_else(|| Error::Format(format!("unknown activation tag `{tag}`")))?;
                activations.push(act);
            }
            if next("weights")?.trim() != "weights" {
                return Err(Error::Format(format!("layer {li}: expected `weights`")));
            }
            let mut weights = Vec::with_capacity(in_dim * out_dim);
            for _ in 0..out_dim {
                let row = next("weight row")?;
                for tok in row.split_whitespace() {
                    weights.push(parse_f64(tok)?);
                }
            }
            if next("biases")?.trim() != "biases" {
                return Err(Error::Format(format!("layer {li}: expected `biases`")));
            }
            let bias_line = next("bias row")?;
            let mut biases = Vec::with_capacity(out_dim);
            for tok in bias_line.split_whitespace() {
                biases.push(parse_f64(tok)?);
            }
            layers.push(AffineLayer::new(in_dim, out_dim, weights, biases, activations)?);
        }
        let net = Network::new(layers)?;
        if net.input_dim != input_dim || net.output_dim != output_dim {
            return Err(Error::Format(format!(
                "declared dims {input_dim}->{output_dim} do not match layers {}->{}",
                net.input_dim, net.output_dim
            )));
        }
        Ok(net)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Network> {
        let text = std::fs::read_to_string(path)?;
        Network::from_text(&text)
    }
}

fn parse_kv(line: &str, key: &str) -> Result<usize> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::Format(format!("expected `{key}`, got `{line}`")));
    }
    parse_num(it.next(), key)
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Format(format!("missing or invalid {what}")))
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Format(format!("invalid float `{tok}`")))
}

/// First violated structural invariant found by [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Empty,
    DimensionChain {
        from_layer: usize,
        to_layer: usize,
        out_dim: usize,
        in_dim: usize,
    },
    WeightShape {
        layer: usize,
    },
    NonFiniteWeight {
        layer: usize,
        row: usize,
        col: usize,
    },
    NonFiniteBias {
        layer: usize,
        index: usize,
    },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::Empty => write!(f, "network has no layers"),
            Diagnostic::DimensionChain {
                from_layer,
                to_layer,
                out_dim,
                in_dim,
            } => write!(
                f,
                "layer {from_layer} output dim {out_dim} feeds layer {to_layer} input dim {in_dim}"
            ),
            Diagnostic::WeightShape { layer } => {
                write!(f, "layer {layer} parameter shapes are inconsistent")
            }
            Diagnostic::NonFiniteWeight { layer, row, col } => {
                write!(f, "layer {layer} weight ({row},{col}) is not finite")
            }
            Diagnostic::NonFiniteBias { layer, index } => {
                write!(f, "layer {layer} bias {index} is not finite")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_net() -> Network {
        // |x| = relu(x) + relu(-x)
        let hidden = AffineLayer::uniform(
            1,
            2,
            vec![1.0, -1.0],
            vec![0.0, 0.0],
            ActivationKind::Relu,
        )
        .unwrap();
        let readout = AffineLayer::uniform(
            2,
            1,
            vec![1.0, 1.0],
            vec![0.0],
            ActivationKind::Identity,
        )
        .unwrap();
        Network::new(vec![hidden, readout]).unwrap()
    }

    #[test]
    fn abs_network_evaluates() {
        let net = abs_net();
        assert_eq!(net.eval_scalar(-2.0).unwrap(), 2.0);
        assert_eq!(net.eval_scalar(3.5).unwrap(), 3.5);
        assert_eq!(net.eval_scalar(0.0).unwrap(), 0.0);
    }

    #[test]
    fn abs_network_lipschitz_bound_is_two() {
        // Frobenius norms sqrt(2) * sqrt(2) = 2, a valid bound for the true
        // constant 1.
        let net = abs_net();
        let bound = net.lipschitz_upper_bound().unwrap();
        assert!((bound - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_network_lipschitz_bound_is_zero() {
        let layer =
            AffineLayer::uniform(1, 1, vec![0.0], vec![1.0], ActivationKind::Relu).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        assert_eq!(net.lipschitz_upper_bound().unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let net = abs_net();
        assert!(net.eval(&[1.0, 2.0]).is_err());
        assert!(net.eval(&[f64::NAN]).is_err());
    }

    #[test]
    fn validate_reports_chain_break() {
        let l1 =
            AffineLayer::uniform(1, 3, vec![1.0; 3], vec![0.0; 3], ActivationKind::Relu).unwrap();
        let l2 =
            AffineLayer::uniform(2, 1, vec![1.0; 2], vec![0.0], ActivationKind::Identity).unwrap();
        // Bypass the checked constructor to exercise validate().
        let net = Network {
            layers: vec![l1, l2],
            input_dim: 1,
            output_dim: 1,
        };
        match net.validate() {
            Err(Diagnostic::DimensionChain {
                from_layer: 0,
                to_layer: 1,
                ..
            }) => {}
            other => panic!("expected chain diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn validate_reports_nan_bias() {
        let mut layer =
            AffineLayer::uniform(1, 2, vec![1.0, 1.0], vec![0.0, 0.0], ActivationKind::Relu)
                .unwrap();
        layer.biases[1] = f64::NAN;
        let net = Network {
            layers: vec![layer],
            input_dim: 1,
            output_dim: 2,
        };
        assert_eq!(
            net.validate(),
            Err(Diagnostic::NonFiniteBias { layer: 0, index: 1 })
        );
    }

    #[test]
    fn well_formed_network_validates() {
        assert!(abs_net().validate().is_ok());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let net = abs_net();
        let text = net.to_text().unwrap();
        let back = Network::from_text(&text).unwrap();
        for x in [-2.0, -0.3, 0.0, 0.7, 123.456, 1.0e-13] {
            assert_eq!(net.eval_scalar(x).unwrap(), back.eval_scalar(x).unwrap());
        }
        assert_eq!(net, back);
    }

    #[test]
    fn custom_activation_does_not_serialize() {
        let act = ActivationKind::Custom {
            name: "softplus".into(),
            f: std::sync::Arc::new(|x: f64| (1.0 + x.exp()).ln()),
            lipschitz: Some(1.0),
        };
        let layer = AffineLayer::uniform(1, 1, vec![1.0], vec![0.0], act).unwrap();
        let net = Network::new(vec![layer]).unwrap();
        assert!(net.to_text().is_err());
    }
}
