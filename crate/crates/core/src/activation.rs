//! Scalar activation functions with declared Lipschitz constants.

use std::fmt;
use std::sync::Arc;

/// A scalar activation function, tagged per neuron.
///
/// Every built-in tag evaluates to its closed form and carries a global
/// Lipschitz constant; `Custom` activations must declare one to be usable by
/// the certification machinery.
#[derive(Clone)]
pub enum ActivationKind {
    /// Rectified linear unit, `max(x, 0)`.
    Relu,
    /// Logistic sigmoid, `1 / (1 + exp(-x))`, limits 0 and 1.
    LogisticSigmoid,
    /// Hyperbolic tangent, limits -1 and 1.
    Tanh,
    /// Rational sigmoid `x / (1 + |x|)`, limits -1 and 1.
    RationalSigmoid,
    /// Pass-through, `x`.
    Identity,
    /// User-supplied scalar function. `lipschitz` is the declared global
    /// Lipschitz constant, if any; without one the activation evaluates but
    /// cannot be certified.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz: Option<f64>,
    },
}

impl ActivationKind {
    /// Evaluate the activation at `x`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::LogisticSigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::RationalSigmoid => x / (1.0 + x.abs()),
            ActivationKind::Identity => x,
            ActivationKind::Custom { f, .. } => f(x),
        }
    }

    /// Global Lipschitz constant, if declared.
    ///
    /// ReLU, tanh and the rational sigmoid are 1-Lipschitz; the logistic
    /// sigmoid has derivative bounded by 1/4.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            ActivationKind::Relu => Some(1.0),
            ActivationKind::LogisticSigmoid => Some(0.25),
            ActivationKind::Tanh => Some(1.0),
            ActivationKind::RationalSigmoid => Some(1.0),
            ActivationKind::Identity => Some(1.0),
            ActivationKind::Custom { lipschitz, .. } => *lipschitz,
        }
    }

    /// Stable tag used by the text serialization format.
    pub fn tag(&self) -> String {
        match self {
            ActivationKind::Relu => "relu".to_string(),
            ActivationKind::LogisticSigmoid => "logistic".to_string(),
            ActivationKind::Tanh => "tanh".to_string(),
            ActivationKind::RationalSigmoid => "ratsig".to_string(),
            ActivationKind::Identity => "identity".to_string(),
            ActivationKind::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Parse a serialized tag. Custom activations carry an opaque function
    /// handle and cannot be reconstructed from text.
    pub fn from_tag(tag: &str) -> Option<ActivationKind> {
        match tag {
            "relu" => Some(ActivationKind::Relu),
            "logistic" => Some(ActivationKind::LogisticSigmoid),
            "tanh" => Some(ActivationKind::Tanh),
            "ratsig" => Some(ActivationKind::RationalSigmoid),
            "identity" => Some(ActivationKind::Identity),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, ActivationKind::Identity)
    }
}

impl fmt::Debug for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl PartialEq for ActivationKind {
    fn eq(&self, other: &Self) -> bool {
        // Custom activations compare by name only; handles are opaque.
        self.tag() == other.tag()
    }
}
