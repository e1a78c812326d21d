//! Closed-form constants of the quantitative SDE approximation bounds, the
//! Hölder admissibility condition, and a concrete Yamada-Watanabe auxiliary
//! function.
//!
//! The radii `r` (and often `exp(a~)`, `exp(a)`) are astronomically large at
//! realistic parameters, so everything that can overflow is computed and
//! reported in log space alongside the direct value when representable.

use crate::error::{Error, Result};

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Inputs of the Lipschitz-coefficient bound.
#[derive(Debug, Clone)]
pub struct LipschitzBoundInputs {
    /// Target accuracy, in (0, 1).
    pub epsilon: f64,
    /// Moment order, >= 2.
    pub p: f64,
    /// Horizon T > 0.
    pub horizon: f64,
    /// Coefficient Lipschitz constant `L_{b,sigma}` (>= 0; 0 is degenerate).
    pub lipschitz: f64,
    /// Coefficient growth constant `C_{b,sigma}` > 0.
    pub growth: f64,
    /// Network growth constant `C~_{b,sigma}` > 0 (from a growth
    /// certificate).
    pub net_growth: f64,
    /// Initial value.
    pub x0: Vec<f64>,
}

impl LipschitzBoundInputs {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::input(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return Err(Error::input(format!("p must be >= 2, got {}", self.p)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::input(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if !(self.lipschitz >= 0.0) || !(self.growth > 0.0) || !(self.net_growth > 0.0) {
            return Err(Error::input(
                "constants require L >= 0, C > 0, C~ > 0".to_string(),
            ));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("x0 must be finite"));
        }
        Ok(())
    }
}

/// All constants of the Lipschitz-case bound, with log-space fields for the
/// quantities that overflow in direct form.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `C = 2^{2(p-1)} T^{p/2} (T^{p/2} + (p^3 / (2(p-1)))^{p/2})`.
    pub c: f64,
    /// `delta = (eps / (2C) * exp(-C L^2))^{1/p}`.
    pub delta: f64,
    pub log_delta: f64,
    /// `a~ = 6^{2p-1} C~^{2p} T^p (T^p + (2p)^{3p} / (2^p (2p-1)^p))`.
    pub a_tilde: f64,
    pub log_a_tilde: f64,
    /// Same with the coefficient growth constant `C`.
    pub a: f64,
    pub log_a: f64,
    /// `log r` with `r = (2^{2p}/eps)(1 + 3^{2p-1}|x0|^{2p})(e^{a~} + e^{a})`.
    pub log_r: f64,
    /// `r` when representable in f64.
    pub r: Option<f64>,
    /// `log K-radius = log r / p` (the box is `{ |x|^p <= r }`).
    pub log_k_radius: f64,
    pub k_radius: Option<f64>,
    pub inputs: LipschitzBoundInputs,
}

impl BoundReport {
    /// Residual of the round-trip identity `delta^p 2C exp(C L^2) = eps`,
    /// evaluated in log space: returns
    /// `p log delta + log(2C) + C L^2 - log eps` (0 when exact).
    pub fn round_trip_log_residual(&self) -> f64 {
        let l = self.inputs.lipschitz;
        self.inputs.p * self.log_delta + (2.0 * self.c).ln() + self.c * l * l
            - self.inputs.epsilon.ln()
    }
}

/// Compute every constant of the Lipschitz-case proposition.
pub fn lipschitz_constants(inputs: &LipschitzBoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let p = inputs.p;
    let t = inputs.horizon;
    let l = inputs.lipschitz;
    let eps = inputs.epsilon;

    let c = 2f64.powf(2.0 * (p - 1.0))
        * t.powf(p / 2.0)
        * (t.powf(p / 2.0) + (p.powi(3) / (2.0 * (p - 1.0))).powf(p / 2.0));

    let log_delta = (eps.ln() - (2.0 * c).ln() - c * l * l) / p;
    let delta = log_delta.exp();

    let log_a_tilde = log_exp_factor(p, t, inputs.net_growth);
    let log_a = log_exp_factor(p, t, inputs.growth);
    let a_tilde = log_a_tilde.exp();
    let a = log_a.exp();
    if !(a_tilde.is_finite() && a.is_finite()) {
        return Err(Error::input(
            "a~ or a overflow f64; parameters are outside the representable range".to_string(),
        ));
    }

    let x0_norm = inputs.x0.iter().map(|v| v * v).sum::<f64>().sqrt();
    // log(1 + 3^{2p-1} |x0|^{2p})
    let log_x0_term = if x0_norm == 0.0 {
        0.0
    } else {
        log_add_exp(0.0, (2.0 * p - 1.0) * 3f64.ln() + 2.0 * p * x0_norm.ln())
    };
    let log_r = 2.0 * p * 2f64.ln() - eps.ln() + log_x0_term + log_add_exp(a_tilde, a);
    let r = if log_r < 709.0 { Some(log_r.exp()) } else { None };
    let log_k_radius = log_r / p;
    let k_radius = if log_k_radius < 709.0 {
        Some(log_k_radius.exp())
    } else {
        None
    };

    Ok(BoundReport {
        c,
        delta,
        log_delta,
        a_tilde,
        log_a_tilde,
        a,
        log_a,
        log_r,
        r,
        log_k_radius,
        k_radius,
        inputs: inputs.clone(),
    })
}

/// `log( 6^{2p-1} G^{2p} T^p (T^p + (2p)^{3p} / (2^p (2p-1)^p)) )`.
fn log_exp_factor(p: f64, t: f64, g: f64) -> f64 {
    let log_inner = log_add_exp(
        p * t.ln(),
        3.0 * p * (2.0 * p).ln() - p * 2f64.ln() - p * (2.0 * p - 1.0).ln(),
    );
    (2.0 * p - 1.0) * 6f64.ln() + 2.0 * p * g.ln() + p * t.ln() + log_inner
}

/// Inputs of the Hölder-case condition.
#[derive(Debug, Clone)]
pub struct HolderInputs {
    pub epsilon: f64,
    /// Hölder exponent of the diffusion, in [1/2, 1].
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub lipschitz: f64,
    pub horizon: f64,
}

impl HolderInputs {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::input(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.gamma >= 0.5 && self.gamma <= 1.0) {
            return Err(Error::input(format!("gamma must lie in [1/2, 1], got {}", self.gamma)));
        }
        if !(self.alpha > 1.0) {
            return Err(Error::input(format!(
                "alpha must be > 1 (log alpha > 0), got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::input(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.lipschitz >= 0.0) || !(self.horizon >= 0.0) {
            return Err(Error::input("L and T must be non-negative".to_string()));
        }
        Ok(())
    }
}

/// Left-hand side of the admissibility condition
/// `(beta + delta T + (2 alpha / (beta log alpha)) delta^2 T
///   + (2 alpha / log alpha) beta^{2 gamma - 1} L^2 T) exp(L T) <= eps / 2`
/// and whether it holds.
pub fn holder_condition(inputs: &HolderInputs) -> Result<(f64, bool)> {
    inputs.validate()?;
    let HolderInputs {
        epsilon,
        gamma,
        alpha,
        beta,
        delta,
        lipschitz: l,
        horizon: t,
    } = *inputs;
    let log_alpha = alpha.ln();
    let lhs = (beta
        + delta * t
        + 2.0 * alpha / (beta * log_alpha) * delta * delta * t
        + 2.0 * alpha / log_alpha * beta.powf(2.0 * gamma - 1.0) * l * l * t)
        * (l * t).exp();
    Ok((lhs, lhs <= epsilon / 2.0))
}

/// Search for an admissible `(alpha, beta, delta)` witness at the given
/// `(eps, gamma, L, T)`: a coarse log-spaced sweep, smallest-footprint first.
pub fn holder_witness_search(
    epsilon: f64,
    gamma: f64,
    lipschitz: f64,
    horizon: f64,
) -> Option<(f64, f64, f64)> {
    let alphas = [std::f64::consts::E, 2.0, 4.0, 10.0];
    for &alpha in &alphas {
        for be in 1..=60 {
            let beta = epsilon / 2.0 * 0.8f64.powi(be);
            for de in 1..=40 {
                let delta = (0.5f64).powi(de);
                let inputs = HolderInputs {
                    epsilon,
                    gamma,
                    alpha,
                    beta,
                    delta,
                    lipschitz,
                    horizon,
                };
                if let Ok((_, true)) = holder_condition(&inputs) {
                    return Some((alpha, beta, delta));
                }
            }
        }
    }
    None
}

/// Radius of the Hölder-case box `K = [-r, r]`:
/// `r = (4/eps)(1 + 3 x0^2)(exp((24T + 6T^2) C~^2) + exp((24T + 6T^2) C^2))`,
/// reported in log space with the direct value when representable.
#[derive(Debug, Clone, Copy)]
pub struct HolderRadius {
    pub log_r: f64,
    pub r: Option<f64>,
}

pub fn holder_radius(
    epsilon: f64,
    horizon: f64,
    growth: f64,
    net_growth: f64,
    x0: f64,
) -> Result<HolderRadius> {
    if !(epsilon > 0.0) || !(horizon >= 0.0) || !(growth > 0.0) || !(net_growth > 0.0) {
        return Err(Error::input(
            "holder radius requires eps > 0, T >= 0, C > 0, C~ > 0".to_string(),
        ));
    }
    let factor = 24.0 * horizon + 6.0 * horizon * horizon;
    let log_x0_term = if x0 == 0.0 {
        0.0
    } else {
        (1.0 + 3.0 * x0 * x0).ln()
    };
    let log_r = 4f64.ln() - epsilon.ln()
        + log_x0_term
        + log_add_exp(factor * net_growth * net_growth, factor * growth * growth);
    let r = if log_r < 709.0 { Some(log_r.exp()) } else { None };
    Ok(HolderRadius { log_r, r })
}

/// Concrete Yamada-Watanabe auxiliary function built from the density
/// `psi_h(z) = 1 / (z log alpha)` on `[beta/alpha, beta]` (unit mass, and at
/// most `2 / (z log alpha)`):
/// `h(x) = int_0^{|x|} int_0^y psi_h(z) dz dy`, in closed form.
#[derive(Debug, Clone, Copy)]
pub struct YamadaFunction {
    pub alpha: f64,
    pub beta: f64,
    /// Support lower end `beta / alpha`.
    lower: f64,
    log_alpha: f64,
    /// `h(beta) = beta - (beta - beta/alpha)/log(alpha)`.
    h_at_beta: f64,
}

pub fn yamada_h(alpha: f64, beta: f64) -> Result<YamadaFunction> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::input(format!("yamada function requires alpha > 1, got {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::input(format!("yamada function requires beta > 0, got {beta}")));
    }
    let lower = beta / alpha;
    let log_alpha = alpha.ln();
    let h_at_beta = beta - (beta - lower) / log_alpha;
    Ok(YamadaFunction {
        alpha,
        beta,
        lower,
        log_alpha,
        h_at_beta,
    })
}

impl YamadaFunction {
    /// Support of `h''`, the closed interval `[beta/alpha, beta]`.
    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.beta)
    }

    pub fn h(&self, x: f64) -> f64 {
        let y = x.abs();
        if y <= self.lower {
            0.0
        } else if y <= self.beta {
            (y * (y / self.lower).ln() - y + self.lower) / self.log_alpha
        } else {
            self.h_at_beta + (y - self.beta)
        }
    }

    pub fn h_prime(&self, x: f64) -> f64 {
        let y = x.abs();
        let slope = if y <= self.lower {
            0.0
        } else if y <= self.beta {
            (y / self.lower).ln() / self.log_alpha
        } else {
            1.0
        };
        if x < 0.0 {
            -slope
        } else {
            slope
        }
    }

    pub fn h_double_prime(&self, x: f64) -> f64 {
        let y = x.abs();
        if y >= self.lower && y <= self.beta {
            1.0 / (y * self.log_alpha)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct transcription of the displayed constant formulas, written
    /// independently of the implementation above and kept deliberately naive
    /// (plain powers, no log tricks). Used as the arithmetic oracle.
    mod oracle {
        pub fn c(p: f64, t: f64) -> f64 {
            let two_pow = 2f64.powf(2.0 * (p - 1.0));
            let inner = t.powf(p / 2.0) + (p * p * p / (2.0 * (p - 1.0))).powf(p / 2.0);
            two_pow * t.powf(p / 2.0) * inner
        }

        pub fn delta(eps: f64, p: f64, t: f64, l: f64) -> f64 {
            let c = c(p, t);
            (eps / (2.0 * c) * (-c * l * l).exp()).powf(1.0 / p)
        }

        pub fn exp_factor(p: f64, t: f64, g: f64) -> f64 {
            6f64.powf(2.0 * p - 1.0)
                * g.powf(2.0 * p)
                * t.powf(p)
                * (t.powf(p)
                    + (2.0 * p).powf(3.0 * p)
                        / (2f64.powf(p) * (2.0 * p - 1.0).powf(p)))
        }

        /// log r via the direct formula, usable while exp(a) is representable.
        pub fn log_r(eps: f64, p: f64, x0: f64, a_tilde: f64, a: f64) -> f64 {
            (2f64.powf(2.0 * p) / eps).ln()
                + (1.0 + 3f64.powf(2.0 * p - 1.0) * x0.powf(2.0 * p)).ln()
                + (a_tilde.exp() + a.exp()).ln()
        }

        pub fn holder_lhs(
            gamma: f64,
            alpha: f64,
            beta: f64,
            delta: f64,
            l: f64,
            t: f64,
        ) -> f64 {
            (beta
                + delta * t
                + 2.0 * alpha / (beta * alpha.ln()) * delta * delta * t
                + 2.0 * alpha / alpha.ln() * beta.powf(2.0 * gamma - 1.0) * l * l * t)
                * (l * t).exp()
        }

        pub fn holder_r(eps: f64, t: f64, c: f64, c_tilde: f64, x0: f64) -> f64 {
            4.0 / eps
                * (1.0 + 3.0 * x0 * x0)
                * (((24.0 * t + 6.0 * t * t) * c_tilde * c_tilde).exp()
                    + ((24.0 * t + 6.0 * t * t) * c * c).exp())
        }
    }

    fn inputs(eps: f64, p: f64, t: f64, l: f64, c: f64, ct: f64, x0: f64) -> LipschitzBoundInputs {
        LipschitzBoundInputs {
            epsilon: eps,
            p,
            horizon: t,
            lipschitz: l,
            growth: c,
            net_growth: ct,
            x0: vec![x0],
        }
    }

    #[test]
    fn c_spot_value() {
        // p = 2, T = 1: C = 4 * 1 * (1 + 4) = 20.
        let report = lipschitz_constants(&inputs(0.5, 2.0, 1.0, 1.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((report.c - 20.0).abs() < 1e-12);
        assert!((oracle::c(2.0, 1.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_lipschitz_delta() {
        // p = 2, T = 1, L = 0, eps = 0.1: delta^2 = 0.1/40 = 2.5e-3.
        let report = lipschitz_constants(&inputs(0.1, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((report.delta - 0.05).abs() < 1e-14);
    }

    #[test]
    fn exp_factor_spot_value_from_oracle() {
        // p = 2, T = 1, G = 1: the oracle both pins the value and guards the
        // arithmetic: 6^3 (1 + 4^6 / (2^2 3^2)) = 216 (1 + 4096/36) = 24792.
        let direct = oracle::exp_factor(2.0, 1.0, 1.0);
        assert!((direct - 24_792.0).abs() / 24_792.0 < 1e-12, "oracle {direct}");
        let report = lipschitz_constants(&inputs(0.5, 2.0, 1.0, 1.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((report.a_tilde - direct).abs() / direct < 1e-12);
        assert!((report.a - direct).abs() / direct < 1e-12);
        // log r = log(2^4 / eps) + log 2 + a (with a~ = a and x0 = 0).
        let want_log_r = (16.0 / 0.5f64).ln() + 2f64.ln() + direct;
        assert!((report.log_r - want_log_r).abs() < 1e-9);
        assert!(report.r.is_none(), "r = e^24797 is not representable");
    }

    #[test]
    fn formulas_match_direct_transcription_oracle_on_random_inputs() {
        // 1e3 pseudo-random parameter draws; log-space comparison for the
        // large quantities.
        let mut state = 0xC0FF_EE11_u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let eps = 0.01 + 0.98 * rand();
            let p = 2.0 + 4.0 * rand();
            let t = 0.1 + 3.0 * rand();
            let l = 2.0 * rand();
            let c = 0.2 + 3.0 * rand();
            let ct = 0.2 + 3.0 * rand();
            let x0 = 4.0 * rand() - 2.0;
            let report = lipschitz_constants(&inputs(eps, p, t, l, c, ct, x0)).unwrap();

            let oc = oracle::c(p, t);
            assert!((report.c - oc).abs() / oc < 1e-10, "C mismatch");

            // The naive oracle loses precision once its intermediate
            // delta^p = eps/(2C) exp(-C L^2) goes subnormal; compare only on
            // its representable range.
            let od = oracle::delta(eps, p, t, l);
            if od.is_finite() && od.powf(p) > 1e-290 {
                assert!(
                    (report.delta - od).abs() / od < 1e-10,
                    "delta mismatch: {} vs {od}",
                    report.delta
                );
            }

            let oa_t = oracle::exp_factor(p, t, ct);
            let oa = oracle::exp_factor(p, t, c);
            assert!(
                (report.log_a_tilde - oa_t.ln()).abs() / oa_t.ln().abs().max(1.0) < 1e-10,
                "log a~ mismatch"
            );
            assert!(
                (report.log_a - oa.ln()).abs() / oa.ln().abs().max(1.0) < 1e-10,
                "log a mismatch"
            );

            // The oracle's direct exp(a) form is only usable when it is
            // representable; restrict the cross-check accordingly.
            if oa_t < 700.0 && oa < 700.0 {
                let olr = oracle::log_r(eps, p, x0.abs(), oa_t, oa);
                assert!(
                    (report.log_r - olr).abs() / olr.abs().max(1.0) < 1e-10,
                    "log r mismatch: {} vs {olr}",
                    report.log_r
                );
            }

            // Round-trip identity in log space.
            assert!(
                report.round_trip_log_residual().abs() < 1e-12 * (1.0 + report.c * l * l),
                "round trip residual {}",
                report.round_trip_log_residual()
            );
        }
    }

    #[test]
    fn holder_condition_examples() {
        // T = 0: lhs = beta, admissible iff beta <= eps/2.
        let mut base = HolderInputs {
            epsilon: 0.5,
            gamma: 0.5,
            alpha: std::f64::consts::E,
            beta: 0.1,
            delta: 0.01,
            lipschitz: 1.0,
            horizon: 0.0,
        };
        let (lhs, ok) = holder_condition(&base).unwrap();
        assert_eq!(lhs, 0.1);
        assert!(ok);
        base.beta = 0.3;
        let (lhs, ok) = holder_condition(&base).unwrap();
        assert_eq!(lhs, 0.3);
        assert!(!ok, "beta > eps/2 must be inadmissible at T = 0");

        // alpha = 1 is rejected (log alpha = 0).
        base.alpha = 1.0;
        assert!(holder_condition(&base).is_err());
    }

    #[test]
    fn holder_condition_matches_oracle_and_is_monotone_in_l() {
        let mut state = 0xBEEF_u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let inputs = HolderInputs {
                epsilon: 0.01 + 0.98 * rand(),
                gamma: 0.5 + 0.5 * rand(),
                alpha: 1.01 + 5.0 * rand(),
                beta: 0.01 + rand(),
                delta: 0.01 + 0.98 * rand(),
                lipschitz: 2.0 * rand(),
                horizon: 2.0 * rand(),
            };
            let (lhs, _) = holder_condition(&inputs).unwrap();
            let want = oracle::holder_lhs(
                inputs.gamma,
                inputs.alpha,
                inputs.beta,
                inputs.delta,
                inputs.lipschitz,
                inputs.horizon,
            );
            assert!((lhs - want).abs() / want.max(1e-300) < 1e-10);

            // lhs is nondecreasing in L.
            let mut bumped = inputs.clone();
            bumped.lipschitz = inputs.lipschitz + 0.5;
            let (lhs2, _) = holder_condition(&bumped).unwrap();
            assert!(lhs2 >= lhs);
        }
    }

    #[test]
    fn witness_search_finds_admissible_triples() {
        let w = holder_witness_search(0.5, 0.5, 0.05, 1.0);
        let (alpha, beta, delta) = w.expect("expected a witness for small L");
        let (lhs, ok) = holder_condition(&HolderInputs {
            epsilon: 0.5,
            gamma: 0.5,
            alpha,
            beta,
            delta,
            lipschitz: 0.05,
            horizon: 1.0,
        })
        .unwrap();
        assert!(ok, "witness not admissible: lhs = {lhs}");
    }

    #[test]
    fn holder_radius_examples() {
        // T = 0, x0 = 0, eps = 1: r = 4 (1)(1 + 1) = 8.
        let hr = holder_radius(1.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((hr.r.unwrap() - 8.0).abs() < 1e-12);
        // T = 1, C = C~ = 1, eps = 1, x0 = 0: r = 8 e^30.
        let hr = holder_radius(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let want = 8.0 * (30f64).exp();
        assert!((hr.r.unwrap() - want).abs() / want < 1e-10);
        assert!((hr.log_r - want.ln()).abs() < 1e-10);
        // Monotone: decreasing in eps, increasing in T.
        let r1 = holder_radius(0.5, 1.0, 1.0, 1.0, 0.0).unwrap().log_r;
        let r2 = holder_radius(0.25, 1.0, 1.0, 1.0, 0.0).unwrap().log_r;
        let r3 = holder_radius(0.5, 2.0, 1.0, 1.0, 0.0).unwrap().log_r;
        assert!(r2 > r1);
        assert!(r3 > r1);
        // Oracle agreement on random (representable) inputs.
        let mut state = 0x5EED_u64;
        let mut rand = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let (eps, t) = (0.05 + 0.9 * rand(), 2.0 * rand());
            let (c, ct, x0) = (0.1 + rand(), 0.1 + rand(), 2.0 * rand() - 1.0);
            let hr = holder_radius(eps, t, c, ct, x0).unwrap();
            let want = oracle::holder_r(eps, t, c, ct, x0);
            assert!((hr.log_r - want.ln()).abs() / want.ln().abs().max(1.0) < 1e-10);
        }
    }

    #[test]
    fn yamada_function_basic_shape() {
        let h = yamada_h(2.0, 0.5).unwrap();
        assert_eq!(h.h(0.0), 0.0);
        assert_eq!(h.h_prime(0.0), 0.0);
        // h'(x) = 1 beyond beta, so |x| - h(x) is constant <= beta there.
        let tail_gap = 3.0 - h.h(3.0);
        assert!((7.0 - h.h(7.0) - tail_gap).abs() < 1e-12);
        assert!(tail_gap <= h.beta + 1e-15);
        // Interior density bound: h''(z) <= 2/(z log alpha).
        let z = 0.5 / 2.0 * (1.0 + 1.0 / 2.0);
        assert!(h.h_double_prime(z) <= 2.0 / (z * 2f64.ln()) + 1e-15);
        assert!(yamada_h(1.0, 0.5).is_err());
        assert!(yamada_h(2.0, 0.0).is_err());
    }

    #[test]
    fn yamada_invariants_on_dense_grid() {
        for (alpha, beta) in [(2.0, 0.5), (std::f64::consts::E, 1.0), (10.0, 0.01)] {
            let h = yamada_h(alpha, beta).unwrap();
            let (lo, hi) = h.support();
            let mut points: Vec<f64> = (0..20_000)
                .map(|i| -2.0 * beta + 4.0 * beta * i as f64 / 19_999.0)
                .collect();
            points.extend([lo, hi, -lo, -hi, 0.0, 10.0 * beta, -10.0 * beta]);
            for &x in &points {
                // |x| <= beta + h(x).
                assert!(x.abs() <= beta + h.h(x) + 1e-12, "at {x}");
                // |h'| <= 1.
                assert!(h.h_prime(x).abs() <= 1.0 + 1e-12, "at {x}");
                // h'' support and bound.
                let hpp = h.h_double_prime(x);
                if x.abs() < lo - 1e-12 || x.abs() > hi + 1e-12 {
                    assert_eq!(hpp, 0.0, "h'' must vanish outside support at {x}");
                } else if hpp != 0.0 {
                    assert!(hpp <= 2.0 / (x.abs() * alpha.ln()) + 1e-12);
                }
                // h even, h >= 0.
                assert_eq!(h.h(x), h.h(-x));
                assert!(h.h(x) >= 0.0);
            }
        }
    }

    #[test]
    fn yamada_derivatives_match_finite_differences() {
        let h = yamada_h(2.0, 0.5).unwrap();
        let (lo, hi) = h.support();
        let step = 1e-5;
        for i in 0..20_000 {
            let x = -1.5 + 3.0 * i as f64 / 19_999.0;
            // Skip a small neighborhood of the kinks of h'' (and of 0), where
            // one-sided curvature makes the symmetric difference O(step).
            let near_break = [lo, hi, 0.0]
                .iter()
                .any(|b| (x.abs() - b).abs() < 10.0 * step);
            if near_break {
                continue;
            }
            let fd1 = (h.h(x + step) - h.h(x - step)) / (2.0 * step);
            assert!(
                (fd1 - h.h_prime(x)).abs() < 1e-6,
                "h' fd mismatch at {x}: {fd1} vs {}",
                h.h_prime(x)
            );
            let fd2 = (h.h_prime(x + step) - h.h_prime(x - step)) / (2.0 * step);
            assert!(
                (fd2 - h.h_double_prime(x)).abs() < 1e-6,
                "h'' fd mismatch at {x}: {fd2} vs {}",
                h.h_double_prime(x)
            );
        }
    }
}
