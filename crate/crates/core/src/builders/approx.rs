//! End-to-end constrained approximation of a 1-D continuous target: build a
//! piecewise-linear interpolant to accuracy `eps/2` over `J`, clamp it to
//! vanish outside `J`, and certify the growth bound.

use super::clamp::{clamp_with_indicator, ClampedNetwork};
use super::cpwl::cpwl_interpolant_1d;
use super::squash::{squash_bump, squash_box_indicator};
use super::{clamp_network_with, ClampParams, CompactBox, Enlargement};
use crate::activation::ActivationKind;
use crate::certify::{certify_growth, CertifyMode, GridSpec, GrowthCertificate};
use crate::error::{Error, Result};
use crate::grid;
use crate::network::EvalScratch;

/// Which indicator backs the clamp.
#[derive(Debug, Clone)]
pub enum ApproxMode {
    /// ReLU trapezoid box indicator.
    Relu,
    /// Squashing-activation indicator with parameter `zeta`.
    Squash { rho1: ActivationKind, zeta: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ApproxParams {
    /// Refinement stops with a capacity error beyond this many knots.
    pub knot_budget: usize,
    /// Points in the certification sweeps.
    pub cert_grid: usize,
}

impl Default for ApproxParams {
    fn default() -> Self {
        ApproxParams {
            knot_budget: 1 << 16,
            cert_grid: 100_000,
        }
    }
}

/// Result of [`constrained_approximator`]: the clamped network, its sound
/// growth certificate, and the measured certificate quantities.
#[derive(Debug, Clone)]
pub struct ConstrainedApprox {
    pub clamped: ClampedNetwork,
    pub certificate: GrowthCertificate,
    /// Max grid error `|phi - f|` on `K`.
    pub sup_error_on_k: f64,
    /// Max grid excess `|phi| - |f|` on `J`.
    pub sup_excess_on_j: f64,
    /// Knots of the inner interpolant.
    pub knots: usize,
}

/// Build `phi` with `||phi - f||_{inf,K} <= eps`, `|phi| <= |f| + eps` on `J`
/// and `phi = 0` exactly outside `J`, with a sound clamped-support growth
/// certificate.
///
/// The inner interpolant is refined adaptively until its sampled sup error
/// over `J` is at most `eps/2`; the clamp bound is the exact interpolant sup
/// over `J` (attained at knots) plus `eps/2`.
pub fn constrained_approximator<F>(
    f: F,
    k: &CompactBox,
    c: &Enlargement,
    eps: f64,
    mode: &ApproxMode,
    params: ApproxParams,
) -> Result<ConstrainedApprox>
where
    F: Fn(f64) -> f64,
{
    if k.dim() != 1 {
        return Err(Error::input(
            "constrained approximation builds 1-D targets; import trained networks for higher dims",
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("eps must lie in (0, 1), got {eps}")));
    }
    let j = k.enlarged(c);
    let (lo, hi) = (j.lower()[0], j.upper()[0]);

    let (knots, values) = refine_knots(&f, lo, hi, eps / 2.0, params.knot_budget)?;
    let phi1 = cpwl_interpolant_1d(&knots, &values, 0.0, 0.0)?;

    // Flat tails and affine pieces: the sup of |phi1| over J is attained at
    // a knot, so this is the breakpoint-inclusive sampled sup, exactly.
    let sup_phi1 = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_bound = sup_phi1 + eps / 2.0;

    let clamped = match mode {
        ApproxMode::Relu => clamp_network_with(
            &phi1,
            c_bound,
            k,
            c,
            ClampParams {
                grid_points: params.cert_grid,
            },
        )?,
        ApproxMode::Squash { rho1, zeta } => {
            let (phi0, sq) = squash_bump(k, c, *zeta, rho1)?;
            let indicator = squash_box_indicator(&phi0, &sq)?;
            let network = clamp_with_indicator(&phi1, &indicator, c_bound)?;
            let cv = c.value();
            let (a, b) = (k.lower()[0], k.upper()[0]);
            ClampedNetwork {
                network,
                kernel: k.clone(),
                support: j.clone(),
                bound: c_bound,
                breakpoints: vec![vec![a - cv, a, b, b + cv]],
            }
        }
    }
    .with_breakpoints(vec![knots.clone()]);

    let certificate = certify_growth(CertifyMode::ClampedSupport(
        &clamped,
        GridSpec {
            points: params.cert_grid,
        },
    ))?;

    // Certificate checks: sup error on K, excess over |f| on J, exact
    // vanishing on a sample outside J.
    let mut scratch = EvalScratch::default();
    let mut sup_error_on_k = 0.0f64;
    for x in grid::with_breakpoints(
        &grid::uniform(k.lower()[0], k.upper()[0], params.cert_grid),
        &knots,
        k.lower()[0],
        k.upper()[0],
    ) {
        let err = (clamped.network.eval_with(&[x], &mut scratch)?[0] - f(x)).abs();
        sup_error_on_k = sup_error_on_k.max(err);
    }
    if sup_error_on_k > eps {
        return Err(Error::Certification(format!(
            "constructed approximation misses the target: sup_K error {sup_error_on_k} > {eps}"
        )));
    }
    let mut sup_excess_on_j = f64::NEG_INFINITY;
    for x in grid::with_breakpoints(&grid::uniform(lo, hi, params.cert_grid), &knots, lo, hi) {
        let excess = clamped.network.eval_with(&[x], &mut scratch)?[0].abs() - f(x).abs();
        sup_excess_on_j = sup_excess_on_j.max(excess);
    }
    if sup_excess_on_j > eps {
        return Err(Error::Certification(format!(
            "bound |phi| <= |f| + eps violated on J: excess {sup_excess_on_j}"
        )));
    }
    for i in 0..1000 {
        let t = i as f64 / 999.0;
        let span = hi - lo;
        for x in [lo - 1e-9 - t * (1e3 + span), hi + 1e-9 + t * (1e3 + span)] {
            let v = clamped.network.eval_with(&[x], &mut scratch)?[0].abs();
            if v > 1e-12 {
                return Err(Error::Certification(format!(
                    "approximation does not vanish outside J: |phi({x})| = {v}"
                )));
            }
        }
    }

    Ok(ConstrainedApprox {
        knots: knots.len(),
        clamped,
        certificate,
        sup_error_on_k,
        sup_excess_on_j,
    })
}

/// Adaptive knot refinement: bisect every cell whose sampled interpolation
/// error exceeds `tol` until all cells pass or the budget is exhausted.
fn refine_knots<F>(f: &F, lo: f64, hi: f64, tol: f64, budget: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> f64,
{
    let mut knots = grid::uniform(lo, hi, 17);
    let mut values: Vec<f64> = knots.iter().map(|x| f(*x)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("target function is not finite on J"));
    }
    loop {
        let mut split_at = Vec::new();
        for i in 0..knots.len() - 1 {
            let (k0, k1) = (knots[i], knots[i + 1]);
            let (v0, v1) = (values[i], values[i + 1]);
            let mut worst = 0.0f64;
            for s in 1..16 {
                let t = s as f64 / 16.0;
                let x = k0 + t * (k1 - k0);
                let lin = v0 + t * (v1 - v0);
                worst = worst.max((f(x) - lin).abs());
            }
            if worst > tol {
                let mid = 0.5 * (k0 + k1);
                if mid > k0 && mid < k1 {
                    split_at.push(mid);
                }
            }
        }
        if split_at.is_empty() {
            return Ok((knots, values));
        }
        if knots.len() + split_at.len() > budget {
            return Err(Error::Capacity(format!(
                "knot refinement exceeded the budget of {budget} knots"
            )));
        }
        for mid in split_at {
            let v = f(mid);
            if !v.is_finite() {
                return Err(Error::input(format!("target function not finite at {mid}")));
            }
            let pos = knots.partition_point(|k| *k < mid);
            knots.insert(pos, mid);
            values.insert(pos, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_setup() -> (CompactBox, Enlargement) {
        (
            CompactBox::interval(-2.0, 2.0).unwrap(),
            Enlargement::new(0.5).unwrap(),
        )
    }

    #[test]
    fn zero_function_yields_zero_network() {
        let k = CompactBox::interval(-1.0, 1.0).unwrap();
        let c = Enlargement::new(0.5).unwrap();
        let out = constrained_approximator(
            |_| 0.0,
            &k,
            &c,
            0.5,
            &ApproxMode::Relu,
            ApproxParams {
                cert_grid: 4000,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.sup_error_on_k, 0.0);
        for x in [-5.0, -0.5, 0.0, 0.7, 10.0] {
            assert_eq!(out.clamped.network.eval_scalar(x).unwrap(), 0.0);
        }
        assert!(out.certificate.sound);
    }

    #[test]
    fn sin_target_meets_tolerance_within_knot_budget() {
        let (k, c) = unit_setup();
        let out = constrained_approximator(
            |x| (5.0 * x).sin(),
            &k,
            &c,
            0.01,
            &ApproxMode::Relu,
            ApproxParams {
                cert_grid: 20_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.sup_error_on_k <= 0.01);
        assert!(out.knots <= 1 << 12, "used {} knots", out.knots);
        assert!(out.certificate.sound);
        // C~ stays near sup |f| + eps.
        assert!(out.certificate.constant <= 1.0 + 0.02);
    }

    #[test]
    fn identity_target_clamps_to_zero_outside() {
        let k = CompactBox::interval(0.0, 1.0).unwrap();
        let c = Enlargement::new(1.0).unwrap();
        let out = constrained_approximator(
            |x| x,
            &k,
            &c,
            0.1,
            &ApproxMode::Relu,
            ApproxParams {
                cert_grid: 4000,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.clamped.network.eval_scalar(3.0).unwrap(), 0.0);
        // |phi| <= |x| + 0.1 on sampled reals.
        for i in 0..4000 {
            let x = -20.0 + 40.0 * i as f64 / 3999.0;
            let v = out.clamped.network.eval_scalar(x).unwrap().abs();
            assert!(v <= x.abs() + 0.1 + 1e-12, "at {x}: {v}");
        }
    }

    #[test]
    fn squash_mode_matches_relu_mode_on_k() {
        let (k, c) = unit_setup();
        let f = |x: f64| (x * 1.3).cos();
        let relu = constrained_approximator(
            f,
            &k,
            &c,
            0.05,
            &ApproxMode::Relu,
            ApproxParams {
                cert_grid: 4000,
                ..Default::default()
            },
        )
        .unwrap();
        let squash = constrained_approximator(
            f,
            &k,
            &c,
            0.05,
            &ApproxMode::Squash {
                rho1: ActivationKind::LogisticSigmoid,
                zeta: 0.5,
            },
            ApproxParams {
                cert_grid: 4000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(squash.sup_error_on_k <= 0.05);
        for i in 0..500 {
            let x = -2.0 + 4.0 * i as f64 / 499.0;
            let a = relu.clamped.network.eval_scalar(x).unwrap();
            let b = squash.clamped.network.eval_scalar(x).unwrap();
            // Both equal phi1 on K.
            assert!((a - b).abs() < 1e-10, "at {x}: {a} vs {b}");
        }
        // Squash-mode support is exact too.
        assert_eq!(squash.clamped.network.eval_scalar(4.0).unwrap(), 0.0);
        assert_eq!(squash.clamped.network.eval_scalar(-900.0).unwrap(), 0.0);
    }

    #[test]
    fn eps_outside_unit_interval_is_rejected() {
        let (k, c) = unit_setup();
        for eps in [0.0, 1.0, 1.5, -0.1] {
            assert!(constrained_approximator(
                |x| x,
                &k,
                &c,
                eps,
                &ApproxMode::Relu,
                ApproxParams::default()
            )
            .is_err());
        }
    }

    #[test]
    fn kink_target_refines_adaptively_within_budget() {
        // sqrt|x| has unbounded curvature at 0; adaptive bisection must
        // concentrate knots there instead of exhausting the budget.
        let k = CompactBox::interval(-10.0, 10.0).unwrap();
        let c = Enlargement::new(0.5).unwrap();
        let out = constrained_approximator(
            |x: f64| x.abs().sqrt(),
            &k,
            &c,
            0.1,
            &ApproxMode::Relu,
            ApproxParams {
                cert_grid: 20_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.knots < 4096, "adaptive refinement used {} knots", out.knots);
        assert!(out.sup_error_on_k <= 0.1);
    }

    #[test]
    fn budget_exhaustion_is_a_capacity_error() {
        let k = CompactBox::interval(-2.0, 2.0).unwrap();
        let c = Enlargement::new(0.5).unwrap();
        let res = constrained_approximator(
            |x: f64| (50.0 * x).sin(),
            &k,
            &c,
            0.001,
            &ApproxMode::Relu,
            ApproxParams {
                knot_budget: 64,
                cert_grid: 1000,
            },
        );
        match res {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
