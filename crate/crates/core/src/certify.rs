//! Weighted-norm estimation on the weighted space with `psi(x) = 1 + |x|`,
//! uniform norms on compacts, and sound global linear-growth certificates.
//!
//! Grid sup norms are estimates (lower bounds of the true sup) and are
//! reported with their grid metadata. Only the two certificate modes are
//! sound proofs of the growth inequality: `analytic_lipschitz` via
//! `|phi(x)| <= |phi(0)| + L |x|`, and `clamped_support` via exact vanishing
//! outside the support box.

use crate::builders::{ClampedNetwork, CompactBox};
use crate::error::{Error, Result};
use crate::grid;
use crate::network::{EvalScratch, Network};

/// The weight function `psi(x) = 1 + |x|` (Euclidean norm of the full input,
/// including the time coordinate where one is present).
pub fn psi(x: &[f64]) -> f64 {
    1.0 + norm2(x)
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Time extension used when sampling `f(t, x)` outside `[0, T]`:
/// `f(t, .) = f(0, .)` for `t < 0` and `f(T, .)` for `t > T`.
pub fn extend_time(t: f64, horizon: f64) -> f64 {
    t.clamp(0.0, horizon)
}

/// Uniform sampling resolution for norm estimates.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Total number of grid points (per product grid).
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 100_000 }
    }
}

/// A grid norm estimate with the metadata needed to interpret it.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    /// The max over the grid; a lower bound of the true sup.
    pub value: f64,
    /// Point attaining the max.
    pub attained_at: Vec<f64>,
    /// Number of points swept.
    pub points: usize,
}

/// Estimate of the weighted sup norm `sup_x |f(x) - phi(x)| / psi(x)` over a
/// grid on the centered box of the given radius.
pub fn weighted_sup_norm<F>(
    f: F,
    phi: &Network,
    radius: f64,
    spec: GridSpec,
) -> Result<NormEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::input(format!("radius must be > 0, got {radius}")));
    }
    let n = phi.input_dim();
    let bx = CompactBox::new(vec![-radius; n], vec![radius; n])?;
    sweep(&f, phi, &bx, spec, true)
}

/// Estimate of the uniform norm `sup_{x in K} |f(x) - phi(x)|`.
pub fn sup_norm_on_box<F>(f: F, phi: &Network, k: &CompactBox, spec: GridSpec) -> Result<NormEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    sweep(&f, phi, k, spec, false)
}

fn sweep<F>(
    f: &F,
    phi: &Network,
    bx: &CompactBox,
    spec: GridSpec,
    weighted: bool,
) -> Result<NormEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if spec.points < 2 {
        return Err(Error::input("grid resolution must be at least 2 points"));
    }
    if bx.dim() != phi.input_dim() {
        return Err(Error::input(format!(
            "grid box dim {} does not match network input dim {}",
            bx.dim(),
            phi.input_dim()
        )));
    }
    let points = grid::product_grid(bx, spec.points);
    let mut scratch = EvalScratch::default();
    let mut best = 0.0f64;
    let mut best_at = points[0].clone();
    for p in &points {
        let fv = f(p);
        if !fv.is_finite() {
            return Err(Error::input(format!(
                "target function is not finite at {p:?} (value {fv})"
            )));
        }
        let pv = phi.eval_with(p, &mut scratch)?[0];
        let mut d = (fv - pv).abs();
        if weighted {
            d /= psi(p);
        }
        if d > best {
            best = d;
            best_at = p.clone();
        }
    }
    Ok(NormEstimate {
        value: best,
        attained_at: best_at,
        points: points.len(),
    })
}

/// How a certificate was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMethod {
    /// `C~ = max(|phi(0)|, L)` from the analytic Lipschitz bound.
    AnalyticLipschitz,
    /// `C~ = sup_J |phi|` for a network vanishing exactly outside `J`.
    ClampedSupport,
    /// Sampling only; not a proof.
    SampledOnly,
}

/// A checkable witness of the global bound `|phi(x)| <= C~ (1 + |x|)`.
#[derive(Debug, Clone)]
pub struct GrowthCertificate {
    pub constant: f64,
    pub method: CertMethod,
    pub support_box: Option<CompactBox>,
    /// Max observed ratio `|phi(x)| / psi(x)` over the evidence sweep.
    pub evidence: f64,
    /// True only for the two sound methods.
    pub sound: bool,
}

/// Input to [`certify_growth`].
pub enum CertifyMode<'a> {
    /// Requires declared activation Lipschitz constants.
    AnalyticLipschitz(&'a Network),
    /// Requires a clamp-constructed network with known support.
    ClampedSupport(&'a ClampedNetwork, GridSpec),
}

/// Produce a sound growth certificate.
pub fn certify_growth(mode: CertifyMode<'_>) -> Result<GrowthCertificate> {
    match mode {
        CertifyMode::AnalyticLipschitz(net) => {
            let lip = net.lipschitz_upper_bound()?;
            let at_zero = norm2(&net.eval(&vec![0.0; net.input_dim()])?);
            let constant = positive(lip.max(at_zero));
            let evidence = evidence_sweep(net, constant)?;
            Ok(GrowthCertificate {
                constant,
                method: CertMethod::AnalyticLipschitz,
                support_box: None,
                evidence,
                sound: true,
            })
        }
        CertifyMode::ClampedSupport(clamped, spec) => {
            let net = &clamped.network;
            if net.output_dim() != 1 {
                return Err(Error::Certification(
                    "clamped-support certification requires scalar output".to_string(),
                ));
            }
            let sup = sup_on_support(clamped, spec)?;
            let constant = positive(sup);
            let evidence = evidence_sweep(net, constant)?;
            Ok(GrowthCertificate {
                constant,
                method: CertMethod::ClampedSupport,
                support_box: Some(clamped.support.clone()),
                evidence,
                sound: true,
            })
        }
    }
}

/// Sup of `|phi|` over the support `J` on a breakpoint-inclusive grid. For
/// piecewise-affine networks the extrema sit at breakpoints, so including
/// them makes the sweep exact.
pub fn sup_on_support(clamped: &ClampedNetwork, spec: GridSpec) -> Result<f64> {
    let j = &clamped.support;
    let n = j.dim();
    let per_dim = ((spec.points as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let base = grid::uniform(j.lower()[i], j.upper()[i], per_dim);
            grid::with_breakpoints(
                &base,
                clamped.breakpoints.get(i).map(|v| v.as_slice()).unwrap_or(&[]),
                j.lower()[i],
                j.upper()[i],
            )
        })
        .collect();
    let mut scratch = EvalScratch::default();
    let mut sup = 0.0f64;
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0f64; n];
    'outer: loop {
        for i in 0..n {
            point[i] = axes[i][idx[i]];
        }
        let v = clamped.network.eval_with(&point, &mut scratch)?[0].abs();
        if v > sup {
            sup = v;
        }
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == n {
                break 'outer;
            }
        }
    }
    Ok(sup)
}

/// Certificates require a strictly positive constant; a zero network reports
/// the smallest positive representable value.
fn positive(c: f64) -> f64 {
    if c > 0.0 {
        c
    } else {
        f64::MIN_POSITIVE
    }
}

/// Deterministic heavy-tailed point sweep recording the max ratio
/// `|phi(x)|/psi(x)`; also spot-asserts the certified inequality.
fn evidence_sweep(net: &Network, constant: f64) -> Result<f64> {
    let n = net.input_dim();
    let mut scratch = EvalScratch::default();
    let mut worst = 0.0f64;
    let mut state = 0x8E3C_5A1Fu64;
    let mut rng = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 0..4096 {
        // Radii log-spaced from 1e-3 to 1e6, signs/directions pseudo-random.
        let r = 10f64.powf(-3.0 + 9.0 * (i as f64 / 4095.0));
        let mut x = vec![0.0; n];
        let mut norm = 0.0;
        for xi in &mut x {
            *xi = 2.0 * rng() - 1.0;
            norm += *xi * *xi;
        }
        let norm = norm.sqrt().max(1e-300);
        for xi in &mut x {
            *xi *= r / norm;
        }
        let v = norm2(net.eval_with(&x, &mut scratch)?);
        let ratio = v / psi(&x);
        if ratio > worst {
            worst = ratio;
        }
        if ratio > constant * (1.0 + 1e-12) {
            return Err(Error::Certification(format!(
                "evidence sweep violated the certificate at {x:?}: ratio {ratio} > {constant}"
            )));
        }
    }
    Ok(worst)
}

/// Variant selector for the published growth constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantVariant {
    /// Single hidden layer, linearly activating activation:
    /// `(1 + T)(1 + C_f)`.
    LinearlyActivating,
    /// ReLU combined with a general activation:
    /// `sqrt(n1 n2) (1 + T)(1 + C_f)`.
    ReluGeneral,
    /// Pure ReLU constructive route: `sqrt(n1 n2) (1 + C_f)`.
    ReluOnly,
    /// Squashing plus ReLU route: `sqrt(n1 n2) (1 + C_f)` (same constant).
    SquashRelu,
}

/// The published constant `C~_f` for each approximation theorem variant.
pub fn theorem_constants(
    variant: ConstantVariant,
    c_f: f64,
    horizon: f64,
    n1: usize,
    n2: usize,
) -> Result<f64> {
    if !(c_f.is_finite() && c_f >= 0.0) || !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::input("constants require finite non-negative C_f and T"));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::input("output dimensions must be positive"));
    }
    let root = ((n1 * n2) as f64).sqrt();
    Ok(match variant {
        ConstantVariant::LinearlyActivating => (1.0 + horizon) * (1.0 + c_f),
        ConstantVariant::ReluGeneral => root * (1.0 + horizon) * (1.0 + c_f),
        ConstantVariant::ReluOnly | ConstantVariant::SquashRelu => root * (1.0 + c_f),
    })
}
