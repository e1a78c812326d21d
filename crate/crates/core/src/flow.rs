//! ODE flow comparison: integrate two Lipschitz vector fields of linear
//! growth from the same start and check the measured sup-in-time distance
//! against the weighted-perturbation bound
//! `2 eps_w max(1, LT) exp(2LT) T psi(x)`.

use crate::certify::psi;
use crate::error::{Error, Result};
use crate::sde::{norm2, Coefficient, CoeffScratch};

/// Vector field with a declared Lipschitz/growth constant; the declaration is
/// spot-checked on samples, not proven.
#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub field: Coefficient,
    pub start: Vec<f64>,
    pub horizon: f64,
    /// Declared `L` with `|V(x)-V(y)| <= L |x-y|` and `|V(x)| <= L (1+|x|)`.
    pub lipschitz: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    /// Fixed RK4 step count (default 2^14).
    pub steps: usize,
    /// Sample count for the precondition sweeps.
    pub precheck_points: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            steps: 1 << 14,
            precheck_points: 4096,
        }
    }
}

/// Outcome of one flow comparison.
#[derive(Debug, Clone)]
pub struct FlowReport {
    /// Max over grid times of the distance between the two flows.
    pub sup_distance: f64,
    /// `2 eps_w max(1, LT) exp(2LT) T psi(x)`.
    pub bound: f64,
    pub within_bound: bool,
    pub psi_x: f64,
    /// A-priori estimate `|X_t| <= max(1, Lt)(1+|x|) e^{Lt}` held at all grid
    /// times for both flows.
    pub apriori_ok: bool,
    pub steps: usize,
}

/// Integrate both fields with fixed-step RK4 and compare against the bound.
///
/// Preconditions checked by sampling (input error with witness on failure):
/// the weighted distance `sup |V1 - V2| / psi <= eps_w`, and the declared `L`
/// is valid for both fields on the region the flows can reach.
pub fn ode_flow_error(
    v1: &Coefficient,
    v2: &Coefficient,
    x: &[f64],
    horizon: f64,
    eps_w: f64,
    lipschitz: f64,
    params: FlowParams,
) -> Result<FlowReport> {
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("start point must be finite and non-empty"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::input(format!("horizon must be > 0, got {horizon}")));
    }
    if !(eps_w > 0.0) || !(lipschitz >= 0.0) {
        return Err(Error::input("eps_w must be > 0 and L >= 0"));
    }
    let k = x.len();
    if k > 3 {
        return Err(Error::input("flow comparison supports state dims 1..=3"));
    }

    // Region the flows can reach, from the a-priori growth bound.
    let lt = lipschitz * horizon;
    let radius = 1.1 * lt.max(1.0) * (1.0 + norm2(x)) * lt.exp() + 1.0;

    sample_weighted_distance(v1, v2, k, radius, eps_w, params.precheck_points)?;
    // A field within eps_w of an L-Lipschitz field in the weighted norm may
    // legitimately carry slopes up to L + O(eps_w); the spot check allows
    // that slack and still catches grossly misdeclared constants.
    let l_slack = lipschitz + 2.0 * eps_w;
    for field in [v1, v2] {
        spot_check_lipschitz(field, k, radius, l_slack, params.precheck_points)?;
    }

    let traj1 = rk4_flow(v1, x, horizon, params.steps)?;
    let traj2 = rk4_flow(v2, x, horizon, params.steps)?;

    let mut sup = 0.0f64;
    let mut apriori_ok = true;
    let dt = horizon / params.steps as f64;
    for j in 0..=params.steps {
        let a = &traj1[j * k..(j + 1) * k];
        let b = &traj2[j * k..(j + 1) * k];
        let mut s = 0.0;
        for i in 0..k {
            let d = a[i] - b[i];
            s += d * d;
        }
        sup = sup.max(s.sqrt());
        let t = j as f64 * dt;
        let apriori = (lipschitz * t).max(1.0) * (1.0 + norm2(x)) * (lipschitz * t).exp();
        if norm2(a) > apriori * (1.0 + 1e-9) || norm2(b) > apriori * (1.0 + 1e-9) {
            apriori_ok = false;
        }
    }

    let psi_x = psi(x);
    let bound = 2.0 * eps_w * lt.max(1.0) * (2.0 * lt).exp() * horizon * psi_x;
    Ok(FlowReport {
        sup_distance: sup,
        bound,
        within_bound: sup <= bound,
        psi_x,
        apriori_ok,
        steps: params.steps,
    })
}

/// Classic fixed-step RK4 for the autonomous field; returns the dense grid of
/// states, `(steps+1) x k` row-major.
pub fn rk4_flow(field: &Coefficient, x0: &[f64], horizon: f64, steps: usize) -> Result<Vec<f64>> {
    let k = x0.len();
    let h = horizon / steps as f64;
    let mut out = Vec::with_capacity((steps + 1) * k);
    out.extend_from_slice(x0);
    let mut state = x0.to_vec();
    let mut ws = CoeffScratch::default();
    let (mut k1, mut k2, mut k3, mut k4) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut tmp = vec![0.0; k];
    for j in 0..steps {
        let t = j as f64 * h;
        field.eval_into(t, &state, &mut k1, &mut ws)?;
        for i in 0..k {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        field.eval_into(t + 0.5 * h, &tmp, &mut k2, &mut ws)?;
        for i in 0..k {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        field.eval_into(t + 0.5 * h, &tmp, &mut k3, &mut ws)?;
        for i in 0..k {
            tmp[i] = state[i] + h * k3[i];
        }
        field.eval_into(t + h, &tmp, &mut k4, &mut ws)?;
        for i in 0..k {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if !state[i].is_finite() {
                return Err(Error::Numeric(format!(
                    "flow integration left the finite range at step {j}"
                )));
            }
        }
        out.extend_from_slice(&state);
    }
    Ok(out)
}

fn sample_weighted_distance(
    v1: &Coefficient,
    v2: &Coefficient,
    k: usize,
    radius: f64,
    eps_w: f64,
    points: usize,
) -> Result<()> {
    let mut ws = CoeffScratch::default();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for point in sample_points(k, radius, points) {
        v1.eval_into(0.0, &point, &mut a, &mut ws)?;
        v2.eval_into(0.0, &point, &mut b, &mut ws)?;
        let mut s = 0.0;
        for i in 0..k {
            let d = a[i] - b[i];
            s += d * d;
        }
        let ratio = s.sqrt() / psi(&point);
        if ratio > eps_w * (1.0 + 1e-9) {
            return Err(Error::Precondition {
                msg: format!("sampled |V1 - V2|/psi = {ratio} exceeds eps_w = {eps_w}"),
                witness: point,
            });
        }
    }
    Ok(())
}

fn spot_check_lipschitz(
    field: &Coefficient,
    k: usize,
    radius: f64,
    lipschitz: f64,
    points: usize,
) -> Result<()> {
    let mut ws = CoeffScratch::default();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let pts = sample_points(k, radius, points);
    for pair in pts.chunks_exact(2) {
        let (u, v) = (&pair[0], &pair[1]);
        field.eval_into(0.0, u, &mut a, &mut ws)?;
        field.eval_into(0.0, v, &mut b, &mut ws)?;
        let vu = norm2(&a);
        if vu > lipschitz * (1.0 + norm2(u)) * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Precondition {
                msg: format!(
                    "sampled |V(x)| = {vu} exceeds declared growth L(1+|x|) with L = {lipschitz}"
                ),
                witness: u.clone(),
            });
        }
        let mut diff = 0.0;
        let mut dist = 0.0;
        for i in 0..k {
            let dv = a[i] - b[i];
            diff += dv * dv;
            let dx = u[i] - v[i];
            dist += dx * dx;
        }
        if diff.sqrt() > lipschitz * dist.sqrt() * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Precondition {
                msg: format!(
                    "sampled |V(x)-V(y)|/|x-y| = {} exceeds declared L = {lipschitz}",
                    diff.sqrt() / dist.sqrt()
                ),
                witness: u.clone(),
            });
        }
    }
    Ok(())
}

/// Deterministic low-discrepancy-ish points in the centered cube.
fn sample_points(k: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut state = 0x3F84_D5B5_B547_0917u64;
    for _ in 0..count {
        let mut p = Vec::with_capacity(k);
        for _ in 0..k {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            p.push(radius * (2.0 * u - 1.0));
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn coeff(src: &str) -> Coefficient {
        Coefficient::from_expr(Expr::parse(src).unwrap())
    }

    #[test]
    fn identical_fields_have_zero_distance() {
        let v = coeff("-x");
        let report =
            ode_flow_error(&v, &v, &[1.0], 1.0, 0.01, 1.0, FlowParams::default()).unwrap();
        assert_eq!(report.sup_distance, 0.0);
        assert!(report.within_bound);
        assert!(report.apriori_ok);
    }

    #[test]
    fn perturbed_field_stays_within_lemma_bound() {
        // V1 = -x, V2 = -x + 0.009 (1 + |x|), eps_w = 0.01, L = 1, T = 1.
        let v1 = coeff("-x");
        let v2 = coeff("-x + 0.009*(1 + abs(x))");
        let report =
            ode_flow_error(&v1, &v2, &[1.0], 1.0, 0.01, 1.0, FlowParams::default()).unwrap();
        // bound = 2 * 0.01 * 1 * e^2 * 1 * 2 = 0.04 e^2.
        let expected_bound = 0.04 * (2.0f64).exp();
        assert!((report.bound - expected_bound).abs() < 1e-12);
        assert!(report.sup_distance <= report.bound);
        assert!(report.within_bound);
        assert!(report.apriori_ok);
    }

    #[test]
    fn bound_formula_direct_substitution() {
        // eps_w = 0.01, L = 1, T = 1, psi(x) = 2 -> 0.04 e^2 ~ 0.29556.
        let v = coeff("-x");
        let report =
            ode_flow_error(&v, &v, &[1.0], 1.0, 0.01, 1.0, FlowParams::default()).unwrap();
        assert_eq!(report.psi_x, 2.0);
        assert!((report.bound - 0.295_562_243_957_226_47).abs() < 1e-12);
    }

    #[test]
    fn eps_w_violation_is_reported_with_witness() {
        let v1 = coeff("-x");
        let v2 = coeff("-x + 0.5*(1 + abs(x))");
        match ode_flow_error(&v1, &v2, &[0.0], 1.0, 0.01, 1.0, FlowParams::default()) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness.len(), 1),
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn misdeclared_lipschitz_constant_is_caught() {
        let v1 = coeff("-3*x");
        let v2 = coeff("-3*x");
        match ode_flow_error(&v1, &v2, &[0.0], 1.0, 0.01, 1.0, FlowParams::default()) {
            Err(Error::Precondition { .. }) => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn rk4_matches_exponential_decay() {
        let v = coeff("-x");
        let flow = rk4_flow(&v, &[1.0], 1.0, 1 << 10).unwrap();
        let end = flow[flow.len() - 1];
        assert!((end - (-1.0f64).exp()).abs() < 1e-10);
    }
}
