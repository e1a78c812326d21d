//! Euler-Maruyama simulation with shared Brownian increments, strong-error
//! estimation under common noise, and moment estimation.
//!
//! The reproducibility contract: identical `(seed, M, N, T, d)` produce
//! bit-identical ensembles, trajectories and estimates regardless of worker
//! count. Increments are counter-indexed per `(path, step, component)`,
//! per-path results are collected in path order, and final reductions run
//! sequentially in that order.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::network::{EvalScratch, Network};
use crate::rng;
use rayon::prelude::*;

/// State magnitude beyond which a trajectory is flagged as blown up;
/// distinguishes numeric overflow from model behavior at desk scale.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Minimum path count for normal-approximation confidence intervals.
pub const MIN_PATHS_FOR_CI: usize = 1000;

/// A drift or diffusion coefficient: expressions per output component, or a
/// network (optionally taking time as its first input).
#[derive(Debug, Clone)]
pub enum Coefficient {
    /// One expression per output component, over variables `t` and
    /// `x`/`x1..xk`.
    Exprs(Vec<Expr>),
    /// A network mapping `x` (or `[t, x...]` when `time_input`) to the
    /// output components.
    Network { net: Network, time_input: bool },
}

/// Reusable buffers for coefficient evaluation.
#[derive(Default, Clone)]
pub struct CoeffScratch {
    eval: EvalScratch,
    tx: Vec<f64>,
}

impl Coefficient {
    pub fn from_expr(e: Expr) -> Coefficient {
        Coefficient::Exprs(vec![e])
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Coefficient::Exprs(v) => v.len(),
            Coefficient::Network { net, .. } => net.output_dim(),
        }
    }

    /// Input state dimension implied by the coefficient, if determined.
    pub fn state_dim(&self) -> Option<usize> {
        match self {
            Coefficient::Exprs(_) => None,
            Coefficient::Network { net, time_input } => {
                Some(net.input_dim() - usize::from(*time_input))
            }
        }
    }

    pub fn eval_into(
        &self,
        t: f64,
        x: &[f64],
        out: &mut Vec<f64>,
        ws: &mut CoeffScratch,
    ) -> Result<()> {
        out.clear();
        match self {
            Coefficient::Exprs(exprs) => {
                for e in exprs {
                    out.push(e.eval(Some(t), x)?);
                }
            }
            Coefficient::Network { net, time_input } => {
                let result = if *time_input {
                    ws.tx.clear();
                    ws.tx.push(t);
                    ws.tx.extend_from_slice(x);
                    net.eval_with(&ws.tx, &mut ws.eval)?
                } else {
                    net.eval_with(x, &mut ws.eval)?
                };
                out.extend_from_slice(result);
            }
        }
        Ok(())
    }
}

/// Drift/diffusion pair with horizon and initial value.
#[derive(Debug, Clone)]
pub struct SdeProblem {
    pub drift: Coefficient,
    pub diffusion: Coefficient,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub state_dim: usize,
    pub noise_dim: usize,
    /// Declared linear-growth constant `C` with `|b| + |sigma| <= C (1+|x|)`,
    /// required by moment estimation.
    pub declared_growth: Option<f64>,
}

impl SdeProblem {
    pub fn new(
        drift: Coefficient,
        diffusion: Coefficient,
        x0: Vec<f64>,
        horizon: f64,
        noise_dim: usize,
    ) -> Result<SdeProblem> {
        let state_dim = x0.len();
        if state_dim == 0 || noise_dim == 0 {
            return Err(Error::input("state and noise dimensions must be positive"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::input(format!("horizon must be > 0, got {horizon}")));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("initial value must be finite"));
        }
        if drift.output_dim() != state_dim {
            return Err(Error::input(format!(
                "drift output dim {} does not match state dim {state_dim}",
                drift.output_dim()
            )));
        }
        if diffusion.output_dim() != state_dim * noise_dim {
            return Err(Error::input(format!(
                "diffusion output dim {} does not match {state_dim} x {noise_dim}",
                diffusion.output_dim()
            )));
        }
        for (name, coeff) in [("drift", &drift), ("diffusion", &diffusion)] {
            if let Some(k) = coeff.state_dim() {
                if k != state_dim {
                    return Err(Error::input(format!(
                        "{name} network expects state dim {k}, problem has {state_dim}"
                    )));
                }
            }
        }
        let problem = SdeProblem {
            drift,
            diffusion,
            x0,
            horizon,
            state_dim,
            noise_dim,
            declared_growth: None,
        };
        // Totality smoke check at the initial point.
        let mut ws = CoeffScratch::default();
        let mut buf = Vec::new();
        problem.drift.eval_into(0.0, &problem.x0, &mut buf, &mut ws)?;
        problem.diffusion.eval_into(0.0, &problem.x0, &mut buf, &mut ws)?;
        Ok(problem)
    }

    pub fn with_declared_growth(mut self, c: f64) -> SdeProblem {
        self.declared_growth = Some(c);
        self
    }

    fn shares_setup_with(&self, other: &SdeProblem) -> bool {
        self.state_dim == other.state_dim
            && self.noise_dim == other.noise_dim
            && self.horizon == other.horizon
            && self.x0 == other.x0
    }
}

/// Shared Brownian increments: `M x N x d` Gaussians of variance `T/N`.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    paths: usize,
    steps: usize,
    horizon: f64,
    noise_dim: usize,
    seed: u64,
    increments: Vec<f64>,
}

/// Memory cap for ensembles (bytes).
pub const DEFAULT_ENSEMBLE_CAP: usize = 1 << 30;

/// Generate the ensemble for `(seed, M, N, T, d)`. Increment `(i, j, l)` is a
/// pure function of the tuple `(seed, i, j, l)`, so ensembles extend in `M`
/// without perturbing existing paths.
pub fn generate_ensemble(
    paths: usize,
    steps: usize,
    horizon: f64,
    noise_dim: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    generate_ensemble_with_cap(paths, steps, horizon, noise_dim, seed, DEFAULT_ENSEMBLE_CAP)
}

pub fn generate_ensemble_with_cap(
    paths: usize,
    steps: usize,
    horizon: f64,
    noise_dim: usize,
    seed: u64,
    cap_bytes: usize,
) -> Result<PathEnsemble> {
    if paths == 0 || steps == 0 || noise_dim == 0 {
        return Err(Error::input("ensemble requires M, N, d >= 1"));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::input(format!("horizon must be > 0, got {horizon}")));
    }
    let total = paths
        .checked_mul(steps)
        .and_then(|v| v.checked_mul(noise_dim))
        .ok_or_else(|| Error::Capacity("ensemble size overflows".to_string()))?;
    let bytes = total.checked_mul(8);
    match bytes {
        Some(b) if b <= cap_bytes => {}
        _ => {
            return Err(Error::Capacity(format!(
                "ensemble needs {total} increments (> cap of {cap_bytes} bytes)"
            )))
        }
    }
    let sd = (horizon / steps as f64).sqrt();
    let per_path = steps * noise_dim;
    let mut increments = vec![0.0f64; total];
    increments
        .par_chunks_mut(per_path)
        .enumerate()
        .for_each(|(path, chunk)| {
            let base = path as u64 * per_path as u64;
            for (off, slot) in chunk.iter_mut().enumerate() {
                *slot = sd * rng::normal_at(seed, base + off as u64);
            }
        });
    Ok(PathEnsemble {
        paths,
        steps,
        horizon,
        noise_dim,
        seed,
        increments,
    })
}

impl PathEnsemble {
    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Increments of one path: `N x d` row-major.
    pub fn path_increments(&self, path: usize) -> &[f64] {
        let per_path = self.steps * self.noise_dim;
        &self.increments[path * per_path..(path + 1) * per_path]
    }

    pub fn increment(&self, path: usize, step: usize, component: usize) -> f64 {
        self.path_increments(path)[step * self.noise_dim + component]
    }
}

/// One simulated path on the grid `t_j = j T / N`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `(N+1) x k` row-major states.
    pub values: Vec<f64>,
    pub state_dim: usize,
    /// First step index at which the state left the finite range, if any;
    /// later entries repeat the last good state.
    pub blow_up_step: Option<usize>,
}

impl Trajectory {
    pub fn state(&self, step: usize) -> &[f64] {
        &self.values[step * self.state_dim..(step + 1) * self.state_dim]
    }

    pub fn grid_len(&self) -> usize {
        self.values.len() / self.state_dim
    }
}

/// Explicit Euler-Maruyama on one ensemble path:
/// `X_{j+1} = X_j + b(t_j, X_j) dt + sigma(t_j, X_j) dW_j`.
pub fn euler_maruyama(
    problem: &SdeProblem,
    ensemble: &PathEnsemble,
    path: usize,
) -> Result<Trajectory> {
    check_compat(problem, ensemble)?;
    if path >= ensemble.paths {
        return Err(Error::input(format!(
            "path index {path} out of range ({} paths)",
            ensemble.paths
        )));
    }
    let mut ws = SimScratch::default();
    simulate_path(problem, ensemble, path, &mut ws)
}

fn check_compat(problem: &SdeProblem, ensemble: &PathEnsemble) -> Result<()> {
    if problem.noise_dim != ensemble.noise_dim {
        return Err(Error::input(format!(
            "problem noise dim {} does not match ensemble {}",
            problem.noise_dim, ensemble.noise_dim
        )));
    }
    if problem.horizon != ensemble.horizon {
        return Err(Error::input(format!(
            "problem horizon {} does not match ensemble {}",
            problem.horizon, ensemble.horizon
        )));
    }
    Ok(())
}

#[derive(Default, Clone)]
struct SimScratch {
    coeff: CoeffScratch,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
    state: Vec<f64>,
}

fn simulate_path(
    problem: &SdeProblem,
    ensemble: &PathEnsemble,
    path: usize,
    ws: &mut SimScratch,
) -> Result<Trajectory> {
    let k = problem.state_dim;
    let d = problem.noise_dim;
    let n = ensemble.steps;
    let dt = ensemble.dt();
    let incr = ensemble.path_increments(path);

    let mut values = Vec::with_capacity((n + 1) * k);
    values.extend_from_slice(&problem.x0);
    ws.state.clear();
    ws.state.extend_from_slice(&problem.x0);
    let mut blow_up_step = None;

    for j in 0..n {
        if blow_up_step.is_some() {
            values.extend_from_within(j * k..(j + 1) * k);
            continue;
        }
        let t = j as f64 * dt;
        problem
            .drift
            .eval_into(t, &ws.state, &mut ws.drift, &mut ws.coeff)?;
        problem
            .diffusion
            .eval_into(t, &ws.state, &mut ws.diffusion, &mut ws.coeff)?;
        let dw = &incr[j * d..(j + 1) * d];
        let mut bad = false;
        for i in 0..k {
            let mut xi = ws.state[i] + ws.drift[i] * dt;
            let row = &ws.diffusion[i * d..(i + 1) * d];
            for (s, w) in row.iter().zip(dw.iter()) {
                xi += s * w;
            }
            if !xi.is_finite() || xi.abs() > BLOW_UP_THRESHOLD {
                bad = true;
            }
            ws.state[i] = xi;
        }
        if bad {
            blow_up_step = Some(j + 1);
            // Freeze at the last good state.
            values.extend_from_within(j * k..(j + 1) * k);
            ws.state.copy_from_slice(&values[j * k..(j + 1) * k]);
        } else {
            values.extend_from_slice(&ws.state);
        }
    }
    Ok(Trajectory {
        values,
        state_dim: k,
        blow_up_step,
    })
}

/// Monte Carlo estimate with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    /// 95% half-width; requires at least [`MIN_PATHS_FOR_CI`] paths.
    pub ci_halfwidth: f64,
    /// Paths entering the estimate.
    pub paths_used: usize,
    /// Paths excluded for (matching) blow-ups.
    pub excluded_blowups: usize,
}

/// Common-noise strong error `E[ sup_j |X^eps_j - X_j|^p ]`: both problems
/// are driven by the identical increments of `ensemble`.
///
/// A path on which exactly one of the two copies blows up (or both, at
/// different steps) is a hard error; paths where both blow up at the same
/// step are excluded and counted.
pub fn strong_error(
    true_problem: &SdeProblem,
    approx_problem: &SdeProblem,
    ensemble: &PathEnsemble,
    p: f64,
) -> Result<McEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::input(format!("strong error requires p >= 1, got {p}")));
    }
    if !true_problem.shares_setup_with(approx_problem) {
        return Err(Error::input(
            "strong error requires matching (k, d, x0, T) in both problems",
        ));
    }
    check_compat(true_problem, ensemble)?;
    if ensemble.paths < MIN_PATHS_FOR_CI {
        return Err(Error::input(format!(
            "confidence intervals need at least {MIN_PATHS_FOR_CI} paths, got {}",
            ensemble.paths
        )));
    }

    enum PathOutcome {
        Value(f64),
        BothBlown,
        Mismatch(usize),
    }

    let outcomes: Vec<Result<PathOutcome>> = (0..ensemble.paths)
        .into_par_iter()
        .map_init(SimScratch::default, |ws, path| {
            let a = simulate_path(true_problem, ensemble, path, ws)?;
            let b = simulate_path(approx_problem, ensemble, path, ws)?;
            Ok(match (a.blow_up_step, b.blow_up_step) {
                (None, None) => PathOutcome::Value(sup_distance(&a, &b).powf(p)),
                (Some(i), Some(j)) if i == j => PathOutcome::BothBlown,
                _ => PathOutcome::Mismatch(path),
            })
        })
        .collect();

    let mut values = Vec::with_capacity(ensemble.paths);
    let mut excluded = 0usize;
    for outcome in outcomes {
        match outcome? {
            PathOutcome::Value(v) => values.push(v),
            PathOutcome::BothBlown => excluded += 1,
            PathOutcome::Mismatch(path) => {
                return Err(Error::Numeric(format!(
                    "path {path}: blow-up in only one of the coupled simulations"
                )))
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Numeric("all paths blew up".to_string()));
    }
    Ok(mc_reduce(values, excluded))
}

/// `E[ sup_j |X_j|^q ]` by Monte Carlo; requires a declared linear-growth
/// constant on the problem. Blown-up paths are excluded and counted.
pub fn sup_moment(problem: &SdeProblem, ensemble: &PathEnsemble, q: f64) -> Result<McEstimate> {
    if !(q.is_finite() && q >= 2.0) {
        return Err(Error::input(format!("moment estimation requires q >= 2, got {q}")));
    }
    if problem.declared_growth.is_none() {
        return Err(Error::input(
            "moment estimation requires a declared linear-growth constant",
        ));
    }
    check_compat(problem, ensemble)?;
    if ensemble.paths < MIN_PATHS_FOR_CI {
        return Err(Error::input(format!(
            "confidence intervals need at least {MIN_PATHS_FOR_CI} paths, got {}",
            ensemble.paths
        )));
    }
    let outcomes: Vec<Result<(Option<f64>, bool)>> = (0..ensemble.paths)
        .into_par_iter()
        .map_init(SimScratch::default, |ws, path| {
            let tr = simulate_path(problem, ensemble, path, ws)?;
            if tr.blow_up_step.is_some() {
                return Ok((None, true));
            }
            let mut sup = 0.0f64;
            for j in 0..tr.grid_len() {
                let norm = norm2(tr.state(j));
                if norm > sup {
                    sup = norm;
                }
            }
            Ok((Some(sup.powf(q)), false))
        })
        .collect();
    let mut values = Vec::with_capacity(ensemble.paths);
    let mut excluded = 0usize;
    for outcome in outcomes {
        match outcome? {
            (Some(v), _) => values.push(v),
            (None, _) => excluded += 1,
        }
    }
    if values.is_empty() {
        return Err(Error::Numeric("all paths blew up".to_string()));
    }
    Ok(mc_reduce(values, excluded))
}

/// Max over the grid of the Euclidean distance between two trajectories.
pub fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    debug_assert_eq!(a.values.len(), b.values.len());
    let k = a.state_dim;
    let mut sup = 0.0f64;
    for j in 0..a.grid_len() {
        let mut s = 0.0;
        for i in 0..k {
            let dv = a.values[j * k + i] - b.values[j * k + i];
            s += dv * dv;
        }
        let dist = s.sqrt();
        if dist > sup {
            sup = dist;
        }
    }
    sup
}

fn mc_reduce(values: Vec<f64>, excluded: usize) -> McEstimate {
    // Fixed-order reduction: values are in path order.
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    McEstimate {
        value: mean,
        ci_halfwidth: 1.96 * (var / n as f64).sqrt(),
        paths_used: n,
        excluded_blowups: excluded,
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
