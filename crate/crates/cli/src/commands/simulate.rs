//! Simulation commands: sde-compare, flow, gen-paths.

use super::{coefficient, Ctx};
use crate::config::{FlowConfig, GenPathsConfig, SdeCompareConfig};
use crate::report::{fmt_f64, render_svg, write_csv, Series};
use anyhow::{bail, Context, Result};
use lingrow::expr::Expr;
use lingrow::flow::{ode_flow_error, FlowParams};
use lingrow::sde::{
    euler_maruyama, generate_ensemble, strong_error, sup_moment, Coefficient, CoeffScratch,
    SdeProblem,
};
use std::fmt::Write as _;

/// Measured sup over `[0,T] x K` of the coefficient deviation (scalar state).
fn achieved_delta(
    truth: &Coefficient,
    approx: &Coefficient,
    k: [f64; 2],
    horizon: f64,
) -> Result<f64> {
    let mut ws = CoeffScratch::default();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let mut sup = 0.0f64;
    for ti in 0..3 {
        let t = horizon * ti as f64 / 2.0;
        for i in 0..10_001 {
            let x = k[0] + (k[1] - k[0]) * i as f64 / 10_000.0;
            truth.eval_into(t, &[x], &mut a, &mut ws)?;
            approx.eval_into(t, &[x], &mut b, &mut ws)?;
            let d: f64 = a
                .iter()
                .zip(b.iter())
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(d);
        }
    }
    Ok(sup)
}

pub fn cmd_sde_compare(ctx: &Ctx, cfg: &SdeCompareConfig) -> Result<usize> {
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let drift = coefficient(ctx, &cfg.drift, "drift")?;
    let diffusion = coefficient(ctx, &cfg.diffusion, "diffusion")?;
    let truth = SdeProblem::new(
        drift.clone(),
        diffusion.clone(),
        cfg.x0.clone(),
        cfg.horizon,
        cfg.noise_dim,
    )?;
    let approx = SdeProblem::new(
        coefficient(ctx, &cfg.approx_drift, "approx_drift")?,
        coefficient(ctx, &cfg.approx_diffusion, "approx_diffusion")?,
        cfg.x0.clone(),
        cfg.horizon,
        cfg.noise_dim,
    )?;

    ctx.log(&format!(
        "simulating {} paths x {} steps (seed {seed})",
        cfg.paths, cfg.steps
    ));
    let ensemble = generate_ensemble(cfg.paths, cfg.steps, cfg.horizon, cfg.noise_dim, seed)?;
    let estimate = strong_error(&truth, &approx, &ensemble, cfg.p)?;

    let mut failures = 0usize;
    let (delta_b, delta_s) = match cfg.k {
        Some(k) if cfg.x0.len() == 1 => (
            achieved_delta(&truth.drift, &approx.drift, k, cfg.horizon)?,
            achieved_delta(&truth.diffusion, &approx.diffusion, k, cfg.horizon)?,
        ),
        _ => (f64::NAN, f64::NAN),
    };
    write_csv(
        &ctx.output("sde_compare.csv"),
        &[
            "estimate",
            "ci_halfwidth",
            "paths",
            "steps",
            "seed",
            "p",
            "delta_b",
            "delta_sigma",
            "delta_total",
            "excluded_blowups",
        ],
        &[vec![
            fmt_f64(estimate.value),
            fmt_f64(estimate.ci_halfwidth),
            estimate.paths_used.to_string(),
            cfg.steps.to_string(),
            seed.to_string(),
            fmt_f64(cfg.p),
            fmt_f64(delta_b),
            fmt_f64(delta_s),
            fmt_f64(delta_b + delta_s),
            estimate.excluded_blowups.to_string(),
        ]],
    )?;
    if let Some(max) = cfg.assert_max {
        if !(estimate.value <= max) {
            eprintln!("assertion failed: estimate {} > allowed {max}", estimate.value);
            failures += 1;
        }
    }

    if !cfg.sweep.is_empty() {
        let mut rows = Vec::new();
        let mut points = Vec::new();
        let mut values = Vec::new();
        for entry in &cfg.sweep {
            let sweep_problem = SdeProblem::new(
                coefficient(ctx, &entry.drift, "sweep drift")?,
                coefficient(ctx, &entry.diffusion, "sweep diffusion")?,
                cfg.x0.clone(),
                cfg.horizon,
                cfg.noise_dim,
            )?;
            let est = strong_error(&truth, &sweep_problem, &ensemble, cfg.p)?;
            let delta = match cfg.k {
                Some(k) if cfg.x0.len() == 1 => {
                    achieved_delta(&truth.drift, &sweep_problem.drift, k, cfg.horizon)?
                        + achieved_delta(&truth.diffusion, &sweep_problem.diffusion, k, cfg.horizon)?
                }
                _ => f64::NAN,
            };
            rows.push(vec![
                entry.label.clone(),
                fmt_f64(est.value),
                fmt_f64(est.ci_halfwidth),
                fmt_f64(delta),
            ]);
            if delta > 0.0 && est.value > 0.0 {
                points.push((delta.ln(), est.value.ln()));
            }
            values.push(est.value);
        }
        write_csv(
            &ctx.output("sweep.csv"),
            &["label", "estimate", "ci_halfwidth", "delta_total"],
            &rows,
        )?;
        if points.len() >= 2 {
            let svg = render_svg(
                "strong error vs coefficient deviation (log-log)",
                &[Series {
                    label: "E[sup |X^eps - X|^p]".to_string(),
                    color: "#36c",
                    points,
                }],
            );
            std::fs::write(ctx.output("convergence.svg"), svg)?;
        }
        if cfg.assert_monotone {
            for w in values.windows(2) {
                if w[1] > w[0] + 1e-12 {
                    eprintln!("assertion failed: sweep estimates not non-increasing: {values:?}");
                    failures += 1;
                    break;
                }
            }
        }
    }
    Ok(failures)
}

pub fn cmd_flow(ctx: &Ctx, cfg: &FlowConfig) -> Result<usize> {
    let v1 = Coefficient::from_expr(Expr::parse(&cfg.v1).context("parsing v1")?);
    let v2 = Coefficient::from_expr(Expr::parse(&cfg.v2).context("parsing v2")?);
    let mut params = FlowParams::default();
    if let Some(s) = cfg.steps {
        params.steps = s;
    }
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for &x in &cfg.x_values {
        let report = ode_flow_error(
            &v1,
            &v2,
            &[x],
            cfg.horizon,
            cfg.eps_w,
            cfg.lipschitz,
            params,
        )?;
        if !report.within_bound || !report.apriori_ok {
            failures += 1;
        }
        rows.push(vec![
            fmt_f64(x),
            fmt_f64(report.sup_distance),
            fmt_f64(report.bound),
            fmt_f64(report.bound - report.sup_distance),
            report.within_bound.to_string(),
            report.apriori_ok.to_string(),
        ]);
    }
    write_csv(
        &ctx.output("flow.csv"),
        &["x", "measured", "bound", "margin", "within_bound", "apriori_ok"],
        &rows,
    )?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "flow comparison: {} start points, {} bound violations",
        cfg.x_values.len(),
        failures
    );
    let _ = writeln!(
        summary,
        "bound = 2 * {} * max(1, {}) * exp(2 * {}) * {} * psi(x)",
        fmt_f64(cfg.eps_w),
        fmt_f64(cfg.lipschitz * cfg.horizon),
        fmt_f64(cfg.lipschitz * cfg.horizon),
        fmt_f64(cfg.horizon)
    );
    std::fs::write(ctx.output("flow_summary.txt"), summary)?;
    Ok(failures)
}

pub fn cmd_gen_paths(ctx: &Ctx, cfg: &GenPathsConfig) -> Result<usize> {
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let mut problem = SdeProblem::new(
        coefficient(ctx, &cfg.drift, "drift")?,
        coefficient(ctx, &cfg.diffusion, "diffusion")?,
        cfg.x0.clone(),
        cfg.horizon,
        cfg.noise_dim,
    )?;
    if let Some(g) = cfg.declared_growth {
        problem = problem.with_declared_growth(g);
    }
    let ensemble = generate_ensemble(cfg.paths, cfg.steps, cfg.horizon, cfg.noise_dim, seed)?;

    let mut blowups = 0usize;
    match cfg.dump.as_str() {
        "trajectories" => {
            let mut rows = Vec::new();
            for path in 0..cfg.paths {
                let tr = euler_maruyama(&problem, &ensemble, path)?;
                if tr.blow_up_step.is_some() {
                    blowups += 1;
                }
                for step in 0..tr.grid_len() {
                    for (component, value) in tr.state(step).iter().enumerate() {
                        rows.push(vec![
                            path.to_string(),
                            step.to_string(),
                            component.to_string(),
                            fmt_f64(*value),
                        ]);
                    }
                }
            }
            write_csv(
                &ctx.output("trajectories.csv"),
                &["path", "step", "component", "value"],
                &rows,
            )?;
        }
        "increments" => {
            let mut rows = Vec::new();
            for path in 0..cfg.paths {
                for step in 0..cfg.steps {
                    for component in 0..cfg.noise_dim {
                        rows.push(vec![
                            path.to_string(),
                            step.to_string(),
                            component.to_string(),
                            fmt_f64(ensemble.increment(path, step, component)),
                        ]);
                    }
                }
            }
            write_csv(
                &ctx.output("increments.csv"),
                &["path", "step", "component", "value"],
                &rows,
            )?;
        }
        other => bail!("unknown dump kind `{other}` (expected trajectories or increments)"),
    }

    let mut summary_rows = vec![vec![
        "blowups".to_string(),
        blowups.to_string(),
        String::new(),
        cfg.paths.to_string(),
        cfg.steps.to_string(),
        seed.to_string(),
    ]];
    if let Some(q) = cfg.moment_q {
        let est = sup_moment(&problem, &ensemble, q)?;
        summary_rows.push(vec![
            format!("sup_moment_q{}", fmt_f64(q)),
            fmt_f64(est.value),
            fmt_f64(est.ci_halfwidth),
            est.paths_used.to_string(),
            cfg.steps.to_string(),
            seed.to_string(),
        ]);
    }
    write_csv(
        &ctx.output("summary.csv"),
        &["quantity", "value", "ci_halfwidth", "paths", "steps", "seed"],
        &summary_rows,
    )?;
    Ok(0)
}
