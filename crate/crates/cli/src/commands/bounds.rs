//! The bounds command: closed-form constants to CSV.

use super::Ctx;
use crate::config::BoundsConfig;
use crate::report::{fmt_f64, write_csv};
use anyhow::{bail, Context, Result};
use lingrow::bounds::{
    holder_condition, holder_radius, holder_witness_search, lipschitz_constants, HolderInputs,
    LipschitzBoundInputs,
};

pub fn cmd_bounds(ctx: &Ctx, cfg: &BoundsConfig) -> Result<usize> {
    match cfg.kind.as_str() {
        "lipschitz" => lipschitz(ctx, cfg),
        "holder" => holder(ctx, cfg),
        other => bail!("unknown bounds kind `{other}` (expected lipschitz or holder)"),
    }
}

fn lipschitz(ctx: &Ctx, cfg: &BoundsConfig) -> Result<usize> {
    let inputs = LipschitzBoundInputs {
        epsilon: cfg.eps,
        p: cfg.p.context("lipschitz bounds need `p`")?,
        horizon: cfg.horizon,
        lipschitz: cfg.lipschitz.context("lipschitz bounds need `lipschitz`")?,
        growth: cfg.growth.context("lipschitz bounds need `growth`")?,
        net_growth: cfg.net_growth.context("lipschitz bounds need `net_growth`")?,
        x0: cfg.x0.clone().context("lipschitz bounds need `x0`")?,
    };
    let report = lipschitz_constants(&inputs)?;
    write_csv(
        &ctx.output("bounds.csv"),
        &[
            "kind",
            "c",
            "delta",
            "log_delta",
            "a_tilde",
            "log_a_tilde",
            "a",
            "log_a",
            "log_r",
            "r",
            "log_k_radius",
            "k_radius",
            "round_trip_residual",
        ],
        &[vec![
            "lipschitz".to_string(),
            fmt_f64(report.c),
            fmt_f64(report.delta),
            fmt_f64(report.log_delta),
            fmt_f64(report.a_tilde),
            fmt_f64(report.log_a_tilde),
            fmt_f64(report.a),
            fmt_f64(report.log_a),
            fmt_f64(report.log_r),
            report.r.map(fmt_f64).unwrap_or_default(),
            fmt_f64(report.log_k_radius),
            report.k_radius.map(fmt_f64).unwrap_or_default(),
            fmt_f64(report.round_trip_log_residual()),
        ]],
    )?;
    Ok(0)
}

fn holder(ctx: &Ctx, cfg: &BoundsConfig) -> Result<usize> {
    let inputs = HolderInputs {
        epsilon: cfg.eps,
        gamma: cfg.gamma.context("holder bounds need `gamma`")?,
        alpha: cfg.alpha.context("holder bounds need `alpha`")?,
        beta: cfg.beta.context("holder bounds need `beta`")?,
        delta: cfg.delta.context("holder bounds need `delta`")?,
        lipschitz: cfg.lipschitz.context("holder bounds need `lipschitz`")?,
        horizon: cfg.horizon,
    };
    let (lhs, admissible) = holder_condition(&inputs)?;

    let mut header = vec!["kind", "lhs", "eps_half", "admissible"];
    let mut row = vec![
        "holder".to_string(),
        fmt_f64(lhs),
        fmt_f64(cfg.eps / 2.0),
        admissible.to_string(),
    ];

    if cfg.witness_search {
        header.extend(["witness_alpha", "witness_beta", "witness_delta"]);
        match holder_witness_search(cfg.eps, inputs.gamma, inputs.lipschitz, cfg.horizon) {
            Some((a, b, d)) => row.extend([fmt_f64(a), fmt_f64(b), fmt_f64(d)]),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
    }

    // Radius of the associated box when the growth constants are supplied.
    if let (Some(g), Some(ng), Some(x0)) = (cfg.growth, cfg.net_growth, cfg.x0.as_ref()) {
        if x0.len() == 1 {
            let hr = holder_radius(cfg.eps, cfg.horizon, g, ng, x0[0])?;
            header.extend(["log_r", "r"]);
            row.push(fmt_f64(hr.log_r));
            row.push(hr.r.map(fmt_f64).unwrap_or_default());
        }
    }

    write_csv(&ctx.output("bounds.csv"), &header, &[row])?;
    Ok(0)
}
