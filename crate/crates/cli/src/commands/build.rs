//! Construction and certification commands: approx, clamp, certify, norm.

use super::{load_network, scalar_fn, Ctx};
use crate::config::{ApproxConfig, CertifyConfig, ClampConfig, NormConfig};
use crate::report::{fmt_f64, render_svg, write_csv, Series};
use anyhow::{bail, Context, Result};
use lingrow::builders::{
    clamp_network_with, constrained_approximator, ApproxMode, ApproxParams, ClampParams,
    ClampedNetwork, CompactBox, Enlargement,
};
use lingrow::certify::{
    certify_growth, sup_norm_on_box, sup_on_support, weighted_sup_norm, CertMethod, CertifyMode,
    GridSpec, GrowthCertificate,
};
use lingrow::{ActivationKind, EvalScratch};
use std::fmt::Write as _;

pub fn cmd_approx(ctx: &Ctx, cfg: &ApproxConfig) -> Result<usize> {
    let f = scalar_fn(&cfg.f)?;
    let k = CompactBox::interval(cfg.k[0], cfg.k[1])?;
    let margin = Enlargement::new(cfg.margin)?;
    let mode = match cfg.mode.as_str() {
        "relu" => ApproxMode::Relu,
        "squash" => {
            let tag = cfg.rho1.as_deref().unwrap_or("logistic");
            let rho1 = ActivationKind::from_tag(tag)
                .with_context(|| format!("unknown activation tag `{tag}`"))?;
            ApproxMode::Squash {
                rho1,
                zeta: cfg.zeta.unwrap_or(0.5),
            }
        }
        other => bail!("unknown approx mode `{other}` (expected relu or squash)"),
    };
    let mut params = ApproxParams::default();
    if let Some(b) = cfg.knot_budget {
        params.knot_budget = b;
    }
    if let Some(g) = cfg.cert_grid {
        params.cert_grid = g;
    }

    ctx.log(&format!("building approximation of `{}` to eps = {}", cfg.f, cfg.eps));
    let out = constrained_approximator(&f, &k, &margin, cfg.eps, &mode, params)?;

    let net_path = ctx.output(&cfg.network_out);
    out.clamped.network.save(&net_path)?;
    ctx.log(&format!("network written to {}", net_path.display()));

    write_certificate(ctx, &out.certificate, &[
        ("sup_error_on_k", fmt_f64(out.sup_error_on_k)),
        ("sup_excess_on_j", fmt_f64(out.sup_excess_on_j)),
        ("knots", out.knots.to_string()),
        ("eps", fmt_f64(cfg.eps)),
    ])?;

    // Error profile: |phi - f| over K, and |phi|/(1 + |x|) over a wide range.
    let mut scratch = EvalScratch::default();
    let mut err_series = Vec::with_capacity(801);
    for i in 0..=800 {
        let x = cfg.k[0] + (cfg.k[1] - cfg.k[0]) * i as f64 / 800.0;
        let v = out.clamped.network.eval_with(&[x], &mut scratch)?[0];
        err_series.push((x, (v - f(x)).abs()));
    }
    let half_span = (cfg.k[1] - cfg.k[0]) / 2.0 + cfg.margin;
    let center = (cfg.k[0] + cfg.k[1]) / 2.0;
    let wide = half_span.max(1.0) * 20.0;
    let mut ratio_series = Vec::with_capacity(801);
    for i in 0..=800 {
        let x = center - wide + 2.0 * wide * i as f64 / 800.0;
        let v = out.clamped.network.eval_with(&[x], &mut scratch)?[0].abs();
        ratio_series.push((x, v / (1.0 + x.abs())));
    }
    let svg = render_svg(
        &format!("error profile: {}", cfg.f),
        &[
            Series {
                label: "|phi - f| on K".to_string(),
                color: "#d33",
                points: err_series,
            },
            Series {
                label: "|phi|/(1+|x|)".to_string(),
                color: "#36c",
                points: ratio_series,
            },
        ],
    );
    std::fs::write(ctx.output("error_profile.svg"), svg)?;
    Ok(0)
}

fn write_certificate(
    ctx: &Ctx,
    cert: &GrowthCertificate,
    extra: &[(&str, String)],
) -> Result<()> {
    let method = match cert.method {
        CertMethod::AnalyticLipschitz => "analytic_lipschitz",
        CertMethod::ClampedSupport => "clamped_support",
        CertMethod::SampledOnly => "sampled_only",
    };
    let (lo, hi) = match &cert.support_box {
        Some(b) => (fmt_f64(b.lower()[0]), fmt_f64(b.upper()[0])),
        None => (String::new(), String::new()),
    };
    let mut header = vec!["method", "constant", "sound", "evidence", "support_lo", "support_hi"];
    let mut row = vec![
        method.to_string(),
        fmt_f64(cert.constant),
        cert.sound.to_string(),
        fmt_f64(cert.evidence),
        lo,
        hi,
    ];
    for (k, v) in extra {
        header.push(k);
        row.push(v.clone());
    }
    write_csv(&ctx.output("certificate.csv"), &header, &[row])?;

    let mut text = String::new();
    let _ = writeln!(text, "growth certificate");
    let _ = writeln!(text, "  bound        |phi(x)| <= {} * (1 + |x|)", fmt_f64(cert.constant));
    let _ = writeln!(text, "  method       {method}");
    let _ = writeln!(text, "  sound        {}", cert.sound);
    if let Some(b) = &cert.support_box {
        let _ = writeln!(
            text,
            "  support      [{}, {}] (vanishes exactly outside)",
            fmt_f64(b.lower()[0]),
            fmt_f64(b.upper()[0])
        );
    }
    let _ = writeln!(text, "  evidence     max |phi|/psi = {} over the sweep", fmt_f64(cert.evidence));
    for (k, v) in extra {
        let _ = writeln!(text, "  {k:<12} {v}");
    }
    std::fs::write(ctx.output("certificate.txt"), text)?;
    Ok(())
}

pub fn cmd_clamp(ctx: &Ctx, cfg: &ClampConfig) -> Result<usize> {
    let net = load_network(ctx, &cfg.network)?;
    let k = CompactBox::interval(cfg.k[0], cfg.k[1])?;
    let margin = Enlargement::new(cfg.margin)?;
    let params = ClampParams {
        grid_points: cfg.grid_points.unwrap_or(100_000),
    };
    let clamped = clamp_network_with(&net, cfg.bound, &k, &margin, params)?;
    clamped.network.save(&ctx.output(&cfg.network_out))?;
    write_csv(
        &ctx.output("clamp.csv"),
        &["bound", "k_lo", "k_hi", "support_lo", "support_hi", "grid_points"],
        &[vec![
            fmt_f64(cfg.bound),
            fmt_f64(cfg.k[0]),
            fmt_f64(cfg.k[1]),
            fmt_f64(clamped.support.lower()[0]),
            fmt_f64(clamped.support.upper()[0]),
            params.grid_points.to_string(),
        ]],
    )?;
    Ok(0)
}

pub fn cmd_certify(ctx: &Ctx, cfg: &CertifyConfig) -> Result<usize> {
    let net = load_network(ctx, &cfg.network)?;
    let spec = GridSpec {
        points: cfg.grid_points.unwrap_or(100_000),
    };
    let cert = match cfg.mode.as_str() {
        "analytic_lipschitz" => certify_growth(CertifyMode::AnalyticLipschitz(&net))?,
        "clamped_support" => {
            let (k, margin) = match (cfg.k, cfg.margin) {
                (Some(k), Some(m)) => (CompactBox::interval(k[0], k[1])?, Enlargement::new(m)?),
                _ => bail!("clamped_support certification needs `k` and `margin`"),
            };
            let support = k.enlarged(&margin);
            // The support claim is structural for clamp-built networks; spot
            // check it by sampling before certifying.
            let mut scratch = EvalScratch::default();
            let span = support.upper()[0] - support.lower()[0];
            for i in 0..10_000 {
                let t = i as f64 / 9_999.0;
                for x in [
                    support.lower()[0] - 1e-9 - t * (1e3 + span),
                    support.upper()[0] + 1e-9 + t * (1e3 + span),
                ] {
                    let v = net.eval_with(&[x], &mut scratch)?[0].abs();
                    if v > 1e-12 {
                        bail!("network does not vanish outside the declared support: |phi({x})| = {v}");
                    }
                }
            }
            let mut clamped = ClampedNetwork {
                network: net.clone(),
                kernel: k.clone(),
                support: support.clone(),
                bound: 0.0,
                breakpoints: vec![vec![
                    support.lower()[0],
                    k.lower()[0],
                    k.upper()[0],
                    support.upper()[0],
                ]],
            };
            clamped.bound = sup_on_support(&clamped, spec)?;
            certify_growth(CertifyMode::ClampedSupport(&clamped, spec))?
        }
        other => bail!("unknown certify mode `{other}`"),
    };
    write_certificate(ctx, &cert, &[("grid_points", spec.points.to_string())])?;
    Ok(0)
}

pub fn cmd_norm(ctx: &Ctx, cfg: &NormConfig) -> Result<usize> {
    let f = scalar_fn(&cfg.f)?;
    let net = load_network(ctx, &cfg.network)?;
    let spec = GridSpec {
        points: cfg.grid_points.unwrap_or(100_000),
    };
    let (kind, estimate, domain) = match cfg.kind.as_str() {
        "weighted" => {
            let radius = cfg.radius.context("weighted norm needs `radius`")?;
            let est = weighted_sup_norm(|x| f(x[0]), &net, radius, spec)?;
            ("weighted", est, format!("radius {}", fmt_f64(radius)))
        }
        "box" => {
            let k = cfg.k.context("box norm needs `k`")?;
            let bx = CompactBox::interval(k[0], k[1])?;
            let est = sup_norm_on_box(|x| f(x[0]), &net, &bx, spec)?;
            ("box", est, format!("[{}, {}]", fmt_f64(k[0]), fmt_f64(k[1])))
        }
        other => bail!("unknown norm kind `{other}` (expected weighted or box)"),
    };
    write_csv(
        &ctx.output("norm.csv"),
        &["kind", "value", "attained_at", "points", "domain"],
        &[vec![
            kind.to_string(),
            fmt_f64(estimate.value),
            fmt_f64(estimate.attained_at[0]),
            estimate.points.to_string(),
            domain,
        ]],
    )?;
    Ok(0)
}
