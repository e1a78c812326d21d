//! Command implementations. Each command reads its config section, writes its
//! reports under the output directory, and returns the number of failed
//! assertions (exit status 0 iff zero).

mod bounds;
mod build;
mod simulate;

pub use bounds::cmd_bounds;
pub use build::{cmd_approx, cmd_certify, cmd_clamp, cmd_norm};
pub use simulate::{cmd_flow, cmd_gen_paths, cmd_sde_compare};

use crate::config::CoefficientSpec;
use anyhow::{bail, Context, Result};
use lingrow::expr::Expr;
use lingrow::sde::Coefficient;
use lingrow::Network;
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub out: PathBuf,
    pub config_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub verbose: bool,
}

impl Ctx {
    /// Resolve a config-relative input path.
    pub fn input(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.config_dir.join(p)
        }
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("[lingrow] {msg}");
        }
    }
}

pub fn load_network(ctx: &Ctx, rel: &str) -> Result<Network> {
    let path = ctx.input(rel);
    Network::load(&path).with_context(|| format!("loading network {}", path.display()))
}

/// Scalar target function from an expression of `x`; evaluation faults map to
/// NaN so the grid sweeps report them with the offending point.
pub fn scalar_fn(src: &str) -> Result<impl Fn(f64) -> f64> {
    let expr = Expr::parse(src).with_context(|| format!("parsing `{src}`"))?;
    Ok(move |x: f64| expr.eval(None, &[x]).unwrap_or(f64::NAN))
}

pub fn coefficient(ctx: &Ctx, spec: &CoefficientSpec, what: &str) -> Result<Coefficient> {
    match (&spec.exprs, &spec.network) {
        (Some(srcs), None) => {
            let mut exprs = Vec::with_capacity(srcs.len());
            for s in srcs {
                exprs.push(Expr::parse(s).with_context(|| format!("{what}: parsing `{s}`"))?);
            }
            Ok(Coefficient::Exprs(exprs))
        }
        (None, Some(file)) => Ok(Coefficient::Network {
            net: load_network(ctx, file)?,
            time_input: spec.time_input,
        }),
        _ => bail!("{what}: specify exactly one of `exprs` or `network`"),
    }
}
