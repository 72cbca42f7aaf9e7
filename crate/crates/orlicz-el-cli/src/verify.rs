//! `verify`: seeded property sweeps over the inequality suite, with
//! per-family violation counts and worst slacks. Exit code 0 on a clean
//! sweep, 2 when any violation was recorded.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args as ClapArgs;

use orlicz_el::sweeps::{
    amemiya_sweep, holder_sweep, sobolev_sweep, young_sweep, SweepOptions, SweepReport,
};

use crate::config::{self, InstanceConfig};
use crate::report::{self, Verbosity};

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Instance config file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample-count override
    #[arg(long)]
    probes: Option<usize>,
}

pub fn run(args: Args) -> Result<i32> {
    let log = Verbosity::from_env();
    let (cfg, hash) = match &args.config {
        Some(path) => config::load(path)?,
        None => (InstanceConfig::default(), config::inline_hash("verify defaults")),
    };
    let seed = args.seed.unwrap_or(cfg.seed);
    let opts = SweepOptions {
        samples: args.probes.unwrap_or(cfg.verify.samples),
        seed,
        grid_nodes: cfg.verify.grid_nodes,
        period: cfg.verify.period,
        sobolev_scale: cfg.verify.sobolev_scale,
        ..Default::default()
    };

    let mut body = report::header(
        "verify",
        &hash,
        seed,
        &[
            ("samples", opts.samples.to_string()),
            ("grid_nodes", opts.grid_nodes.to_string()),
            ("period", opts.period.to_string()),
            ("sobolev_scale", opts.sobolev_scale.to_string()),
        ],
    );
    let _ = writeln!(body, "family,sweep,samples,violations,worst_rel_slack,worst_index");

    let mut total_violations = 0usize;
    for fam in cfg.verify.families_or_default() {
        let phi = fam.to_nfunction()?;
        log.say(&format!("sweeping {}", phi.name()));
        let mut push = |body: &mut String, rep: &SweepReport| {
            total_violations += rep.violations;
            let _ = writeln!(body, "{},{}", phi.name(), rep.csv_row());
        };
        let rep = young_sweep(&phi, &opts)?;
        push(&mut body, &rep);
        let rep = holder_sweep(&phi, &opts)?;
        push(&mut body, &rep);
        let (sob, wir) = sobolev_sweep(&phi, &opts, &[0.5, 1.0, 2.0])?;
        push(&mut body, &sob);
        push(&mut body, &wir);
        let rep = amemiya_sweep(&phi, &opts)?;
        push(&mut body, &rep);
    }
    let _ = writeln!(body, "total_violations = {total_violations}");

    print!("{body}");
    if let Some(dir) = &args.out {
        let path = report::write_out(dir, "verify_report.txt", &body)?;
        log.say(&format!("wrote {}", path.display()));
    }
    Ok(if total_violations == 0 { 0 } else { 2 })
}
