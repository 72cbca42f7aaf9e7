//! `analyze`: index estimates, doubling verdicts, conjugate value tables and
//! ordering-relation reports for configured or inline N-functions.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args as ClapArgs;

use orlicz_el::nfunction::{
    check_delta2, check_ordering, mo_indices, Delta2Variant, IndexProbeConfig, NFunction,
    OrderingProbe, OrderingRelation,
};
use orlicz_el::orlicz::default_conjugate;
use orlicz_el::probe::{log_spaced, ProbeConfig};

use crate::config::{self, FamilyConfig, InstanceConfig};
use crate::report::{self, Verbosity};

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Instance config file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed override (analyze itself is deterministic; recorded for audit)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe points per scan grid
    #[arg(long)]
    probes: Option<usize>,
    /// Inline family selection (alternative to --config)
    #[arg(long)]
    family: Option<String>,
    /// Exponent for --family power
    #[arg(long)]
    p: Option<f64>,
    /// Order for --family exp_family
    #[arg(long)]
    n: Option<u32>,
    /// Log power for --family log_perturbed
    #[arg(long)]
    k: Option<u32>,
}

pub fn run(args: Args) -> Result<i32> {
    let log = Verbosity::from_env();
    let (cfg, hash) = match (&args.config, &args.family) {
        (Some(path), _) => config::load(path)?,
        (None, Some(name)) => {
            let fam = FamilyConfig::from_cli(name, args.p, args.n, args.k)?;
            let mut cfg = InstanceConfig::default();
            cfg.analyze.push(fam);
            let hash = config::inline_hash(&format!(
                "analyze family={name} p={:?} n={:?} k={:?}",
                args.p, args.n, args.k
            ));
            (cfg, hash)
        }
        (None, None) => bail!("analyze needs --config or --family"),
    };
    let seed = args.seed.unwrap_or(cfg.seed);

    let mut families = cfg.analyze.clone();
    if families.is_empty() {
        if let Some(phi) = cfg.phi {
            families.push(phi);
        }
    }
    if families.is_empty() && cfg.ordering.is_empty() {
        bail!("nothing to analyze: declare [[analyze]] families, [phi], or [[ordering]] pairs");
    }

    let index_probe = IndexProbeConfig::default();
    let scan_points = args.probes.unwrap_or(241);
    let scan = ProbeConfig { points: scan_points, ..ProbeConfig::default() };

    let mut body = report::header(
        "analyze",
        &hash,
        seed,
        &[
            ("index_probe_t", format!("[{}, {}]", index_probe.t_min, index_probe.t_max)),
            ("index_probe_u", format!("[{}, {}]", index_probe.u_min, index_probe.u_max)),
            ("scan_range", format!("[{}, {}] x {}", scan.x_min, scan.x_max, scan.points)),
        ],
    );

    for fam in &families {
        let phi = fam.to_nfunction()?;
        log.say(&format!("analyzing {}", phi.name()));
        write_family_block(&mut body, &phi, &index_probe, &scan)?;
    }

    for ord in &cfg.ordering {
        let lhs = ord.lhs.to_nfunction()?;
        let rhs = ord.rhs.to_nfunction()?;
        let relation = parse_relation(&ord.relation)?;
        let probe = OrderingProbe {
            a_min: ord.a_min,
            a_max: ord.a_max,
            a_points: ord.a_points,
            x: ProbeConfig::new(ord.x_min, ord.x_max, ord.x_points),
        };
        log.say(&format!("ordering {} vs {}", lhs.name(), rhs.name()));
        let rep = check_ordering(&lhs, &rhs, relation, &probe)?;
        let _ = writeln!(body, "[ordering {} {} {}]", lhs.name(), relation, rhs.name());
        let _ = writeln!(body, "holds = {}", rep.holds);
        let _ = writeln!(body, "witness_a = {}", rep.witness_a);
        let _ = writeln!(body, "witness_x0 = {}", rep.witness_x0);
        let _ = writeln!(body, "witness_k = {}", rep.witness_k);
        let _ = writeln!(body, "violations = {:?}", rep.violations);
        let _ = writeln!(
            body,
            "probe = a in [{}, {}], x in [{}, {}]",
            probe.a_min, probe.a_max, probe.x.x_min, probe.x.x_max
        );
        let _ = writeln!(body);
    }

    print!("{body}");
    if let Some(dir) = &args.out {
        let path = report::write_out(dir, "analyze_report.txt", &body)?;
        log.say(&format!("wrote {}", path.display()));
    }
    Ok(0)
}

fn write_family_block(
    body: &mut String,
    phi: &NFunction,
    index_probe: &IndexProbeConfig,
    scan: &ProbeConfig,
) -> Result<()> {
    let _ = writeln!(body, "[nfunction {}]", phi.name());
    let est = mo_indices(phi, index_probe).context("index estimation failed")?;
    let _ = writeln!(body, "alpha = {}", est.alpha);
    let _ = writeln!(body, "alpha_stderr = {}", est.alpha_stderr);
    let _ = writeln!(body, "beta = {}", est.beta);
    let _ = writeln!(body, "beta_stderr = {}", est.beta_stderr);
    for variant in [Delta2Variant::Global, Delta2Variant::AtInfinity, Delta2Variant::AtZero] {
        let rep = check_delta2(phi, variant, scan)?;
        let verdict = if rep.holds { "holds" } else { "fails" };
        let _ = writeln!(
            body,
            "delta2_{variant} = {verdict} (log sup ratio {} at x = {}, heuristic)",
            rep.log_sup_ratio, rep.worst_x
        );
    }
    let psi = default_conjugate(phi)?;
    let _ = writeln!(body, "conjugate_table:");
    let _ = writeln!(body, "y,psi(y)");
    for y in log_spaced(1e-3, 1e3, 13) {
        let _ = writeln!(body, "{y},{}", psi.eval(y));
    }
    let _ = writeln!(body);
    Ok(())
}

fn parse_relation(name: &str) -> Result<OrderingRelation> {
    match name {
        "stronger" => Ok(OrderingRelation::Stronger),
        "essentially_stronger" => Ok(OrderingRelation::EssentiallyStronger),
        "completely_stronger" => Ok(OrderingRelation::CompletelyStronger),
        other => bail!(
            "unknown value '{other}' for field 'relation' (expected stronger, essentially_stronger or completely_stronger)"
        ),
    }
}
