//! End-to-end tests of the binary: exit codes, artifacts, report
//! determinism, and the negative control for the verification sweeps.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orlicz-el"));
    cmd.env("ORLICZ_EL_LOG", "quiet");
    cmd
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

const QUADRATIC: &str = r#"
seed = 0
[grid]
period = 1.0
nodes = 128
dim = 1
[lagrangian]
name = "quadratic_tracking"
[solver]
gradient_tolerance = 1e-9
init = "mean_search"
"#;

const EXP_COSH_GOOD: &str = r#"
seed = 0
[grid]
period = 1.0
nodes = 64
dim = 1
[lagrangian]
name = "exp_cosh_sublinear"
sigma = 1.5
[hypotheses]
p0 = 1.6
p1 = 1.8
nu = 1.9
# explicit conjugate-gauge selection (equals the derived default here)
psi1 = { family = "power", p = 2.25 }
[solver]
gradient_tolerance = 2e-7
init = "constant"
init_value = 2.0
"#;

const EXP_COSH_BAD_CHAIN: &str = r#"
seed = 0
[grid]
period = 1.0
nodes = 64
dim = 1
[lagrangian]
name = "exp_cosh_sublinear"
sigma = 1.5
[hypotheses]
p0 = 1.8
p1 = 1.6
nu = 1.9
[solver]
gradient_tolerance = 2e-7
init = "zero"
"#;

#[test]
fn solve_quadratic_converges_with_printed_analytic_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "q.toml", QUADRATIC);
    let out = dir.path().join("artifacts");
    let result = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report = std::fs::read_to_string(out.join("solve_report.txt")).unwrap();
    assert!(report.contains("config_sha256 = "));
    assert!(report.contains("converged = true"));
    let sup: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("sup_error_vs_analytic = "))
        .expect("analytic error line")
        .parse()
        .unwrap();
    assert!(sup <= 1e-4, "sup error {sup}");
    assert!(out.join("minimizer.csv").exists());
    assert!(out.join("action_history.csv").exists());
    // the minimizer CSV is a valid grid function
    let csv = std::fs::read_to_string(out.join("minimizer.csv")).unwrap();
    assert!(csv.starts_with("t,x1\n"));
    assert_eq!(csv.lines().count(), 129);
}

#[test]
fn solve_exponential_instance_passes_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "e.toml", EXP_COSH_GOOD);
    let out = dir.path().join("artifacts");
    let result = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report = std_fs_read(&out.join("solve_report.txt"));
    assert!(report.contains("verdict = pass"));
    assert!(report.contains("condition = A4"));
    assert!(report.contains("condition = A5"));
    assert!(report.contains("condition = A6"));
    assert!(report.contains("ordering_phi0_phi1 = holds"));
    assert!(report.contains("ordering_phi1_phi_star = holds"));
    let sup: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("sup_norm = "))
        .expect("sup_norm line")
        .parse()
        .unwrap();
    assert!(sup <= 1e-3, "sup norm {sup}");
    // machine-readable hypothesis rows sit next to the report
    let rows = std_fs_read(&out.join("hypotheses.csv"));
    assert!(rows.lines().any(|l| l.starts_with("A4,true")));
    assert!(rows.lines().any(|l| l.starts_with("A6,true")));
}

#[test]
fn solve_bad_chain_is_rejected_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", EXP_COSH_BAD_CHAIN);
    let out = dir.path().join("artifacts");
    let result = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(3));
    let report = std_fs_read(&out.join("solve_report.txt"));
    assert!(report.contains("verdict = rejected"));
    assert!(report.contains("phi0<<phi1"));

    // --force pushes through the failed heuristics and still converges
    let result = bin()
        .args(["solve", "--force", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let report = std_fs_read(&out.join("solve_report.txt"));
    assert!(report.contains("verdict = forced past failures"));
}

#[test]
fn solve_exhausted_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "slow.toml",
        r#"
seed = 0
[grid]
nodes = 64
[lagrangian]
name = "quadratic_tracking"
[solver]
max_iterations = 2
gradient_tolerance = 1e-12
init = "constant"
init_value = 3.0
"#,
    );
    let out = dir.path().join("artifacts");
    let result = bin()
        .args(["solve", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let report = std_fs_read(&out.join("solve_report.txt"));
    assert!(report.contains("converged = false"));
    // artifacts still carry the best iterate
    assert!(out.join("minimizer.csv").exists());
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "broken.toml",
        "[lagrangian]\nname = \"quadratic_tracking\"\nsgima = 1.5\n",
    );
    let result = bin().args(["solve", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("sgima"), "stderr should name the bad field: {stderr}");
}

#[test]
fn analyze_inline_families() {
    let result = bin().args(["analyze", "--family", "power", "--p", "2"]).output().unwrap();
    assert_eq!(result.status.code(), Some(0));
    let text = stdout_of(&result);
    let alpha: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("alpha = "))
        .unwrap()
        .parse()
        .unwrap();
    let beta: f64 =
        text.lines().find_map(|l| l.strip_prefix("beta = ")).unwrap().parse().unwrap();
    assert!((alpha - 2.0).abs() < 1e-6 && (beta - 2.0).abs() < 1e-6);

    let result = bin().args(["analyze", "--family", "exp_family", "--n", "2"]).output().unwrap();
    assert_eq!(result.status.code(), Some(0));
    let text = stdout_of(&result);
    let alpha: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("alpha = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((alpha - 2.0).abs() <= 0.1);
    assert!(text.contains("delta2_at_infinity = fails"));

    let result = bin().args(["analyze", "--family", "nope"]).output().unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("family"));
}

#[test]
fn analyze_config_ordering_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ord.toml",
        r#"
[[ordering]]
lhs = { family = "power", p = 1.5 }
rhs = { family = "power", p = 2.0 }
relation = "essentially_stronger"

[[ordering]]
lhs = { family = "log_perturbed", k = 2 }
rhs = { family = "log_perturbed", k = 1 }
relation = "essentially_stronger"
a_min = 0.1
a_max = 10.0
a_points = 25
x_min = 1.0
x_max = 1e45
x_points = 541
"#,
    );
    let result = bin().args(["analyze", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = stdout_of(&result);
    let holds = text.lines().filter(|l| l.trim() == "holds = true").count();
    assert_eq!(holds, 2, "both declared pairs must hold:\n{text}");
}

const VERIFY_SMALL: &str = r#"
seed = 0
[verify]
samples = 300
grid_nodes = 32
"#;

#[test]
fn verify_clean_run_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v.toml", VERIFY_SMALL);
    let result = bin().args(["verify", "--config"]).arg(&config).output().unwrap();
    assert_eq!(result.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    assert!(stdout_of(&result).contains("total_violations = 0"));

    // halving the Sobolev constant must produce violations
    let control = write_config(
        dir.path(),
        "vc.toml",
        r#"
seed = 0
[verify]
samples = 300
grid_nodes = 32
sobolev_scale = 0.5
"#,
    );
    let result = bin().args(["verify", "--config"]).arg(&control).output().unwrap();
    assert_eq!(result.status.code(), Some(2));
    let text = stdout_of(&result);
    let total: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("total_violations = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(total > 0);
}

#[test]
fn verify_reports_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "v.toml", VERIFY_SMALL);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let result = bin()
            .args(["verify", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert_eq!(result.status.code(), Some(0));
    }
    let a = std_fs_read(&out1.join("verify_report.txt"));
    let b = std_fs_read(&out2.join("verify_report.txt"));
    assert_eq!(a, b, "same config + seed must reproduce the report byte for byte");

    // a different seed keeps the verdicts but moves the worst probes
    let result = bin()
        .args(["verify", "--seed", "7", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0));
    let c = stdout_of(&result);
    assert!(c.contains("total_violations = 0"));
    assert_ne!(a, c);
}

fn std_fs_read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}
