//! Report plumbing: verbosity from `ORLICZ_EL_LOG`, deterministic headers
//! carrying the config hash, and output-directory writes.
//!
//! Reports must be byte-identical for identical config + seed, so they
//! carry no timestamps or host paths; floats print in Rust's shortest
//! round-trip form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Normal,
    Debug,
}

impl Verbosity {
    pub fn from_env() -> Self {
        match std::env::var("ORLICZ_EL_LOG").as_deref() {
            Ok("quiet") => Verbosity::Quiet,
            Ok("debug") => Verbosity::Debug,
            _ => Verbosity::Normal,
        }
    }

    /// Progress chatter; stderr so report bytes on stdout stay stable.
    pub fn say(&self, msg: &str) {
        if *self >= Verbosity::Normal {
            eprintln!("{msg}");
        }
    }

    pub fn debug(&self, msg: &str) {
        if *self >= Verbosity::Debug {
            eprintln!("[debug] {msg}");
        }
    }
}

/// Standard report header: command, config hash, effective seed, and any
/// extra audit fields (probe ranges and the like).
pub fn header(command: &str, config_hash: &str, seed: u64, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# orlicz-el {command} report");
    let _ = writeln!(s, "config_sha256 = {config_hash}");
    let _ = writeln!(s, "seed = {seed}");
    for (key, value) in extra {
        let _ = writeln!(s, "{key} = {value}");
    }
    s
}

/// Writes `content` under `dir/name`, creating the directory when needed.
pub fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .with_context(|| format!("cannot write report {}", path.display()))?;
    Ok(path)
}
