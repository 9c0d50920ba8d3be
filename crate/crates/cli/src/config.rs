//! Resolved run configuration, its canonical text form and digest.

use std::fmt::Write as _;

use rotmorse::{EquilibriumBranch, MoleculeParams, TimeFraction};
use sha2::{Digest, Sha256};

use crate::args::{Command, GlobalArgs, JSet};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
}

/// Everything that determines the numbers a command writes. Fields a
/// command does not read stay `None` and are left out of the digest.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub molecule_name: String,
    pub molecule: MoleculeParams,
    pub equilibrium: EquilibriumBranch,
    pub js: Option<JSet>,
    pub alpha: Option<f64>,
    pub time: Option<TimeFraction>,
    pub grid: Option<(usize, usize)>,
    /// Command-specific settings as ordered key/value pairs.
    pub extra: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: &Command, global: &GlobalArgs, molecule: MoleculeParams) -> Self {
        Self {
            command: command.name(),
            molecule_name: global.molecule.clone(),
            molecule,
            equilibrium: global.equilibrium,
            js: None,
            alpha: None,
            time: None,
            grid: None,
            extra: Vec::new(),
        }
    }

    /// One `key = value` line per setting, in a fixed order.
    pub fn canonical(&self) -> String {
        let m = &self.molecule;
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("command", self.command.to_string());
        line("molecule", self.molecule_name.clone());
        line("D", format!("{:e}", m.d));
        line("beta", format!("{:e}", m.beta));
        line("r0", format!("{:e}", m.r0));
        line("mu", format!("{:e}", m.mu));
        line("equilibrium", self.equilibrium.to_string());
        if let Some(js) = &self.js {
            line("j", js.to_string());
        }
        if let Some(a) = self.alpha {
            line("alpha", format!("{a:e}"));
        }
        if let Some(t) = self.time {
            line("time", format!("{t} T_rev"));
        }
        if let Some((r, p)) = self.grid {
            line("grid", format!("{r} x {p}"));
        }
        for (k, v) in &self.extra {
            line(k, v.clone());
        }
        s
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    /// Comment header for an output file.
    pub fn header(&self, description: &str, columns: &[&str]) -> String {
        let mut h = format!(
            "# rotmorse {}\n# config sha256 {}\n",
            rotmorse::VERSION,
            self.digest()
        );
        for l in self.canonical().lines() {
            let _ = writeln!(h, "#   {l}");
        }
        let _ = writeln!(h, "# {description}");
        let _ = writeln!(
            h,
            "# units: atomic (bohr, hartree, hbar/hartree, hbar/bohr); angles in radians unless noted"
        );
        if !columns.is_empty() {
            let _ = writeln!(h, "# columns: {}", columns.join("\t"));
        }
        h
    }
}
