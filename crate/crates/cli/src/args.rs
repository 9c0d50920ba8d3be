use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rotmorse::{EquilibriumBranch, TimeFraction};

#[derive(Debug, Parser)]
#[command(
    name = "rotmorse",
    version,
    about = "Coherent-state dynamics of the rotating Morse oscillator"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Molecule profile name or key-value parameter file.
    #[arg(long, global = true, default_value = "i2")]
    pub molecule: String,

    /// Rotational levels: `45`, `0..160` (inclusive), `0..=160` or `38,82,104`.
    #[arg(long, global = true)]
    pub j: Option<JSet>,

    /// Coherent-state parameter.
    #[arg(long, global = true, default_value_t = 1.6)]
    pub alpha: f64,

    /// Time as a fraction `p/q` of the revival time.
    #[arg(long, global = true)]
    pub time: Option<TimeFraction>,

    /// Wigner rows along r.
    #[arg(long = "grid-r", global = true, default_value_t = 512)]
    pub grid_r: usize,

    /// Wigner columns along p.
    #[arg(long = "grid-p", global = true, default_value_t = 512)]
    pub grid_p: usize,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Equilibrium geometry: `semianalytic` or `numeric`.
    #[arg(long, global = true, default_value = "semianalytic")]
    pub equilibrium: EquilibriumBranch,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Bound-state energies and wavefunctions.
    Eigen {
        /// Write wavefunction columns for the lowest N levels only.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Wave packet at a fraction of the revival time.
    Evolve,
    /// Wigner function as a gnuplot nonuniform matrix.
    Wigner {
        /// Print a coarse character rendering of the field.
        #[arg(long)]
        preview: bool,
    },
    /// Classical action (and optionally tile areas) across j.
    Scan {
        /// Also measure tile areas at the reference levels inside the scan.
        #[arg(long)]
        tiles: bool,
    },
    /// Scaling fit of tile area against inverse action.
    Fit {
        /// Scan table to fit instead of computing the reference levels.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Rotation angle relating the j packet to the rotated j = 0 packet.
    Angle {
        /// Evaluate the built-in reference angle table.
        #[arg(long)]
        table1: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigen { .. } => "eigen",
            Command::Evolve => "evolve",
            Command::Wigner { .. } => "wigner",
            Command::Scan { .. } => "scan",
            Command::Fit { .. } => "fit",
            Command::Angle { .. } => "angle",
        }
    }
}

/// Sorted, deduplicated set of rotational levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JSet(Vec<u32>);

impl JSet {
    pub fn new(mut js: Vec<u32>) -> Self {
        js.sort_unstable();
        js.dedup();
        Self(js)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

impl FromStr for JSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad rotational level '{}' in '{s}'", t.trim()))
        };
        let mut js = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            if let Some((a, b)) = part.split_once("..") {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(format!("empty range '{part}'"));
                }
                js.extend(a..=b);
            } else {
                js.push(num(part)?);
            }
        }
        if js.is_empty() {
            return Err("no rotational levels given".into());
        }
        Ok(Self::new(js))
    }
}

/// Compact form with consecutive runs written as `a..=b`.
impl fmt::Display for JSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut k = i;
            while k + 1 < self.0.len() && self.0[k + 1] == self.0[k] + 1 {
                k += 1;
            }
            parts.push(if k > i + 1 {
                format!("{}..={}", self.0[i], self.0[k])
            } else if k == i + 1 {
                format!("{},{}", self.0[i], self.0[k])
            } else {
                self.0[i].to_string()
            });
            i = k + 1;
        }
        f.write_str(&parts.join(","))
    }
}
