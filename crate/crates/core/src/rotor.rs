//! Rotating Morse effective potential and its j-dependent constants.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical constants of a diatomic molecule in atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeParams {
    /// Dissociation energy (hartree).
    pub d: f64,
    /// Morse range parameter (bohr⁻¹).
    pub beta: f64,
    /// Equilibrium separation (bohr).
    pub r0: f64,
    /// Reduced mass (electron masses).
    pub mu: f64,
}

impl MoleculeParams {
    pub fn new(d: f64, beta: f64, r0: f64, mu: f64) -> Result<Self> {
        for (name, v) in [("D", d), ("beta", beta), ("r0", r0), ("mu", mu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let p = Self { d, beta, r0, mu };
        if p.lambda0() <= 1.0 {
            return Err(Error::Domain(format!(
                "sqrt(2 mu D)/beta = {} leaves no bound state",
                p.lambda0()
            )));
        }
        Ok(p)
    }

    /// Molecular iodine, B state.
    pub fn i2() -> Self {
        Self {
            d: 0.0198,
            beta: 0.9605,
            r0: 5.716,
            mu: 11.56e4,
        }
    }

    /// Looks up a bundled profile by name.
    pub fn profile(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "i2" => Some(Self::i2()),
            _ => None,
        }
    }

    /// λ₀ = √(2μD)/β for the non-rotating molecule.
    pub fn lambda0(&self) -> f64 {
        (2.0 * self.mu * self.d).sqrt() / self.beta
    }

    /// Parses flat `key = value` text (keys `D`, `beta`, `r0`, `mu`).
    ///
    /// `#` starts a comment; `key value` and `key: value` are accepted too.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: [Option<f64>; 4] = [None; 4];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line
                .splitn(2, |c: char| c == '=' || c == ':' || c.is_whitespace())
                .map(str::trim);
            let key = parts.next().unwrap_or("");
            let value = parts
                .next()
                .map(|v| v.trim_start_matches(['=', ':']).trim())
                .unwrap_or("");
            let slot = match key.to_ascii_lowercase().as_str() {
                "d" => 0,
                "beta" => 1,
                "r0" => 2,
                "mu" => 3,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            };
            let v: f64 = value
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{value}'", lineno + 1)))?;
            fields[slot] = Some(v);
        }
        let get = |i: usize, name: &str| {
            fields[i].ok_or_else(|| Error::Parse(format!("missing key '{name}'")))
        };
        Self::new(get(0, "D")?, get(1, "beta")?, get(2, "r0")?, get(3, "mu")?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Profile name or parameter file path.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::profile(spec) {
            Some(p) => Ok(p),
            None if Path::new(spec).exists() => Self::from_file(spec),
            None => Err(Error::Parse(format!(
                "'{spec}' is neither a known profile nor a readable file"
            ))),
        }
    }

    /// Centrifugal energy j(j+1)/(2μr²).
    pub fn centrifugal(&self, j: u32, r: f64) -> f64 {
        let jj = j as f64 * (j as f64 + 1.0);
        jj / (2.0 * self.mu * r * r)
    }
}

impl fmt::Display for MoleculeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "D = {}\nbeta = {}\nr0 = {}\nmu = {}\n",
            self.d, self.beta, self.r0, self.mu
        )
    }
}

/// D[e^{−2β(r−r0)} − 2e^{−β(r−r0)}] + j(j+1)/(2μr²).
pub fn effective_potential(params: &MoleculeParams, j: u32, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    let e = (-params.beta * (r - params.r0)).exp();
    Ok(params.d * (e * e - 2.0 * e) + params.centrifugal(j, r))
}

/// dV_eff/dr.
pub fn effective_force_slope(params: &MoleculeParams, j: u32, r: f64) -> f64 {
    let e = (-params.beta * (r - params.r0)).exp();
    2.0 * params.beta * params.d * (e - e * e) - 2.0 * params.centrifugal(j, r) / r
}

/// Shifted equilibrium and depth of the rotating well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// bohr
    pub r_j: f64,
    /// hartree
    pub d_j: f64,
}

/// Semianalytic r_j and D_j from the first-order expansion about r0.
pub fn equilibrium_semianalytic(params: &MoleculeParams, j: u32) -> Equilibrium {
    let a = params.centrifugal(j, params.r0);
    let ratio = a / (params.beta * params.beta * params.r0 * params.r0 * params.d);
    Equilibrium {
        r_j: params.r0 * (1.0 + ratio),
        d_j: params.d - a * (1.0 - ratio),
    }
}

const ROOT_SCAN_STEPS: usize = 4000;

/// Local minimum of V_eff nearest r0, found by root-bracketing dV/dr = 0.
///
/// For j > 0 the slope is negative at r0; the scan walks outward over
/// [r0, 3·r0] to the first sign change and bisects it to machine precision.
pub fn equilibrium_numeric(params: &MoleculeParams, j: u32) -> Result<f64> {
    if j == 0 {
        return Ok(params.r0);
    }
    let slope = |r: f64| effective_force_slope(params, j, r);
    let lo_end = params.r0;
    let hi_end = 3.0 * params.r0;
    let step = (hi_end - lo_end) / ROOT_SCAN_STEPS as f64;
    let mut lo = lo_end;
    let mut f_lo = slope(lo);
    let mut bracket = None;
    for i in 1..=ROOT_SCAN_STEPS {
        let hi = lo_end + step * i as f64;
        let f_hi = slope(hi);
        if f_lo < 0.0 && f_hi >= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoRoot { j })?;
    // bisect down to adjacent floating-point numbers
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let f_mid = slope(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EquilibriumBranch {
    #[default]
    Semianalytic,
    Numeric,
}

impl FromStr for EquilibriumBranch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semianalytic" => Ok(Self::Semianalytic),
            "numeric" => Ok(Self::Numeric),
            other => Err(Error::Parse(format!(
                "unknown equilibrium branch '{other}'"
            ))),
        }
    }
}

impl fmt::Display for EquilibriumBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Semianalytic => "semianalytic",
            Self::Numeric => "numeric",
        })
    }
}

/// j-dependent constants of the rotating Morse oscillator after the
/// centrifugal term is expanded to second order about r_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorConstants {
    pub params: MoleculeParams,
    pub j: u32,
    pub branch: EquilibriumBranch,
    /// Centrifugal energy at r0 (hartree).
    pub a: f64,
    /// Centrifugal energy at r_j (hartree).
    pub a_j: f64,
    /// Shifted equilibrium (bohr).
    pub r_j: f64,
    /// Shifted depth (hartree).
    pub d_j: f64,
    /// exp(−β(r_j − r0)).
    pub u: f64,
    /// (β r_j)⁻¹.
    pub b_j: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// √(2μc2)/β.
    pub lambda_j: f64,
    /// (c1/c2) λ_j.
    pub lambda_bar_j: f64,
}

impl RotorConstants {
    /// Constants on the default (semianalytic) equilibrium branch.
    pub fn new(params: &MoleculeParams, j: u32) -> Result<Self> {
        Self::with_branch(params, j, EquilibriumBranch::Semianalytic)
    }

    pub fn with_branch(params: &MoleculeParams, j: u32, branch: EquilibriumBranch) -> Result<Self> {
        let semi = equilibrium_semianalytic(params, j);
        // the numeric root doubles as the check that a minimum exists
        let r_numeric = equilibrium_numeric(params, j)?;
        let (r_j, d_j) = match branch {
            EquilibriumBranch::Semianalytic => (semi.r_j, semi.d_j),
            EquilibriumBranch::Numeric => (r_numeric, -effective_potential(params, j, r_numeric)?),
        };
        if d_j <= 0.0 {
            return Err(Error::ModelValidity {
                j,
                reason: format!("well depth D_j = {d_j:e} is not positive"),
            });
        }
        let a = params.centrifugal(j, params.r0);
        let a_j = params.centrifugal(j, r_j);
        let u = (-params.beta * (r_j - params.r0)).exp();
        let b_j = 1.0 / (params.beta * r_j);
        let (c0, c1, c2) = if j == 0 {
            (0.0, params.d, params.d)
        } else {
            let bb = b_j * b_j;
            (
                3.0 * a_j * bb - 3.0 * a_j * b_j + a_j,
                (3.0 * a_j * bb - 2.0 * a_j * b_j + u * params.d) / u,
                (3.0 * a_j * bb - a_j * b_j + u * u * params.d) / (u * u),
            )
        };
        if c2 <= 0.0 {
            return Err(Error::ModelValidity {
                j,
                reason: format!("c2 = {c2:e} is not positive"),
            });
        }
        let lambda_j = (2.0 * params.mu * c2).sqrt() / params.beta;
        let lambda_bar_j = c1 / c2 * lambda_j;
        if lambda_bar_j <= 0.5 {
            return Err(Error::ModelValidity {
                j,
                reason: format!("lambda_bar = {lambda_bar_j} supports no bound state"),
            });
        }
        Ok(Self {
            params: *params,
            j,
            branch,
            a,
            a_j,
            r_j,
            d_j,
            u,
            b_j,
            c0,
            c1,
            c2,
            lambda_j,
            lambda_bar_j,
        })
    }

    /// Potential of the expanded Hamiltonian, c0 + c2 e^{−2βx} − 2c1 e^{−βx}
    /// with x = r − r0; its exact spectrum is the energy formula of
    /// [`crate::eigen::eigen_energy`].
    pub fn expanded_potential(&self, r: f64) -> f64 {
        let e = (-self.params.beta * (r - self.params.r0)).exp();
        self.c0 + self.c2 * e * e - 2.0 * self.c1 * e
    }

    /// Bottom of the expanded well, c0 − c1²/c2.
    pub fn well_floor(&self) -> f64 {
        self.c0 - self.c1 * self.c1 / self.c2
    }
}
