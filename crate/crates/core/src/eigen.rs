//! Bound states of the rotating Morse oscillator.
//!
//! With the centrifugal term expanded to second order the Hamiltonian is of
//! Morse type, so its eigenfunctions are
//! `ψ_n(y) = N e^{−y/2} y^s L_n^{2s}(y)` with `y = 2λ_j e^{−β(r−r0)}` and
//! `s = λ̄_j − n − ½`.

use crate::error::{Error, Result};
use crate::rotor::RotorConstants;
use crate::special::{ln_gamma_unchecked, ln_laguerre_unchecked, QuadratureGrid, QuadratureKind};

/// Default number of radial grid points.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Highest bound vibrational level, `⌈λ̄_j − ½⌉ − 1`.
pub fn num_bound_states(constants: &RotorConstants) -> usize {
    n_max_for(constants.lambda_bar_j)
}

fn n_max_for(lambda_bar: f64) -> usize {
    let top = (lambda_bar - 0.5).ceil() - 1.0;
    if top < 0.0 {
        0
    } else {
        top as usize
    }
}

/// `E_{n,j}` in hartree, measured from the dissociation threshold.
pub fn eigen_energy(constants: &RotorConstants, n: usize) -> Result<f64> {
    let n_max = num_bound_states(constants);
    if n > n_max {
        return Err(Error::Index { n, n_max });
    }
    Ok(energy_unchecked(constants, n))
}

fn energy_unchecked(c: &RotorConstants, n: usize) -> f64 {
    let h = n as f64 + 0.5;
    let l = c.lambda_j;
    2.0 * (c.c1 / l) * h - (c.c2 / (l * l)) * h * h + c.c0 - c.c1 * c.c1 / c.c2
}

/// Uniform Simpson grid over `[max(r0/2, r_j − 12/β), r_j + 25/β]`.
pub fn default_grid(constants: &RotorConstants) -> QuadratureGrid {
    let p = &constants.params;
    let lo = (0.5 * p.r0).max(constants.r_j - 12.0 / p.beta);
    let hi = constants.r_j + 25.0 / p.beta;
    QuadratureGrid::uniform(lo, hi, DEFAULT_GRID_POINTS, QuadratureKind::Simpson)
        .expect("default grid bounds are ordered")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenState {
    pub n: usize,
    /// `λ̄_j − n − ½`, always positive.
    pub s: f64,
    /// hartree
    pub energy: f64,
    /// Closed-form normalization constant before numerical renormalization.
    pub norm_const: f64,
    /// Factor applied on top of `norm_const` so the quadrature norm is 1.
    pub scale: f64,
    ln_norm: f64,
}

impl EigenState {
    fn new(c: &RotorConstants, n: usize) -> Self {
        let lb = c.lambda_bar_j;
        let nf = n as f64;
        let s = lb - nf - 0.5;
        let ln_norm = 0.5
            * (c.params.beta.ln()
                + (2.0 * lb - 2.0 * nf - 1.0).ln()
                + ln_gamma_unchecked(nf + 1.0)
                - ln_gamma_unchecked(2.0 * lb - nf));
        Self {
            n,
            s,
            energy: energy_unchecked(c, n),
            norm_const: ln_norm.exp(),
            scale: 1.0,
            ln_norm,
        }
    }

    /// `(ψ, dψ/dr)` at `r` using the current normalization.
    fn eval(&self, c: &RotorConstants, r: f64) -> (f64, f64) {
        let beta = c.params.beta;
        let y = 2.0 * c.lambda_j * (-beta * (r - c.params.r0)).exp();
        let ln_y = y.ln();
        let a = 2.0 * self.s;
        let pref = self.ln_norm - 0.5 * y + self.s * ln_y;
        let l = ln_laguerre_unchecked(self.n, a, y);
        let psi = l.sign * (pref + l.ln_abs).exp();
        // d/dy L_n^a = −L_{n−1}^{a+1}
        let tail = if self.n == 0 {
            0.0
        } else {
            let l1 = ln_laguerre_unchecked(self.n - 1, a + 1.0, y);
            l1.sign * (pref + ln_y + l1.ln_abs).exp()
        };
        let dpsi = -beta * ((self.s - 0.5 * y) * psi - tail);
        (psi, dpsi)
    }
}

/// Per-state samples `(values[n][i], derivatives[n][i])` on a grid.
pub type SampledStates = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// All bound states for one `(molecule, j)`, sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    constants: RotorConstants,
    states: Vec<EigenState>,
    grid: QuadratureGrid,
    samples: Vec<Vec<f64>>,
    gradients: Vec<Vec<f64>>,
}

impl EigenBasis {
    pub fn new(constants: RotorConstants) -> Result<Self> {
        let grid = default_grid(&constants);
        Self::with_grid(constants, grid)
    }

    pub fn with_grid(constants: RotorConstants, grid: QuadratureGrid) -> Result<Self> {
        if grid.start() <= 0.0 {
            return Err(Error::Domain(format!(
                "radial grid must start above r = 0, got {}",
                grid.start()
            )));
        }
        let n_max = num_bound_states(&constants);
        let mut states = Vec::with_capacity(n_max + 1);
        let mut samples = Vec::with_capacity(n_max + 1);
        let mut gradients = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut st = EigenState::new(&constants, n);
            let (mut psi, mut dpsi): (Vec<f64>, Vec<f64>) = grid
                .points()
                .iter()
                .map(|&r| st.eval(&constants, r))
                .unzip();
            let norm2 = grid.integrate_by(|i| psi[i] * psi[i]);
            if !(norm2.is_finite() && norm2 > 0.0) {
                return Err(Error::Degenerate(format!(
                    "state n = {n} has norm {norm2} on the grid"
                )));
            }
            st.scale = norm2.sqrt().recip();
            st.ln_norm += st.scale.ln();
            psi.iter_mut().for_each(|v| *v *= st.scale);
            dpsi.iter_mut().for_each(|v| *v *= st.scale);
            states.push(st);
            samples.push(psi);
            gradients.push(dpsi);
        }
        Ok(Self {
            constants,
            states,
            grid,
            samples,
            gradients,
        })
    }

    pub fn constants(&self) -> &RotorConstants {
        &self.constants
    }

    pub fn states(&self) -> &[EigenState] {
        &self.states
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, n: usize) -> Result<&EigenState> {
        self.states.get(n).ok_or(Error::Index {
            n,
            n_max: self.n_max(),
        })
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// Normalized `ψ_n` on the basis grid.
    pub fn sample(&self, n: usize) -> Result<&[f64]> {
        self.state(n)?;
        Ok(&self.samples[n])
    }

    /// `dψ_n/dr` on the basis grid.
    pub fn gradient(&self, n: usize) -> Result<&[f64]> {
        self.state(n)?;
        Ok(&self.gradients[n])
    }

    /// Normalized `ψ_n(r)` at an arbitrary radius.
    pub fn wavefunction(&self, n: usize, r: f64) -> Result<f64> {
        Ok(self.eval(n, r)?.0)
    }

    /// `dψ_n/dr` at an arbitrary radius.
    pub fn derivative(&self, n: usize, r: f64) -> Result<f64> {
        Ok(self.eval(n, r)?.1)
    }

    fn eval(&self, n: usize, r: f64) -> Result<(f64, f64)> {
        let st = self.state(n)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("r must be positive, got {r}")));
        }
        Ok(st.eval(&self.constants, r))
    }

    /// Values and derivatives of every state on another grid.
    pub fn sample_on(&self, grid: &QuadratureGrid) -> Result<SampledStates> {
        if grid.start() <= 0.0 {
            return Err(Error::Domain("grid must start above r = 0".into()));
        }
        if grid.matches(&self.grid) {
            return Ok((self.samples.clone(), self.gradients.clone()));
        }
        Ok(self
            .states
            .iter()
            .map(|st| {
                grid.points()
                    .iter()
                    .map(|&r| st.eval(&self.constants, r))
                    .unzip()
            })
            .unzip())
    }
}

/// Free-function form of [`EigenBasis::wavefunction`].
pub fn eigen_wavefunction(basis: &EigenBasis, n: usize, r: f64) -> Result<f64> {
    basis.wavefunction(n, r)
}
