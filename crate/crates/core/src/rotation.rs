//! Phase-space rotation of the non-rotating packet and the rotation angle
//! induced by rotational coupling.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::coherent::{
    cs_weights, evolve_on, fractional_revival_count, periods, CoherentStateSpec, TimeFraction,
    WavePacket,
};
use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::phase_space::WignerField;
use crate::rotor::{EquilibriumBranch, MoleculeParams, RotorConstants};
use crate::special::{QuadratureGrid, QuadratureKind};

/// Peak overlaps below this leave the angle poorly determined.
pub const RELIABLE_OVERLAP: f64 = 0.1;

/// Upper end of the reported angle range.
pub const ANGLE_RANGE: f64 = 3.0 * PI;

/// Result of an angle search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    pub j: u32,
    pub time_fraction: TimeFraction,
    /// Rotation angle in radians, within `[0, 3π]`.
    pub phi: f64,
    pub peak_overlap: f64,
    /// Rotation left over from the non-integer number of classical
    /// periods, in radians.
    pub extra_rotation: f64,
    pub reliable: bool,
}

/// Coefficients `d_n e^{i(n − λ̄ + ½)φ} e^{−iE_n t}` of the rotated packet.
fn rotated_coefficients(
    basis0: &EigenBasis,
    spec0: &CoherentStateSpec,
    phi: f64,
    t: f64,
    lambda_bar_ref: f64,
) -> Vec<Complex64> {
    spec0
        .weights
        .iter()
        .zip(basis0.states())
        .map(|(d, st)| {
            let m = st.n as f64 - lambda_bar_ref + 0.5;
            d * Complex64::from_polar(1.0, m * phi - st.energy * t)
        })
        .collect()
}

/// `χ = Σ d_n e^{i(n − λ̄ + ½)φ} ψ_n e^{−iE_n t}` on the basis grid.
///
/// `lambda_bar_ref` only sets a global phase.
pub fn apply_rotation(
    basis0: &EigenBasis,
    spec0: &CoherentStateSpec,
    phi: f64,
    t: f64,
    lambda_bar_ref: f64,
) -> Result<WavePacket> {
    apply_rotation_on(basis0, spec0, phi, t, lambda_bar_ref, basis0.grid())
}

pub fn apply_rotation_on(
    basis0: &EigenBasis,
    spec0: &CoherentStateSpec,
    phi: f64,
    t: f64,
    lambda_bar_ref: f64,
    grid: &QuadratureGrid,
) -> Result<WavePacket> {
    if spec0.weights.len() != basis0.states().len() {
        return Err(Error::GridMismatch(
            "weights do not belong to this basis".into(),
        ));
    }
    let coeffs = rotated_coefficients(basis0, spec0, phi, t, lambda_bar_ref);
    let (values, derivatives) = basis0.sample_on(grid)?;
    Ok(WavePacket::from_coefficients(
        grid.clone(),
        &coeffs,
        &values,
        &derivatives,
        t,
        basis0.constants().j,
        spec0.alpha,
    ))
}

/// Uniform grid spanning both grids at the finer of their two steps.
pub fn union_grid(a: &QuadratureGrid, b: &QuadratureGrid) -> Result<QuadratureGrid> {
    let lo = a.start().min(b.start());
    let hi = a.end().max(b.end());
    let h = a.step().min(b.step());
    let n = ((hi - lo) / h).ceil() as usize + 1;
    QuadratureGrid::uniform(lo, hi, n, QuadratureKind::Simpson)
}

/// `φ ↦ |⟨χ(φ)|Φ⟩|²` for a fixed target packet.
///
/// The target is projected once onto the rotated basis; since φ enters as
/// `e^{inφ}` per level, each evaluation is a short sum and the landscape is
/// exactly 2π-periodic.
#[derive(Debug, Clone)]
pub struct OverlapLandscape {
    coeffs: Vec<Complex64>,
}

impl OverlapLandscape {
    pub fn new(
        basis0: &EigenBasis,
        spec0: &CoherentStateSpec,
        t: f64,
        target: &WavePacket,
    ) -> Result<Self> {
        let g = &target.grid;
        let (values, _) = basis0.sample_on(g)?;
        let coeffs = rotated_coefficients(basis0, spec0, 0.0, t, 0.5)
            .iter()
            .zip(&values)
            .map(|(c, psi)| {
                let proj: Complex64 = g.integrate_by_complex(|i| target.amplitudes[i] * psi[i]);
                c.conj() * proj
            })
            .collect();
        Ok(Self { coeffs })
    }

    pub fn overlap(&self, phi: f64) -> f64 {
        let step = Complex64::from_polar(1.0, -phi);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.coeffs {
            acc += c * phase;
            phase *= step;
        }
        acc.norm_sqr()
    }
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal `f` on `[a, b]` until the bracket is below `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// How to pick among the 2π images of the maximizing angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BranchRule {
    /// Smallest angle in `[0, 3π]`.
    Smallest,
    /// Image closest to the given angle.
    Nearest(f64),
    /// Image closest to the dephasing estimate `(ω₀ − ω_j)·t`.
    #[default]
    LinearPhase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleOptions {
    pub coarse_points: usize,
    /// Refinement tolerance in radians.
    pub tolerance: f64,
    pub branch_rule: BranchRule,
    pub equilibrium: EquilibriumBranch,
    pub exec: Exec,
}

impl Default for AngleOptions {
    fn default() -> Self {
        Self {
            coarse_points: 600,
            tolerance: 1e-4 * PI,
            branch_rule: BranchRule::default(),
            equilibrium: EquilibriumBranch::default(),
            exec: Exec::default(),
        }
    }
}

/// Maximizer of a 2π-periodic landscape as `(φ mod 2π, value)`: a coarse
/// scan over `[0, 3π]` followed by golden-section refinement.
pub fn maximize_landscape(landscape: &OverlapLandscape, options: &AngleOptions) -> (f64, f64) {
    let n = options.coarse_points.max(3);
    let step = ANGLE_RANGE / (n - 1) as f64;
    let values = options.exec.map(n, |k| landscape.overlap(k as f64 * step));
    let best = (0..n)
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    let centre = best as f64 * step;
    let (phi, value) = golden_section_max(
        |x| landscape.overlap(x),
        centre - step,
        centre + step,
        options.tolerance,
    );
    (phi.rem_euclid(TAU), value)
}

/// Image of `phi_mod` in `[0, 3π]` selected by `rule`.
pub fn select_branch(phi_mod: f64, rule: BranchRule, linear_estimate: f64) -> f64 {
    let mut images = vec![phi_mod];
    if phi_mod + TAU <= ANGLE_RANGE {
        images.push(phi_mod + TAU);
    }
    let target = match rule {
        BranchRule::Smallest => return phi_mod,
        BranchRule::Nearest(x) => x,
        BranchRule::LinearPhase => linear_estimate,
    };
    images
        .into_iter()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(phi_mod)
}

/// Relative dephasing `(2π/T_cl,0 − 2π/T_cl,j)·t` of the two packets'
/// centroids over time `t`.
pub fn linear_phase_estimate(c0: &RotorConstants, cj: &RotorConstants, t: f64) -> Result<f64> {
    let w0 = TAU / periods(c0)?.t_cl;
    let wj = TAU / periods(cj)?.t_cl;
    Ok((w0 - wj) * t)
}

/// Rotation contributed by the non-integer number of classical periods
/// elapsed at `time_fraction · T_rev`.
///
/// The leftover angle `2π·frac(t/T_cl)` is reduced modulo the `2π/N`
/// symmetry of the N-packet fractional revival and folded to its smallest
/// magnitude; the magnitude is returned.
pub fn extra_rotation(constants: &RotorConstants, time_fraction: TimeFraction) -> Result<f64> {
    if time_fraction.numer() == 0 {
        return Ok(0.0);
    }
    let per = periods(constants)?;
    let cycles = time_fraction.time(per.t_rev) / per.t_cl;
    let parts = fractional_revival_count(time_fraction.numer(), time_fraction.denom())?;
    let sector = TAU / parts as f64;
    let angle = TAU * cycles.fract();
    Ok((angle - sector * (angle / sector).round()).abs())
}

/// Everything needed to compare rotated j = 0 packets with a j packet.
#[derive(Debug, Clone)]
pub struct AngleProblem {
    pub c0: RotorConstants,
    pub cj: RotorConstants,
    pub basis0: EigenBasis,
    pub spec0: CoherentStateSpec,
    pub target: WavePacket,
    pub time: f64,
    pub time_fraction: TimeFraction,
}

impl AngleProblem {
    pub fn new(
        params: &MoleculeParams,
        j: u32,
        time_fraction: TimeFraction,
        alpha: Complex64,
        equilibrium: EquilibriumBranch,
    ) -> Result<Self> {
        let c0 = RotorConstants::with_branch(params, 0, equilibrium)?;
        let cj = RotorConstants::with_branch(params, j, equilibrium)?;
        let basis0 = EigenBasis::new(c0)?;
        let basis_j = EigenBasis::new(cj)?;
        let spec0 = cs_weights(&basis0, alpha)?;
        let spec_j = cs_weights(&basis_j, alpha)?;
        let time = time_fraction.time(periods(&c0)?.t_rev);
        let grid = union_grid(basis0.grid(), basis_j.grid())?;
        let target = evolve_on(&basis_j, &spec_j, time, &grid)?;
        Ok(Self {
            c0,
            cj,
            basis0,
            spec0,
            target,
            time,
            time_fraction,
        })
    }

    pub fn landscape(&self) -> Result<OverlapLandscape> {
        OverlapLandscape::new(&self.basis0, &self.spec0, self.time, &self.target)
    }

    /// Position-space overlap `|⟨χ(φ)|Φ_j⟩|²` built from scratch.
    pub fn direct_overlap(&self, phi: f64, lambda_bar_ref: f64) -> Result<f64> {
        let chi = apply_rotation_on(
            &self.basis0,
            &self.spec0,
            phi,
            self.time,
            lambda_bar_ref,
            &self.target.grid,
        )?;
        Ok(chi.inner(&self.target)?.norm_sqr())
    }

    pub fn solve(&self, options: &AngleOptions) -> Result<AngleEstimate> {
        let landscape = self.landscape()?;
        let (phi_mod, peak) = maximize_landscape(&landscape, options);
        let linear = linear_phase_estimate(&self.c0, &self.cj, self.time)?;
        let phi = select_branch(phi_mod, options.branch_rule, linear);
        let reliable = peak >= RELIABLE_OVERLAP;
        if !reliable {
            log::warn!(
                "j = {}: peak overlap {peak:.3} is below {RELIABLE_OVERLAP}; angle is unreliable",
                self.cj.j
            );
        }
        Ok(AngleEstimate {
            j: self.cj.j,
            time_fraction: self.time_fraction,
            phi,
            peak_overlap: peak,
            extra_rotation: extra_rotation(&self.c0, self.time_fraction)?,
            reliable,
        })
    }
}

/// Angle maximizing the overlap between the rotated j = 0 packet and the
/// j packet at `time_fraction · T_rev`.
pub fn find_angle(
    params: &MoleculeParams,
    j: u32,
    time_fraction: TimeFraction,
    alpha: impl Into<Complex64>,
    options: &AngleOptions,
) -> Result<AngleEstimate> {
    if j == 0 {
        return Err(Error::Domain(
            "the angle search needs a target j >= 1".into(),
        ));
    }
    AngleProblem::new(params, j, time_fraction, alpha.into(), options.equilibrium)?.solve(options)
}

/// One row of the reference angle table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub j: u32,
    pub time_fraction: (u64, u64),
    /// Reference angle in units of π.
    pub phi_over_pi: f64,
}

/// Cat (T_rev/4) and compass (T_rev/8) reference angles.
pub const ANGLE_TABLE: [TableEntry; 9] = [
    TableEntry {
        j: 38,
        time_fraction: (1, 4),
        phi_over_pi: 0.16,
    },
    TableEntry {
        j: 82,
        time_fraction: (1, 4),
        phi_over_pi: 0.72,
    },
    TableEntry {
        j: 104,
        time_fraction: (1, 4),
        phi_over_pi: 1.16,
    },
    TableEntry {
        j: 126,
        time_fraction: (1, 4),
        phi_over_pi: 1.71,
    },
    TableEntry {
        j: 142,
        time_fraction: (1, 4),
        phi_over_pi: 2.16,
    },
    TableEntry {
        j: 160,
        time_fraction: (1, 4),
        phi_over_pi: 2.77,
    },
    TableEntry {
        j: 64,
        time_fraction: (1, 8),
        phi_over_pi: 0.22,
    },
    TableEntry {
        j: 116,
        time_fraction: (1, 8),
        phi_over_pi: 0.72,
    },
    TableEntry {
        j: 150,
        time_fraction: (1, 8),
        phi_over_pi: 1.21,
    },
];

/// Classical angle variable of the expanded Hamiltonian at `(r, p)`, in
/// `(−π, π]`. Zero marks the outer turning point; the angle advances with
/// the motion.
pub fn angle_variable(c: &RotorConstants, r: f64, p: f64) -> f64 {
    let beta = c.params.beta;
    let z = (-beta * (r - c.params.r0)).exp();
    let e = p * p / (2.0 * c.params.mu) + c.c2 * z * z - 2.0 * c.c1 * z;
    let g = (1.0 + c.c2 * e / (c.c1 * c.c1)).max(0.0).sqrt();
    let cos = if g > 0.0 {
        ((e.abs() / (c.c1 * z) - 1.0) / g).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    let sin = -p.signum() * (1.0 - cos * cos).sqrt();
    sin.atan2(cos)
}

/// Separable Gaussian blur with per-axis widths in grid steps; samples
/// outside the field count as zero.
fn gaussian_blur(field: &WignerField, sigma_r: f64, sigma_p: f64) -> ndarray::Array2<f64> {
    fn kernel(sigma: f64) -> Vec<f64> {
        let half = (4.0 * sigma).ceil().max(1.0) as isize;
        let mut k: Vec<f64> = (-half..=half)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let s: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= s);
        k
    }
    fn convolve(line: &[f64], k: &[f64]) -> Vec<f64> {
        let half = (k.len() / 2) as isize;
        let n = line.len() as isize;
        (0..n)
            .map(|i| {
                k.iter()
                    .enumerate()
                    .map(|(t, w)| {
                        let idx = i + t as isize - half;
                        if (0..n).contains(&idx) {
                            w * line[idx as usize]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }
    let (kr, kp) = (kernel(sigma_r), kernel(sigma_p));
    let mut out = field.values.clone();
    for mut row in out.rows_mut() {
        let v = convolve(&row.to_vec(), &kp);
        row.iter_mut().zip(v).for_each(|(a, b)| *a = b);
    }
    for mut col in out.columns_mut() {
        let v = convolve(&col.to_vec(), &kr);
        col.iter_mut().zip(v).for_each(|(a, b)| *a = b);
    }
    out
}

/// Fraction of the marginal spreads used as the lobe-smoothing width.
pub const LOBE_SMOOTHING: f64 = 0.25;

/// Angle variables of the `count` strongest lobes of a Wigner field.
///
/// The field is first smoothed with a Gaussian a quarter of the packet's
/// spread wide in each direction, which washes out the interference fringes
/// and leaves one maximum per sub-packet.
pub fn lobe_angles(field: &WignerField, constants: &RotorConstants, count: usize) -> Vec<f64> {
    let spread = |axis: &[f64], density: &[f64]| {
        let total: f64 = density.iter().sum();
        let mean = axis.iter().zip(density).map(|(x, d)| x * d).sum::<f64>() / total;
        (axis
            .iter()
            .zip(density)
            .map(|(x, d)| (x - mean).powi(2) * d)
            .sum::<f64>()
            / total)
            .sqrt()
    };
    let dr = field.r_axis[1] - field.r_axis[0];
    let dp = field.p_axis[1] - field.p_axis[0];
    let sr = spread(&field.r_axis, &field.position_marginal());
    let sp = spread(&field.p_axis, &field.momentum_marginal());
    let q = gaussian_blur(field, LOBE_SMOOTHING * sr / dr, LOBE_SMOOTHING * sp / dp);
    let (n_r, n_p) = q.dim();
    let mut maxima = Vec::new();
    for i in 1..n_r.saturating_sub(1) {
        for k in 1..n_p.saturating_sub(1) {
            let v = q[[i, k]];
            if v <= 0.0 {
                continue;
            }
            let is_max = (0..3).all(|a| (0..3).all(|b| q[[i + a - 1, k + b - 1]] <= v));
            if is_max {
                maxima.push((v, field.r_axis[i], field.p_axis[k]));
            }
        }
    }
    maxima.sort_by(|a, b| b.0.total_cmp(&a.0));
    maxima
        .iter()
        .take(count)
        .map(|&(_, r, p)| angle_variable(constants, r, p))
        .collect()
}

/// Orientation of a four-lobed pattern modulo π/2: the circular mean of the
/// lobe angles under the four-fold symmetry, in `(−π/4, π/4]`.
pub fn fourfold_orientation(angles: &[f64]) -> f64 {
    let s: Complex64 = angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, 4.0 * a))
        .sum();
    s.arg() / 4.0
}

/// `x` folded into `(−π/4, π/4]`.
pub fn fold_quarter(x: f64) -> f64 {
    let q = PI / 2.0;
    x - q * (x / q).round()
}
