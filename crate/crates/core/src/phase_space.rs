//! Wigner quasiprobability fields, marginals, purity and state overlaps.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::coherent::{evolve_on, CoherentStateSpec, WavePacket};
use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::special::{QuadratureGrid, QuadratureKind};

/// Amplitudes below this fraction of the peak are treated as zero when
/// truncating the `r′` sum.
const SUPPORT_CUTOFF: f64 = 1e-10;

/// Phase-space overlap constant for ħ = 1, fixed by pure-state self-overlap.
pub const OVERLAP_CONSTANT: f64 = 2.0 * PI;

/// `W(r, p)` sampled on a rectangular grid; rows follow `r`, columns `p`.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub r_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Array2<f64>,
    pub time: f64,
    pub j: u32,
}

/// Sampling choices for [`wigner_snapshot`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerResolution {
    pub n_r: usize,
    pub n_p: usize,
    /// Explicit `r` window; derived from the packet support when absent.
    pub window: Option<(f64, f64)>,
    /// Explicit momentum half-width; estimated from the energy when absent.
    pub p_max: Option<f64>,
}

impl Default for WignerResolution {
    fn default() -> Self {
        Self {
            n_r: 512,
            n_p: 512,
            window: None,
            p_max: None,
        }
    }
}

impl WignerField {
    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    fn axis_grid(axis: &[f64]) -> QuadratureGrid {
        QuadratureGrid::uniform(
            axis[0],
            axis[axis.len() - 1],
            axis.len(),
            QuadratureKind::Simpson,
        )
        .expect("field axes hold at least two ordered points")
    }

    pub fn r_grid(&self) -> QuadratureGrid {
        Self::axis_grid(&self.r_axis)
    }

    pub fn p_grid(&self) -> QuadratureGrid {
        Self::axis_grid(&self.p_axis)
    }

    /// `∬ f(W) dr dp`.
    fn integrate_map(&self, f: impl Fn(f64) -> f64) -> f64 {
        let (rg, pg) = (self.r_grid(), self.p_grid());
        let (rw, pw) = (rg.weights(), pg.weights());
        self.values
            .outer_iter()
            .zip(rw)
            .map(|(row, wr)| wr * row.iter().zip(pw).map(|(v, wp)| wp * f(*v)).sum::<f64>())
            .sum()
    }

    /// `∬ W dr dp`, 1 for a normalized state.
    pub fn normalization(&self) -> f64 {
        self.integrate_map(|w| w)
    }

    /// `2π ∬ W² dr dp`, 1 for a pure state.
    pub fn purity(&self) -> f64 {
        OVERLAP_CONSTANT * self.integrate_map(|w| w * w)
    }

    /// `∫ W dp` at each `r`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let pg = self.p_grid();
        self.values
            .outer_iter()
            .map(|row| pg.integrate_by(|k| row[k]))
            .collect()
    }

    /// `∫ W dr` at each `p`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let rg = self.r_grid();
        self.values
            .columns()
            .into_iter()
            .map(|col| rg.integrate_by(|i| col[i]))
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quasiprobability centroid `(⟨r⟩, ⟨p⟩)`.
    pub fn centroid(&self) -> (f64, f64) {
        let norm = self.normalization();
        let (rg, pg) = (self.r_grid(), self.p_grid());
        let (rw, pw) = (rg.weights(), pg.weights());
        let mut r_mean = 0.0;
        let mut p_mean = 0.0;
        for (i, row) in self.values.outer_iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let w = rw[i] * pw[k] * v;
                r_mean += w * self.r_axis[i];
                p_mean += w * self.p_axis[k];
            }
        }
        (r_mean / norm, p_mean / norm)
    }

    pub fn same_axes(&self, other: &WignerField) -> bool {
        let close = |a: &[f64], b: &[f64]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
        };
        close(&self.r_axis, &other.r_axis) && close(&self.p_axis, &other.p_axis)
    }
}

/// Symmetric uniform momentum axis `[−p_max, p_max]`.
pub fn symmetric_axis(p_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(p_max > 0.0 && p_max.is_finite()) || n < 2 {
        return Err(Error::Domain(format!(
            "momentum axis needs p_max > 0 and at least 2 points, got {p_max}, {n}"
        )));
    }
    Ok((0..n)
        .map(|k| -p_max + 2.0 * p_max * k as f64 / (n - 1) as f64)
        .collect())
}

/// Largest |p| the `r′` sampling represents without aliasing, `π/(2h)`.
pub fn momentum_limit(h: f64) -> f64 {
    PI / (2.0 * h)
}

fn check_resolution(h: f64, p_axis: &[f64]) -> Result<()> {
    if p_axis.len() < 2 {
        return Err(Error::Domain(
            "momentum axis needs at least 2 points".into(),
        ));
    }
    let p_max = p_axis.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let limit = momentum_limit(h);
    if p_max > limit {
        return Err(Error::Resolution { p_max, limit });
    }
    Ok(())
}

/// Index range `[lo, hi]` of samples above the support cutoff.
fn support(samples: &[Complex64]) -> Option<(usize, usize)> {
    let peak = samples.iter().fold(0.0f64, |m, a| m.max(a.norm()));
    let cut = SUPPORT_CUTOFF * peak;
    let lo = samples.iter().position(|a| a.norm() > cut)?;
    let hi = samples.iter().rposition(|a| a.norm() > cut)?;
    Some((lo, hi))
}

/// `(h/π)[a₀ + 2 Σ_k Re(a_k e^{−2ipkh})]` for every `p`.
fn fill_row(products: &[Complex64], h: f64, p_axis: &[f64], out: &mut [f64]) {
    for (slot, &p) in out.iter_mut().zip(p_axis) {
        let step = Complex64::from_polar(1.0, -2.0 * p * h);
        let mut phase = step;
        let mut acc = 0.0;
        for a in &products[1..] {
            acc += (a * phase).re;
            phase *= step;
        }
        *slot = h / PI * (products[0].re + 2.0 * acc);
    }
}

/// Wigner field with rows at every grid point of the packet.
pub fn wigner(packet: &WavePacket, p_axis: &[f64]) -> Result<WignerField> {
    wigner_strided(packet, 1, p_axis, Exec::default())
}

/// Wigner field with rows at every `stride`-th packet grid point; the `r′`
/// quadrature always uses the full packet resolution.
pub fn wigner_strided(
    packet: &WavePacket,
    stride: usize,
    p_axis: &[f64],
    exec: Exec,
) -> Result<WignerField> {
    if stride == 0 {
        return Err(Error::Domain("row stride must be positive".into()));
    }
    let h = packet.grid.step();
    check_resolution(h, p_axis)?;
    let amps = &packet.amplitudes;
    let rows: Vec<usize> = (0..amps.len()).step_by(stride).collect();
    let r_axis: Vec<f64> = rows.iter().map(|&i| packet.grid.points()[i]).collect();
    let n_p = p_axis.len();
    let mut data = vec![0.0; rows.len() * n_p];
    if let Some((lo, hi)) = support(amps) {
        exec.for_each_row(&mut data, n_p, |row, out| {
            let i = rows[row];
            if i < lo || i > hi {
                return;
            }
            let kmax = (i - lo).min(hi - i);
            let products: Vec<Complex64> = (0..=kmax)
                .map(|k| amps[i - k].conj() * amps[i + k])
                .collect();
            fill_row(&products, h, p_axis, out);
        });
    }
    Ok(WignerField {
        r_axis,
        values: Array2::from_shape_vec((rows.len(), n_p), data).expect("buffer matches shape"),
        p_axis: p_axis.to_vec(),
        time: packet.time,
        j: packet.j,
    })
}

/// Catmull-Rom interpolation of uniformly sampled complex data.
fn interpolate(grid: &QuadratureGrid, values: &[Complex64], r: f64) -> Complex64 {
    let n = values.len();
    let u = (r - grid.start()) / grid.step();
    if u < 0.0 || u > (n - 1) as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let i = (u.floor() as usize).min(n - 2);
    let t = u - i as f64;
    let at = |k: isize| values[k.clamp(0, n as isize - 1) as usize];
    let ii = i as isize;
    let (p0, p1, p2, p3) = (at(ii - 1), at(ii), at(ii + 1), at(ii + 2));
    let t2 = t * t;
    let t3 = t2 * t;
    (p1 * 2.0
        + (p2 - p0) * t
        + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
        + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
        * 0.5
}

/// Wigner field at arbitrary `r` rows; off-grid amplitudes are obtained by
/// cubic interpolation, the `r′` step is the packet grid step.
pub fn wigner_on(
    packet: &WavePacket,
    r_axis: &[f64],
    p_axis: &[f64],
    exec: Exec,
) -> Result<WignerField> {
    let grid = &packet.grid;
    let h = grid.step();
    check_resolution(h, p_axis)?;
    let amps = &packet.amplitudes;
    let Some((lo, hi)) = support(amps) else {
        return Err(Error::Degenerate("packet amplitude vanishes".into()));
    };
    let (r_lo, r_hi) = (grid.points()[lo], grid.points()[hi]);
    let n_p = p_axis.len();
    let mut data = vec![0.0; r_axis.len() * n_p];
    exec.for_each_row(&mut data, n_p, |row, out| {
        let r = r_axis[row];
        if r < r_lo || r > r_hi {
            return;
        }
        let kmax = ((r - r_lo).min(r_hi - r) / h).floor() as usize;
        let u = (r - grid.start()) / h;
        let on_grid = (u - u.round()).abs() < 1e-9;
        let products: Vec<Complex64> = (0..=kmax)
            .map(|k| {
                if on_grid {
                    let i = u.round() as usize;
                    amps[i - k].conj() * amps[i + k]
                } else {
                    let d = k as f64 * h;
                    interpolate(grid, amps, r - d).conj() * interpolate(grid, amps, r + d)
                }
            })
            .collect();
        fill_row(&products, h, p_axis, out);
    });
    Ok(WignerField {
        r_axis: r_axis.to_vec(),
        values: Array2::from_shape_vec((r_axis.len(), n_p), data).expect("buffer matches shape"),
        p_axis: p_axis.to_vec(),
        time: packet.time,
        j: packet.j,
    })
}

/// `r` interval holding the packet density above `1e-10` of its peak,
/// padded by 0.1 bohr on both sides.
pub fn support_window(packet: &WavePacket) -> Option<(f64, f64)> {
    let rho = packet.density();
    let top = rho.iter().copied().fold(0.0, f64::max);
    let lo = rho.iter().position(|&v| v > 1e-10 * top)?;
    let hi = rho.iter().rposition(|&v| v > 1e-10 * top)?;
    let pts = packet.grid.points();
    Some((
        (pts[lo] - 0.1).max(packet.grid.start()),
        (pts[hi] + 0.1).min(packet.grid.end()),
    ))
}

/// Momentum half-width `2√(2μ(Ē − E_floor))`, twice the classical momentum
/// at the mean energy, clipped below the aliasing limit.
pub fn default_p_max(basis: &EigenBasis, spec: &CoherentStateSpec, h: f64) -> f64 {
    let c = basis.constants();
    let kinetic = (spec.mean_energy(basis) - c.well_floor()).max(1e-12);
    let estimate = 2.0 * (2.0 * c.params.mu * kinetic).sqrt();
    estimate.min(0.98 * momentum_limit(h))
}

/// Evolves the coherent state to time `t` and builds its Wigner field on
/// the default window and axes.
pub fn wigner_snapshot(
    basis: &EigenBasis,
    spec: &CoherentStateSpec,
    t: f64,
    resolution: WignerResolution,
    exec: Exec,
) -> Result<WignerField> {
    if resolution.n_r < 2 || resolution.n_p < 2 {
        return Err(Error::Domain(
            "Wigner grid needs at least 2 x 2 points".into(),
        ));
    }
    let (a, b) = match resolution.window {
        Some(w) => w,
        None => {
            let coarse = evolve_on(basis, spec, t, basis.grid())?;
            support_window(&coarse).ok_or_else(|| Error::Degenerate("empty packet".into()))?
        }
    };
    let fine =
        QuadratureGrid::uniform(a, b, 2 * (resolution.n_r - 1) + 1, QuadratureKind::Simpson)?;
    let packet = evolve_on(basis, spec, t, &fine)?;
    let p_max = resolution
        .p_max
        .unwrap_or_else(|| default_p_max(basis, spec, fine.step()));
    let p_axis = symmetric_axis(p_max, resolution.n_p)?;
    wigner_strided(&packet, 2, &p_axis, exec)
}

/// `|Φ̃(p)|²` with `Φ̃(p) = (2π)^{−½} ∫ Φ(r) e^{−ipr} dr`, by direct quadrature.
pub fn momentum_density(packet: &WavePacket, p_axis: &[f64]) -> Vec<f64> {
    let g = &packet.grid;
    let pts = g.points();
    p_axis
        .iter()
        .map(|&p| {
            let amp: Complex64 = g
                .weights()
                .iter()
                .zip(pts)
                .zip(&packet.amplitudes)
                .map(|((w, r), a)| a * Complex64::from_polar(*w, -p * r))
                .sum();
            amp.norm_sqr() / (2.0 * PI)
        })
        .collect()
}

/// `|⟨a|b⟩|²` by position quadrature on the common grid.
pub fn overlap_position(a: &WavePacket, b: &WavePacket) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `2π ∬ W_a W_b dr dp`.
pub fn overlap_wigner(a: &WignerField, b: &WignerField) -> Result<f64> {
    if !a.same_axes(b) {
        return Err(Error::GridMismatch(
            "Wigner fields have different axes".into(),
        ));
    }
    let (rg, pg) = (a.r_grid(), b.p_grid());
    let (rw, pw) = (rg.weights(), pg.weights());
    let mut acc = 0.0;
    for (i, (ra, rb)) in a.values.outer_iter().zip(b.values.outer_iter()).enumerate() {
        let row: f64 = ra
            .iter()
            .zip(rb.iter())
            .zip(pw)
            .map(|((x, y), w)| x * y * w)
            .sum();
        acc += rw[i] * row;
    }
    Ok(OVERLAP_CONSTANT * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{cs_weights, periods};
    use crate::rotor::{MoleculeParams, RotorConstants};

    fn gaussian(x0: f64, p0: f64, sigma: f64) -> WavePacket {
        let grid = QuadratureGrid::uniform(-6.0, 6.0, 1201, QuadratureKind::Simpson).unwrap();
        let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
        let amps: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| {
                let e = -(x - x0) * (x - x0) / (4.0 * sigma * sigma);
                Complex64::from_polar(norm * e.exp(), p0 * x)
            })
            .collect();
        WavePacket {
            gradient: vec![Complex64::new(0.0, 0.0); amps.len()],
            amplitudes: amps,
            grid,
            time: 0.0,
            j: 0,
            alpha: Complex64::new(1.0, 0.0),
        }
    }

    fn cat(d: f64, sigma: f64) -> WavePacket {
        let mut a = gaussian(-d / 2.0, 0.0, sigma);
        let b = gaussian(d / 2.0, 0.0, sigma);
        for (x, y) in a.amplitudes.iter_mut().zip(&b.amplitudes) {
            *x += y;
        }
        let n = a.norm().sqrt();
        a.amplitudes.iter_mut().for_each(|x| *x /= n);
        a
    }

    #[test]
    fn gaussian_wigner_is_positive_with_exact_marginals() {
        let g = gaussian(0.3, 1.5, 0.7);
        let p = symmetric_axis(12.0, 401).unwrap();
        let w = wigner(&g, &p).unwrap();
        assert!(w.min() > -1e-6);
        assert!(w.max() <= 1.0 / PI + 1e-6);
        assert!((w.normalization() - 1.0).abs() < 1e-6);
        assert!((w.purity() - 1.0).abs() < 1e-4);
        let rm = w.position_marginal();
        for (m, rho) in rm.iter().zip(g.density()) {
            assert!((m - rho).abs() < 1e-5);
        }
        let pm = w.momentum_marginal();
        let pd = momentum_density(&g, &p);
        for (a, b) in pm.iter().zip(&pd) {
            assert!((a - b).abs() < 1e-5);
        }
        let (rc, pc) = w.centroid();
        assert!((rc - 0.3).abs() < 1e-6 && (pc - 1.5).abs() < 1e-6);
    }

    #[test]
    fn gaussian_closed_form() {
        let sigma = 0.5;
        let g = gaussian(0.0, 0.0, sigma);
        let p = symmetric_axis(6.0, 121).unwrap();
        let w = wigner(&g, &p).unwrap();
        for (i, &r) in w.r_axis.iter().enumerate().step_by(37) {
            for (k, &pp) in p.iter().enumerate().step_by(13) {
                let exact =
                    (-r * r / (2.0 * sigma * sigma) - 2.0 * sigma * sigma * pp * pp).exp() / PI;
                assert!((w.values[[i, k]] - exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn resolution_guard() {
        let g = gaussian(0.0, 0.0, 0.5);
        let limit = momentum_limit(g.grid.step());
        let p = symmetric_axis(1.01 * limit, 11).unwrap();
        assert!(matches!(wigner(&g, &p), Err(Error::Resolution { .. })));
    }

    #[test]
    fn cat_is_negative_and_overlaps_agree() {
        let c = cat(4.0, 0.5);
        let p = symmetric_axis(8.0, 301).unwrap();
        let w = wigner(&c, &p).unwrap();
        assert!(w.min() < -0.01 * w.max());
        assert!((overlap_wigner(&w, &w).unwrap() - 1.0).abs() < 1e-4);

        let left = gaussian(-2.0, 0.0, 0.5);
        let right = gaussian(2.0, 0.0, 0.5);
        let (wl, wr) = (wigner(&left, &p).unwrap(), wigner(&right, &p).unwrap());
        assert!(overlap_wigner(&wl, &wr).unwrap().abs() < 1e-4);
        let direct = overlap_position(&left, &c).unwrap();
        assert!((overlap_wigner(&wl, &w).unwrap() - direct).abs() < 1e-3);
        assert!((direct - 0.5).abs() < 1e-3);
    }

    #[test]
    fn interpolated_rows_match_grid_rows() {
        let g = gaussian(0.2, -1.0, 0.6);
        let p = symmetric_axis(10.0, 81).unwrap();
        let on: Vec<f64> = vec![g.grid.points()[600], g.grid.points()[650]];
        let w1 = wigner_on(&g, &on, &p, Exec::Sequential).unwrap();
        let full = wigner(&g, &p).unwrap();
        assert_eq!(w1.values.row(0), full.values.row(600));
        let off = vec![0.2 + 0.5 * g.grid.step()];
        let w2 = wigner_on(&g, &off, &p, Exec::Sequential).unwrap();
        let sigma: f64 = 0.6;
        for (k, &pp) in p.iter().enumerate() {
            let r: f64 = 0.0 + 0.5 * g.grid.step();
            let exact = (-r * r / (2.0 * sigma * sigma) - 2.0 * sigma * sigma * (pp + 1.0).powi(2))
                .exp()
                / PI;
            assert!((w2.values[[0, k]] - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn axis_mismatch_is_an_error() {
        let g = gaussian(0.0, 0.0, 0.5);
        let a = wigner(&g, &symmetric_axis(5.0, 11).unwrap()).unwrap();
        let b = wigner(&g, &symmetric_axis(6.0, 11).unwrap()).unwrap();
        assert!(matches!(
            overlap_wigner(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn molecular_cat_snapshot() {
        let basis =
            EigenBasis::new(RotorConstants::new(&MoleculeParams::i2(), 0).unwrap()).unwrap();
        let spec = cs_weights(&basis, 1.6).unwrap();
        let t = 0.25 * periods(basis.constants()).unwrap().t_rev;
        let res = WignerResolution {
            n_r: 192,
            n_p: 192,
            ..Default::default()
        };
        let w = wigner_snapshot(&basis, &spec, t, res, Exec::default()).unwrap();
        // a coarse grid still integrates the oscillatory cat to a few 1e-4
        assert!((w.normalization() - 1.0).abs() < 1e-3);
        assert!((w.purity() - 1.0).abs() < 3e-2);
        assert!(w.min() < -0.01 * w.max());
        let seq = wigner_snapshot(&basis, &spec, t, res, Exec::Sequential).unwrap();
        assert_eq!(w.values, seq.values);
    }
}
