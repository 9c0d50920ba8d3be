//! Classical action, sub-Planck tile areas and their dependence on j.

use num_complex::Complex64;

use crate::coherent::{cs_weights, evolve, periods, TimeFraction, WavePacket};
use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::phase_space::{wigner_snapshot, WignerField, WignerResolution};
use crate::rotor::{EquilibriumBranch, MoleculeParams, RotorConstants};

/// Position and momentum spreads of a wave packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionMoments {
    /// bohr
    pub delta_x: f64,
    /// a.u. of momentum
    pub delta_p: f64,
    /// `Δx·Δp`
    pub action: f64,
}

/// `dΦ/dr` by fourth-order central differences, second order at the ends.
fn finite_difference(packet: &WavePacket) -> Vec<Complex64> {
    let a = &packet.amplitudes;
    let n = a.len();
    let h = packet.grid.step();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (a[i - 2] - a[i - 1] * 8.0 + a[i + 1] * 8.0 - a[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (a[1] - a[0]) / h
            } else if i + 1 == n {
                (a[n - 1] - a[n - 2]) / h
            } else {
                (a[i + 1] - a[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// `Δx` and `Δp` from quadrature moments; momentum moments use the packet's
/// stored derivative, or finite differences if it has none.
pub fn classical_action(packet: &WavePacket) -> ActionMoments {
    let g = &packet.grid;
    let fd;
    let grad = if packet.gradient.len() == packet.amplitudes.len() {
        &packet.gradient
    } else {
        fd = finite_difference(packet);
        &fd
    };
    let pts = g.points();
    let amps = &packet.amplitudes;
    let norm = g.integrate_by(|i| amps[i].norm_sqr());
    let x1 = g.integrate_by(|i| pts[i] * amps[i].norm_sqr()) / norm;
    let x2 = g.integrate_by(|i| pts[i] * pts[i] * amps[i].norm_sqr()) / norm;
    // ⟨p⟩ = ∫ Φ* (−i dΦ/dr) dr, whose real part is Im(Φ* dΦ/dr)
    let p1 = g.integrate_by(|i| (amps[i].conj() * grad[i]).im) / norm;
    let p2 = g.integrate_by(|i| grad[i].norm_sqr()) / norm;
    let delta_x = (x2 - x1 * x1).max(0.0).sqrt();
    let delta_p = (p2 - p1 * p1).max(0.0).sqrt();
    ActionMoments {
        delta_x,
        delta_p,
        action: delta_x * delta_p,
    }
}

/// Axis-aligned phase-space rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRect {
    pub r_min: f64,
    pub r_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl PhaseRect {
    pub fn contains(&self, r: f64, p: f64) -> bool {
        (self.r_min..=self.r_max).contains(&r) && (self.p_min..=self.p_max).contains(&p)
    }
}

/// One measured interference tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tile {
    pub r: f64,
    pub p: f64,
    /// W at the extremum.
    pub value: f64,
    /// Distance between zero crossings along `r` (bohr).
    pub width_r: f64,
    /// Distance between zero crossings along `p` (a.u.).
    pub width_p: f64,
}

impl Tile {
    pub fn area(&self) -> f64 {
        self.width_r * self.width_p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileMeasurement {
    /// Mean of the tile areas.
    pub area: f64,
    pub tiles: Vec<Tile>,
    /// Reference point the tiles were ranked against.
    pub center: (f64, f64),
}

pub const DEFAULT_TILE_COUNT: usize = 3;

/// Extrema weaker than this fraction of max |W| are ignored.
const EXTREMUM_FLOOR: f64 = 1e-3;

/// Distance between the zero crossings on either side of `i`, by linear
/// interpolation; `None` if a crossing falls off the line.
fn crossing_width(line: &[f64], i: usize, step: f64) -> Option<f64> {
    let sign = line[i].signum();
    let mut a = i;
    while a > 0 && line[a - 1].signum() == sign {
        a -= 1;
    }
    if a == 0 {
        return None;
    }
    let left = (a - 1) as f64 + line[a - 1] / (line[a - 1] - line[a]);
    let mut b = i;
    while b + 1 < line.len() && line[b + 1].signum() == sign {
        b += 1;
    }
    if b + 1 == line.len() {
        return None;
    }
    let right = b as f64 + line[b] / (line[b] - line[b + 1]);
    Some((right - left) * step)
}

/// Mean and standard deviation of a non-negative density on an axis.
fn axis_moments(axis: &[f64], density: &[f64]) -> (f64, f64) {
    let total: f64 = density.iter().sum();
    let mean = axis.iter().zip(density).map(|(x, d)| x * d).sum::<f64>() / total;
    let var = axis
        .iter()
        .zip(density)
        .map(|(x, d)| (x - mean) * (x - mean) * d)
        .sum::<f64>()
        / total;
    (mean, var.max(0.0).sqrt())
}

/// Mean area of the `k` interference tiles closest to the centre of the
/// interference zone.
///
/// Strict local extrema of W are ranked by their distance to the centroid,
/// each axis scaled by the marginal spread. A tile is measured by
/// axis-parallel cuts through its extremum; extrema whose cuts do not close
/// on both sides inside the field are passed over. Without extrema of both
/// signs there is no interference pattern and the result is a no-tile error.
pub fn tile_area(
    field: &WignerField,
    region: Option<PhaseRect>,
    k: usize,
) -> Result<TileMeasurement> {
    let (n_r, n_p) = field.shape();
    if n_r < 3 || n_p < 3 || k == 0 {
        return Err(Error::NoTile {
            found: 0,
            needed: k.max(1),
        });
    }
    let w = &field.values;
    let (rc, sr) = axis_moments(&field.r_axis, &field.position_marginal());
    let (pc, sp) = axis_moments(&field.p_axis, &field.momentum_marginal());
    let floor = EXTREMUM_FLOOR * w.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut extrema = Vec::new();
    for i in 1..n_r - 1 {
        for j in 1..n_p - 1 {
            let v = w[[i, j]];
            if v.abs() <= floor {
                continue;
            }
            let mut strict = true;
            'nb: for di in 0..3 {
                for dj in 0..3 {
                    if (di, dj) == (1, 1) {
                        continue;
                    }
                    let u = w[[i + di - 1, j + dj - 1]];
                    if (v > 0.0 && u >= v) || (v < 0.0 && u <= v) {
                        strict = false;
                        break 'nb;
                    }
                }
            }
            let (r, p) = (field.r_axis[i], field.p_axis[j]);
            if strict && region.is_none_or(|rect| rect.contains(r, p)) {
                let d2 = ((r - rc) / sr).powi(2) + ((p - pc) / sp).powi(2);
                extrema.push((d2, i, j));
            }
        }
    }
    extrema.sort_by(|a, b| a.0.total_cmp(&b.0));

    let dr = field.r_axis[1] - field.r_axis[0];
    let dp = field.p_axis[1] - field.p_axis[0];
    let mut tiles: Vec<Tile> = Vec::with_capacity(k);
    for &(_, i, j) in &extrema {
        if tiles.len() == k {
            break;
        }
        let v = w[[i, j]];
        let col: Vec<f64> = w.column(j).to_vec();
        let row: Vec<f64> = w.row(i).to_vec();
        if let (Some(width_r), Some(width_p)) =
            (crossing_width(&col, i, dr), crossing_width(&row, j, dp))
        {
            tiles.push(Tile {
                r: field.r_axis[i],
                p: field.p_axis[j],
                value: v,
                width_r,
                width_p,
            });
        }
    }
    let has_negative = extrema.iter().any(|&(_, i, j)| w[[i, j]] < 0.0);
    let has_positive = extrema.iter().any(|&(_, i, j)| w[[i, j]] > 0.0);
    if !(has_negative && has_positive) {
        return Err(Error::NoTile {
            found: 0,
            needed: k,
        });
    }
    if tiles.len() < k {
        return Err(Error::NoTile {
            found: tiles.len(),
            needed: k,
        });
    }
    let area = tiles.iter().map(Tile::area).sum::<f64>() / k as f64;
    Ok(TileMeasurement {
        area,
        tiles,
        center: (rc, pc),
    })
}

/// Sensitivity figures for one rotational level at one fractional revival.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRecord {
    pub j: u32,
    pub time_fraction: TimeFraction,
    pub delta_x: f64,
    pub delta_p: f64,
    pub action: f64,
    pub inv_action: f64,
    pub tile_area: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub branch: EquilibriumBranch,
    /// Levels at which a Wigner field is built and tiles are measured.
    pub tile_js: Vec<u32>,
    pub tile_count: usize,
    pub resolution: WignerResolution,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            branch: EquilibriumBranch::default(),
            tile_js: Vec::new(),
            tile_count: DEFAULT_TILE_COUNT,
            resolution: WignerResolution::default(),
            exec: Exec::default(),
        }
    }
}

/// Records in j order plus the levels that failed and why.
#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub records: Vec<SensitivityRecord>,
    pub failures: Vec<(u32, Error)>,
}

/// Computes a [`SensitivityRecord`] for a single j.
pub fn sensitivity_record(
    params: &MoleculeParams,
    j: u32,
    time_fraction: TimeFraction,
    alpha: Complex64,
    with_tile: bool,
    options: &ScanOptions,
) -> Result<SensitivityRecord> {
    let constants = RotorConstants::with_branch(params, j, options.branch)?;
    let basis = EigenBasis::new(constants)?;
    let spec = cs_weights(&basis, alpha)?;
    let t = time_fraction.time(periods(&constants)?.t_rev);
    let packet = evolve(&basis, &spec, t)?;
    let m = classical_action(&packet);
    let tile_area = if with_tile {
        // the outer scan is already parallel over j
        let field = wigner_snapshot(&basis, &spec, t, options.resolution, Exec::Sequential)?;
        Some(tile_area(&field, None, options.tile_count)?.area)
    } else {
        None
    };
    Ok(SensitivityRecord {
        j,
        time_fraction,
        delta_x: m.delta_x,
        delta_p: m.delta_p,
        action: m.action,
        inv_action: 1.0 / m.action,
        tile_area,
    })
}

/// Evaluates every j in `js` independently (in parallel under
/// [`ScanOptions::exec`]) and merges the results in the given order.
pub fn sensitivity_scan(
    params: &MoleculeParams,
    js: &[u32],
    time_fraction: TimeFraction,
    alpha: impl Into<Complex64>,
    options: &ScanOptions,
) -> ScanOutcome {
    let alpha = alpha.into();
    let results = options.exec.map_slice(js, |&j| {
        let with_tile = options.tile_js.contains(&j);
        sensitivity_record(params, j, time_fraction, alpha, with_tile, options)
    });
    let mut outcome = ScanOutcome::default();
    for (&j, r) in js.iter().zip(results) {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(e) => {
                log::warn!("j = {j} skipped: {e}");
                outcome.failures.push((j, e));
            }
        }
    }
    outcome
}

/// A discrete local minimum of a sequence indexed by j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub j: u32,
    pub value: f64,
    /// Vertex of the parabola through the minimum and its neighbours.
    pub refined_j: f64,
}

/// Interior local minima of `(j, value)` pairs sorted by j. A flat run of
/// equal values counts once, at its smallest j.
pub fn find_minima(points: &[(u32, f64)]) -> Vec<Minimum> {
    let mut out = Vec::new();
    let n = points.len();
    let mut i = 1;
    while i + 1 < n {
        let v = points[i].1;
        if v < points[i - 1].1 {
            let mut k = i;
            while k + 1 < n && points[k + 1].1 == v {
                k += 1;
            }
            if k + 1 < n && points[k + 1].1 > v {
                let (ja, jb, jc) = (
                    points[i - 1].0 as f64,
                    points[i].0 as f64,
                    points[k + 1].0 as f64,
                );
                let (a, c) = (points[i - 1].1, points[k + 1].1);
                let refined_j = if k == i {
                    let num = (jb - ja).powi(2) * (v - c) - (jb - jc).powi(2) * (v - a);
                    let den = (jb - ja) * (v - c) - (jb - jc) * (v - a);
                    if den != 0.0 {
                        jb - 0.5 * num / den
                    } else {
                        jb
                    }
                } else {
                    0.5 * (jb + points[k].0 as f64)
                };
                out.push(Minimum {
                    j: points[i].0,
                    value: v,
                    refined_j,
                });
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Minima of `inv_action` across scan records.
pub fn record_minima(records: &[SensitivityRecord]) -> Vec<Minimum> {
    let pts: Vec<(u32, f64)> = records.iter().map(|r| (r.j, r.inv_action)).collect();
    find_minima(&pts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Slope of ln(tile area) against ln(1/action).
    pub slope: f64,
    /// Least-squares factor of `tile_area = factor · (1/action)`.
    pub factor: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 4;
pub const MIN_FIT_SPAN: f64 = 1.5;

/// Fits tile area against inverse action from `(inv_action, tile_area)` pairs.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::FitDegenerate(format!(
            "{} points, need at least {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::FitDegenerate(
            "inputs must be positive and finite".into(),
        ));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if hi / lo < MIN_FIT_SPAN {
        return Err(Error::FitDegenerate(format!(
            "1/action spans only a factor {:.3}, need {MIN_FIT_SPAN}",
            hi / lo
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let factor = points.iter().map(|p| p.0 * p.1).sum::<f64>()
        / points.iter().map(|p| p.0 * p.0).sum::<f64>();
    Ok(ScalingFit {
        slope,
        factor,
        residual,
        points: points.len(),
    })
}

/// [`scaling_fit`] over the records that carry a tile area.
pub fn scaling_fit_records(records: &[SensitivityRecord]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.tile_area.map(|a| (r.inv_action, a)))
        .collect();
    scaling_fit(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{symmetric_axis, wigner};
    use crate::special::{QuadratureGrid, QuadratureKind};
    use std::f64::consts::PI;

    fn packet(amps: Vec<Complex64>, grid: QuadratureGrid) -> WavePacket {
        WavePacket {
            gradient: Vec::new(),
            amplitudes: amps,
            grid,
            time: 0.0,
            j: 0,
            alpha: Complex64::new(1.0, 0.0),
        }
    }

    fn two_gaussians(d: f64, sigma: f64) -> WavePacket {
        let grid = QuadratureGrid::uniform(-8.0, 8.0, 1601, QuadratureKind::Simpson).unwrap();
        let amps: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| {
                let g = |c: f64| (-(x - c) * (x - c) / (4.0 * sigma * sigma)).exp();
                Complex64::new(g(-d / 2.0) + g(d / 2.0), 0.0)
            })
            .collect();
        let mut p = packet(amps, grid);
        let n = p.norm().sqrt();
        p.amplitudes.iter_mut().for_each(|a| *a /= n);
        p
    }

    #[test]
    fn gaussian_is_minimum_uncertainty() {
        let grid = QuadratureGrid::uniform(-8.0, 8.0, 2001, QuadratureKind::Simpson).unwrap();
        let sigma = 0.8;
        let amps = grid
            .points()
            .iter()
            .map(|&x| Complex64::from_polar((-(x * x) / (4.0 * sigma * sigma)).exp(), 2.0 * x))
            .collect();
        let m = classical_action(&packet(amps, grid));
        assert!((m.delta_x - sigma).abs() < 1e-8);
        assert!((m.delta_p - 0.5 / sigma).abs() < 1e-6);
        assert!((m.action - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cat_spreads_action() {
        let single = two_gaussians(0.0, 0.5);
        let cat = two_gaussians(5.0, 0.5);
        assert!(classical_action(&cat).action > classical_action(&single).action);
    }

    #[test]
    fn two_gaussian_tile_oracle() {
        let (d, sigma) = (4.0, 0.5);
        let cat = two_gaussians(d, sigma);
        let p_axis = symmetric_axis(6.0, 601).unwrap();
        let field = wigner(&cat, &p_axis).unwrap();
        // the two fringes flanking the centre sit where cos(p d) = −1 exactly
        let m = tile_area(&field, None, 2).unwrap();
        // the central fringes go as cos(p d), so their zeros are π/d apart in p
        let width_p = PI / d;
        // along r through a fringe extremum the interference term and the
        // lobe tails cancel where cosh(r d / 2σ²) = e^{d²/8σ²}/|cos|
        let width_r =
            2.0 * (2.0 * sigma * sigma / d) * (d * d / (8.0 * sigma * sigma)).exp().acosh();
        for t in &m.tiles {
            assert!((t.width_p - width_p).abs() < 0.01 * width_p, "{t:?}");
            assert!((t.width_r - width_r).abs() < 0.01 * width_r, "{t:?}");
        }
        assert!((m.area - width_p * width_r).abs() < 0.02 * width_p * width_r);
    }

    #[test]
    fn single_gaussian_has_no_tiles() {
        let g = two_gaussians(0.0, 0.5);
        let field = wigner(&g, &symmetric_axis(6.0, 201).unwrap()).unwrap();
        assert!(matches!(
            tile_area(&field, None, 3),
            Err(Error::NoTile { .. })
        ));
    }

    #[test]
    fn minima_detection() {
        let mono: Vec<(u32, f64)> = (0..10).map(|j| (j, j as f64)).collect();
        assert!(find_minima(&mono).is_empty());

        let pts: Vec<(u32, f64)> = (0..40)
            .map(|j| (j, ((j as f64 - 10.3) / 3.0).cos()))
            .collect();
        let m = find_minima(&pts);
        assert_eq!(m.len(), 2);
        assert_eq!((m[0].j, m[1].j), (1, 20));
        assert!((m[0].refined_j - (10.3 - 3.0 * PI)).abs() < 0.1);
        assert!((m[1].refined_j - (10.3 + 3.0 * PI)).abs() < 0.1);

        let plateau = [(0, 3.0), (1, 1.0), (2, 1.0), (3, 1.0), (4, 2.0)];
        let m = find_minima(&plateau);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].j, 1);
        assert_eq!(m[0].refined_j, 2.0);
    }

    #[test]
    fn fit_recovers_exact_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.13, 0.2, 0.31, 0.45]
            .iter()
            .map(|&x| (x, 3.78 * x))
            .collect();
        let f = scaling_fit(&pts).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-10);
        assert!((f.factor - 3.78).abs() < 1e-10);
        assert!(f.residual < 1e-10);

        let narrow: Vec<(f64, f64)> = [0.1, 0.11, 0.12, 0.13].iter().map(|&x| (x, x)).collect();
        assert!(matches!(scaling_fit(&narrow), Err(Error::FitDegenerate(_))));
        assert!(matches!(
            scaling_fit(&pts[..3]),
            Err(Error::FitDegenerate(_))
        ));
    }

    #[test]
    fn scan_records_and_failures() {
        let p = MoleculeParams::i2();
        let tf = TimeFraction::new(1, 8).unwrap();
        let out = sensitivity_scan(&p, &[0, 45, 5000], tf, 1.6, &ScanOptions::default());
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, 5000);
        for r in &out.records {
            assert!(r.action >= 0.5);
            assert!((r.inv_action * r.action - 1.0).abs() < 1e-15);
        }
        let seq = sensitivity_scan(
            &p,
            &[0, 45],
            tf,
            1.6,
            &ScanOptions {
                exec: Exec::Sequential,
                ..Default::default()
            },
        );
        assert_eq!(seq.records, out.records);
    }
}
