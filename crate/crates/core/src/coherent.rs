//! SU(2) coherent states, spectral time evolution and revival time scales.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;

use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::rotor::RotorConstants;
use crate::special::{ln_gamma_unchecked, QuadratureGrid};

/// A rational fraction `p/q` of the revival time, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeFraction {
    p: u64,
    q: u64,
}

impl TimeFraction {
    /// Builds `p/q`, reducing it to lowest terms.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("time fraction denominator is zero".into()));
        }
        let g = p.gcd(&q);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn numer(self) -> u64 {
        self.p
    }

    pub fn denom(self) -> u64 {
        self.q
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Absolute time for the given revival period.
    pub fn time(self, t_rev: f64) -> f64 {
        self.value() * t_rev
    }
}

impl FromStr for TimeFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad time fraction '{s}', expected p/q")))
        };
        match s.split_once('/') {
            Some((p, q)) => Self::new(parse(p)?, parse(q)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

impl fmt::Display for TimeFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Number of sub-packets at the fractional revival `p̄/q̄ · T_rev`.
pub fn fractional_revival_count(p_bar: u64, q_bar: u64) -> Result<usize> {
    if p_bar == 0 || q_bar == 0 {
        return Err(Error::Domain(format!(
            "{p_bar}/{q_bar} must have positive terms"
        )));
    }
    if p_bar.gcd(&q_bar) != 1 {
        return Err(Error::NotCoprime { p: p_bar, q: q_bar });
    }
    Ok(if q_bar.is_multiple_of(2) {
        q_bar / 2
    } else {
        q_bar
    } as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periods {
    /// Classical vibrational period (a.u. of time).
    pub t_cl: f64,
    /// Quantum revival period (a.u. of time).
    pub t_rev: f64,
}

/// `T_cl = 2πλ_j/(2c1 − c2/λ_j)` and `T_rev = 2πλ_j²/c2`.
pub fn periods(constants: &RotorConstants) -> Result<Periods> {
    let l = constants.lambda_j;
    let denom = 2.0 * constants.c1 - constants.c2 / l;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Degenerate(format!(
            "classical frequency denominator {denom:e} is not positive"
        )));
    }
    let two_pi = std::f64::consts::TAU;
    Ok(Periods {
        t_cl: two_pi * l / denom,
        t_rev: two_pi * l * l / constants.c2,
    })
}

/// Expansion weights of an SU(2) coherent state in an eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentStateSpec {
    pub alpha: Complex64,
    pub j: u32,
    /// Highest bound level of the basis; the coherent state is built on it.
    pub n_prime: usize,
    /// `d_n` for `n = 0..=n_prime`, normalized.
    pub weights: Vec<Complex64>,
}

impl CoherentStateSpec {
    pub fn populations(&self) -> Vec<f64> {
        self.weights.iter().map(|d| d.norm_sqr()).collect()
    }

    /// Level with the largest population.
    pub fn dominant_level(&self) -> usize {
        let pops = self.populations();
        (0..pops.len())
            .max_by(|&a, &b| pops[a].total_cmp(&pops[b]))
            .unwrap_or(0)
    }

    /// `Σ|d_n|² E_n`, conserved by the spectral evolution.
    pub fn mean_energy(&self, basis: &EigenBasis) -> f64 {
        self.weights
            .iter()
            .zip(basis.states())
            .map(|(d, s)| d.norm_sqr() * s.energy)
            .sum()
    }

    /// `|⟨Φ(0)|Φ(t)⟩|²`, evaluated in the eigenbasis.
    pub fn autocorrelation(&self, basis: &EigenBasis, t: f64) -> f64 {
        self.weights
            .iter()
            .zip(basis.states())
            .map(|(d, s)| d.norm_sqr() * Complex64::from_polar(1.0, -s.energy * t))
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Normalized weights for the coherent state built on level `n_prime`
/// with group parameter `2λ̄`.
pub fn su2_weights(lambda_bar: f64, n_prime: usize, alpha: Complex64) -> Vec<Complex64> {
    let ln_abs = alpha.norm().ln();
    let minus_alpha_arg = (-alpha).arg();
    let two_lb = 2.0 * lambda_bar;
    let npf = n_prime as f64;
    let logs: Vec<f64> = (0..=n_prime)
        .map(|n| {
            let nf = n as f64;
            let k = npf - nf;
            k * ln_abs - ln_gamma_unchecked(k + 1.0)
                + 0.5
                    * (ln_gamma_unchecked(npf + 1.0) + ln_gamma_unchecked(two_lb - nf)
                        - ln_gamma_unchecked(nf + 1.0)
                        - ln_gamma_unchecked(two_lb - npf))
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<Complex64> = logs
        .iter()
        .enumerate()
        .map(|(n, &l)| {
            Complex64::from_polar((l - top).exp(), (n_prime - n) as f64 * minus_alpha_arg)
        })
        .collect();
    let norm = w.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
    w.iter_mut().for_each(|d| *d /= norm);
    w
}

/// Coherent-state weights `d_n` for parameter `alpha` on the given basis.
pub fn cs_weights(basis: &EigenBasis, alpha: impl Into<Complex64>) -> Result<CoherentStateSpec> {
    let alpha = alpha.into();
    if !(alpha.norm() > 0.0 && alpha.norm().is_finite()) {
        return Err(Error::Domain(format!(
            "coherent-state parameter must be nonzero, got {alpha}"
        )));
    }
    let c = basis.constants();
    let n_prime = basis.n_max();
    Ok(CoherentStateSpec {
        alpha,
        j: c.j,
        n_prime,
        weights: su2_weights(c.lambda_bar_j, n_prime, alpha),
    })
}

/// A coherent-state wave packet sampled on a radial grid at one instant.
#[derive(Debug, Clone)]
pub struct WavePacket {
    pub grid: QuadratureGrid,
    pub amplitudes: Vec<Complex64>,
    /// `dΦ/dr` on the same grid, from the analytic eigenfunction derivatives.
    pub gradient: Vec<Complex64>,
    /// a.u. of time
    pub time: f64,
    pub j: u32,
    pub alpha: Complex64,
}

impl WavePacket {
    /// Assembles `Σ_n c_n ψ_n` from per-level coefficients and sampled
    /// eigenfunctions.
    pub fn from_coefficients(
        grid: QuadratureGrid,
        coeffs: &[Complex64],
        values: &[Vec<f64>],
        derivatives: &[Vec<f64>],
        time: f64,
        j: u32,
        alpha: Complex64,
    ) -> Self {
        let m = grid.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); m];
        let mut gradient = vec![Complex64::new(0.0, 0.0); m];
        for ((c, psi), dpsi) in coeffs.iter().zip(values).zip(derivatives) {
            for i in 0..m {
                amplitudes[i] += c * psi[i];
                gradient[i] += c * dpsi[i];
            }
        }
        Self {
            grid,
            amplitudes,
            gradient,
            time,
            j,
            alpha,
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate_by(|i| self.amplitudes[i].norm_sqr())
    }

    /// `⟨self|other⟩` by quadrature on the shared grid.
    pub fn inner(&self, other: &WavePacket) -> Result<Complex64> {
        if !self.grid.matches(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "[{}, {}] x {} vs [{}, {}] x {}",
                self.grid.start(),
                self.grid.end(),
                self.grid.len(),
                other.grid.start(),
                other.grid.end(),
                other.grid.len()
            )));
        }
        let w = self.grid.weights();
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .zip(w)
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum())
    }
}

/// `Φ(r, t) = Σ d_n ψ_n(r) e^{−iE_n t}` on the basis grid.
pub fn evolve(basis: &EigenBasis, spec: &CoherentStateSpec, t: f64) -> Result<WavePacket> {
    evolve_on(basis, spec, t, basis.grid())
}

/// Like [`evolve`], sampling the eigenfunctions on a different grid.
pub fn evolve_on(
    basis: &EigenBasis,
    spec: &CoherentStateSpec,
    t: f64,
    grid: &QuadratureGrid,
) -> Result<WavePacket> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if spec.weights.len() != basis.states().len() {
        return Err(Error::GridMismatch(format!(
            "{} weights for a basis of {} states",
            spec.weights.len(),
            basis.states().len()
        )));
    }
    let coeffs: Vec<Complex64> = spec
        .weights
        .iter()
        .zip(basis.states())
        .map(|(d, s)| d * Complex64::from_polar(1.0, -s.energy * t))
        .collect();
    let (values, derivatives) = basis.sample_on(grid)?;
    Ok(WavePacket::from_coefficients(
        grid.clone(),
        &coeffs,
        &values,
        &derivatives,
        t,
        spec.j,
        spec.alpha,
    ))
}

/// A local maximum of the probability density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// bohr
    pub position: f64,
    pub height: f64,
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

/// Local maxima of `|Φ|²` above 5% of the global maximum.
pub fn detect_peaks(packet: &WavePacket) -> Vec<Peak> {
    detect_peaks_with(packet, DEFAULT_PEAK_THRESHOLD)
}

/// Local maxima of `|Φ|²` above `threshold` times the global maximum, with
/// positions refined by a parabola through the three bracketing samples.
pub fn detect_peaks_with(packet: &WavePacket, threshold: f64) -> Vec<Peak> {
    let rho = packet.density();
    let top = rho.iter().copied().fold(0.0, f64::max);
    if rho.len() < 3 || top <= 0.0 {
        return Vec::new();
    }
    let h = packet.grid.step();
    let pts = packet.grid.points();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < rho.len() {
        if rho[i] > rho[i - 1] {
            // walk across a flat top so a plateau yields a single peak
            let mut k = i;
            while k + 1 < rho.len() && rho[k + 1] == rho[i] {
                k += 1;
            }
            if k + 1 < rho.len() && rho[k + 1] < rho[i] && rho[i] >= threshold * top {
                let (a, b, c) = (rho[i - 1], rho[i], rho[k + 1]);
                let curv = a - 2.0 * b + c;
                let (offset, height) = if k == i && curv < 0.0 {
                    let d = 0.5 * (a - c) / curv;
                    (d, b - 0.25 * (a - c) * d)
                } else {
                    (0.5 * (k - i) as f64, b)
                };
                peaks.push(Peak {
                    position: pts[i] + offset * h,
                    height,
                });
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::MoleculeParams;
    use approx::assert_relative_eq;

    fn setup(j: u32) -> (EigenBasis, CoherentStateSpec) {
        let b = EigenBasis::new(RotorConstants::new(&MoleculeParams::i2(), j).unwrap()).unwrap();
        let s = cs_weights(&b, 1.6).unwrap();
        (b, s)
    }

    #[test]
    fn time_fraction_parsing() {
        let t: TimeFraction = "1/8".parse().unwrap();
        assert_eq!((t.numer(), t.denom()), (1, 8));
        let t: TimeFraction = "2/8".parse().unwrap();
        assert_eq!(t.to_string(), "1/4");
        assert_eq!("1".parse::<TimeFraction>().unwrap().value(), 1.0);
        assert!("1/0".parse::<TimeFraction>().is_err());
        assert!("a/b".parse::<TimeFraction>().is_err());
    }

    #[test]
    fn revival_counts() {
        assert_eq!(fractional_revival_count(1, 4).unwrap(), 2);
        assert_eq!(fractional_revival_count(1, 8).unwrap(), 4);
        assert_eq!(fractional_revival_count(1, 3).unwrap(), 3);
        assert_eq!(
            fractional_revival_count(2, 4),
            Err(Error::NotCoprime { p: 2, q: 4 })
        );
    }

    #[test]
    fn periods_values() {
        let p = MoleculeParams::i2();
        let c0 = RotorConstants::new(&p, 0).unwrap();
        let per = periods(&c0).unwrap();
        let l0 = p.lambda0();
        assert_relative_eq!(
            per.t_rev,
            std::f64::consts::TAU * l0 * l0 / p.d,
            max_relative = 1e-14
        );

        let c45 = RotorConstants::new(&p, 45).unwrap();
        let per = periods(&c45).unwrap();
        assert_relative_eq!(per.t_cl, 11_291.821_755_531_753, max_relative = 1e-10);
        assert_relative_eq!(per.t_rev, 1_574_609.834_989_010_1, max_relative = 1e-10);

        let mut bad = c45;
        bad.c1 = 0.0;
        assert!(matches!(periods(&bad), Err(Error::Degenerate(_))));
    }

    #[test]
    fn weights_structure() {
        let (b, s) = setup(45);
        let pops = s.populations();
        assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s.dominant_level() as i64 - 10).abs() <= 1);
        for (n, d) in s.weights.iter().enumerate() {
            assert!(d.im.abs() <= 1e-12 * d.norm().max(1e-300));
            if d.norm() > 1e-200 {
                let expect = if (s.n_prime - n) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(d.re.signum(), expect, "n={n}");
            }
        }
        assert_eq!(s.n_prime, b.n_max());
        assert!(cs_weights(&b, 0.0).is_err());
    }

    // exp(M) by scaling and squaring with a Taylor kernel.
    fn expm(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = m.len();
        let mul = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            let mut c = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        c[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            c
        };
        let squarings = 10;
        let scale = 2f64.powi(-squarings);
        let a: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|v| v * scale).collect())
            .collect();
        let mut result: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        let mut term = result.clone();
        for k in 1..30 {
            term = mul(&term, &a);
            term.iter_mut().flatten().for_each(|v| *v /= k as f64);
            for i in 0..n {
                for j in 0..n {
                    result[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            result = mul(&result, &result);
        }
        result
    }

    #[test]
    fn closed_form_matches_displacement_operator() {
        for n_prime in 1..=6usize {
            let lb = (n_prime as f64 + 1.0) / 2.0;
            for theta in [0.3, 0.8, 1.1] {
                // ladder in the n index: ⟨n|J₋|n+1⟩ = √(k(2λ̄ − k)), k = n′ − n
                let dim = n_prime + 1;
                let mut g = vec![vec![0.0; dim]; dim];
                for n in 0..n_prime {
                    let k = (n_prime - n) as f64;
                    let e = (k * (2.0 * lb - k)).sqrt();
                    g[n][n + 1] = -theta * e;
                    g[n + 1][n] = theta * e;
                }
                let u = expm(&g);
                let w = su2_weights(lb, n_prime, Complex64::new(f64::tan(theta), 0.0));
                for n in 0..dim {
                    assert!(
                        (u[n][n_prime] - w[n].re).abs() < 1e-12,
                        "n'={n_prime} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn complex_alpha_phase() {
        let (b, _) = setup(0);
        let a = Complex64::from_polar(1.6, 0.7);
        let s = cs_weights(&b, a).unwrap();
        let real = cs_weights(&b, 1.6).unwrap();
        for (n, (c, r)) in s.weights.iter().zip(&real.weights).enumerate() {
            let k = (s.n_prime - n) as f64;
            let expect = r * Complex64::from_polar(1.0, 0.7 * k);
            assert!((c - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_is_unitary_and_revives() {
        let (b, s) = setup(45);
        let per = periods(b.constants()).unwrap();
        let p0 = evolve(&b, &s, 0.0).unwrap();
        assert!((p0.norm() - 1.0).abs() < 1e-8);
        for k in 0..10 {
            let t = per.t_rev * (k as f64 * 0.137).fract();
            assert!((evolve(&b, &s, t).unwrap().norm() - 1.0).abs() < 1e-8);
        }
        // At T_rev the quadratic phases realign but the linear phase leaves
        // the packet displaced along its orbit by a fraction of T_cl, so the
        // revival shows up within one classical period of T_rev.
        let best = (0..=400)
            .map(|k| per.t_rev + per.t_cl * (k as f64 / 200.0 - 1.0))
            .max_by(|&a, &c| {
                s.autocorrelation(&b, a)
                    .total_cmp(&s.autocorrelation(&b, c))
            })
            .unwrap();
        // the residual quadratic dephasing across one T_cl costs a few percent
        assert!(s.autocorrelation(&b, best) > 0.9);
        assert!(s.autocorrelation(&b, per.t_rev) < 1e-6);
        let prev = evolve(&b, &s, best).unwrap();
        assert!((p0.inner(&prev).unwrap().norm_sqr() - s.autocorrelation(&b, best)).abs() < 1e-8);
        assert!(evolve(&b, &s, -1.0).is_err());
    }

    #[test]
    fn autocorrelation_peaks_near_classical_period() {
        let (b, s) = setup(45);
        let per = periods(b.constants()).unwrap();
        let ts: Vec<f64> = (1..400)
            .map(|i| per.t_cl * 2.0 * i as f64 / 400.0)
            .collect();
        let ac: Vec<f64> = ts.iter().map(|&t| s.autocorrelation(&b, t)).collect();
        let best = (100..300).max_by(|&a, &c| ac[a].total_cmp(&ac[c])).unwrap();
        assert!(ac[best] > ac[best - 1] && ac[best] > ac[best + 1]);
        // T_cl is the ground-level period; the packet's own period follows
        // from dE/dn at its mean level
        assert!((ts[best] / per.t_cl - 1.0).abs() < 0.25);
        let pops = s.populations();
        let n_mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let c = b.constants();
        let slope = 2.0 * c.c1 / c.lambda_j - 2.0 * c.c2 / c.lambda_j.powi(2) * (n_mean + 0.5);
        let own = std::f64::consts::TAU / slope;
        assert!((ts[best] / own - 1.0).abs() < 0.02, "{} vs {own}", ts[best]);
    }

    #[test]
    fn cat_peaks_j0() {
        let (b, s) = setup(0);
        let per = periods(b.constants()).unwrap();
        let p = evolve(&b, &s, 0.25 * per.t_rev).unwrap();
        let mut peaks = detect_peaks(&p);
        peaks.sort_by(|a, c| c.height.total_cmp(&a.height));
        let mut top: Vec<f64> = peaks[..2].iter().map(|p| p.position).collect();
        top.sort_by(f64::total_cmp);
        assert!((top[0] - 5.3).abs() < 0.05, "{top:?}");
        assert!((top[1] - 6.48).abs() < 0.05, "{top:?}");
    }

    #[test]
    fn peak_refinement_on_parabola() {
        let grid = QuadratureGrid::uniform(0.0, 1.0, 11, crate::special::QuadratureKind::Trapezoid)
            .unwrap();
        let amps: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| Complex64::new((1.0 - (x - 0.43f64).powi(2)).sqrt(), 0.0))
            .collect();
        let p = WavePacket {
            gradient: amps.clone(),
            amplitudes: amps,
            grid,
            time: 0.0,
            j: 0,
            alpha: Complex64::new(1.0, 0.0),
        };
        let peaks = detect_peaks(&p);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].position - 0.43).abs() < 1e-12);
        assert!((peaks[0].height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_is_conserved() {
        let (b, s) = setup(45);
        let e = s.mean_energy(&b);
        let per = periods(b.constants()).unwrap();
        for t in [0.0, 0.1 * per.t_rev, 0.37 * per.t_rev] {
            let c: Vec<Complex64> = s
                .weights
                .iter()
                .zip(b.states())
                .map(|(d, st)| d * Complex64::from_polar(1.0, -st.energy * t))
                .collect();
            let et: f64 = c
                .iter()
                .zip(b.states())
                .map(|(c, st)| c.norm_sqr() * st.energy)
                .sum();
            assert!((et - e).abs() < 1e-12 * e.abs());
        }
    }
}
