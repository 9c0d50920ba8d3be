use std::f64::consts::PI;
use std::fmt::Write as _;

use rotmorse::coherent::detect_peaks;
use rotmorse::phase_space::wigner_snapshot;
use rotmorse::rotation::{AngleOptions, ANGLE_TABLE};
use rotmorse::sensitivity::{
    record_minima, scaling_fit, sensitivity_scan, ScalingFit, ScanOptions,
};
use rotmorse::{
    cs_weights, evolve, find_angle, periods, EigenBasis, Exec, MoleculeParams, RotorConstants,
    TimeFraction, WignerResolution,
};

use crate::args::{Command, GlobalArgs, JSet};
use crate::config::{sha256_hex, RunConfig};
use crate::output::{nonuniform_matrix, num, preview, tsv_row, write_file};
use crate::CliError;

/// Levels at which tile areas enter the scaling fit by default.
pub const REFERENCE_JS: [u32; 6] = [0, 64, 94, 116, 136, 150];

pub fn run(command: &Command, global: &GlobalArgs) -> Result<(), CliError> {
    let molecule = MoleculeParams::resolve(&global.molecule)?;
    let cfg = RunConfig::new(command, global, molecule);
    match command {
        Command::Eigen { levels } => eigen(cfg, global, *levels),
        Command::Evolve => evolve_cmd(cfg, global),
        Command::Wigner { preview } => wigner(cfg, global, *preview),
        Command::Scan { tiles } => scan(cfg, global, *tiles),
        Command::Fit { input } => match input {
            Some(path) => fit_file(cfg, global, path),
            None => fit_compute(cfg, global),
        },
        Command::Angle { table1 } => angle(cfg, global, *table1),
    }
}

fn require_time(global: &GlobalArgs, command: &str) -> Result<TimeFraction, CliError> {
    global
        .time
        .ok_or_else(|| CliError::Config(format!("{command} needs --time p/q")))
}

fn js_or(global: &GlobalArgs, default: &[u32]) -> JSet {
    global
        .j
        .clone()
        .unwrap_or_else(|| JSet::new(default.to_vec()))
}

fn tag(t: TimeFraction) -> String {
    format!("t{}-{}", t.numer(), t.denom())
}

fn basis_for(cfg: &RunConfig, j: u32) -> Result<EigenBasis, CliError> {
    let c = RotorConstants::with_branch(&cfg.molecule, j, cfg.equilibrium)?;
    Ok(EigenBasis::new(c)?)
}

fn eigen(mut cfg: RunConfig, global: &GlobalArgs, levels: Option<usize>) -> Result<(), CliError> {
    let js = js_or(global, &[0]);
    cfg.js = Some(js.clone());
    if let Some(n) = levels {
        cfg.extra.push(("levels".into(), n.to_string()));
    }
    for &j in js.values() {
        let basis = basis_for(&cfg, j)?;
        let c = basis.constants();
        let mut energies = cfg.header(
            &format!(
                "bound states for j = {j}: lambda_j = {}, lambda_bar_j = {}, r_j = {}, D_j = {}",
                num(c.lambda_j),
                num(c.lambda_bar_j),
                num(c.r_j),
                num(c.d_j)
            ),
            &["n", "s", "energy"],
        );
        for s in basis.states() {
            energies.push_str(&tsv_row(&[s.n.to_string(), num(s.s), num(s.energy)]));
        }
        let path = write_file(&global.out, &format!("eigen_j{j}_energies.tsv"), &energies)?;
        println!(
            "j = {j}: {} bound states -> {}",
            basis.states().len(),
            path.display()
        );

        let count = levels
            .unwrap_or(basis.states().len())
            .min(basis.states().len());
        let mut columns = vec!["r".to_string()];
        columns.extend((0..count).map(|n| format!("psi_{n}")));
        let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut waves = cfg.header(&format!("normalized eigenfunctions for j = {j}"), &cols);
        let samples: Vec<&[f64]> = (0..count)
            .map(|n| basis.sample(n))
            .collect::<Result<_, _>>()?;
        for (i, r) in basis.grid().points().iter().enumerate() {
            let mut row = vec![num(*r)];
            row.extend(samples.iter().map(|s| num(s[i])));
            waves.push_str(&tsv_row(&row));
        }
        write_file(
            &global.out,
            &format!("eigen_j{j}_wavefunctions.tsv"),
            &waves,
        )?;
    }
    Ok(())
}

fn evolve_cmd(mut cfg: RunConfig, global: &GlobalArgs) -> Result<(), CliError> {
    let tf = require_time(global, "evolve")?;
    let js = js_or(global, &[0]);
    cfg.js = Some(js.clone());
    cfg.alpha = Some(global.alpha);
    cfg.time = Some(tf);
    for &j in js.values() {
        let basis = basis_for(&cfg, j)?;
        let spec = cs_weights(&basis, global.alpha)?;
        let per = periods(basis.constants())?;
        let t = tf.time(per.t_rev);
        let packet = evolve(&basis, &spec, t)?;
        let peaks = detect_peaks(&packet);
        let mut out = cfg.header(
            &format!(
                "wave packet for j = {j} at t = {} (T_cl = {}, T_rev = {}), norm {}",
                num(t),
                num(per.t_cl),
                num(per.t_rev),
                num(packet.norm())
            ),
            &["r", "density", "re", "im"],
        );
        for p in &peaks {
            let _ = writeln!(out, "# peak\t{}\t{}", num(p.position), num(p.height));
        }
        for (r, a) in packet.grid.points().iter().zip(&packet.amplitudes) {
            out.push_str(&tsv_row(&[
                num(*r),
                num(a.norm_sqr()),
                num(a.re),
                num(a.im),
            ]));
        }
        let path = write_file(&global.out, &format!("evolve_j{j}_{}.tsv", tag(tf)), &out)?;
        let listing: Vec<String> = peaks.iter().map(|p| format!("{:.3}", p.position)).collect();
        println!(
            "j = {j}: density peaks at r = [{}] bohr -> {}",
            listing.join(", "),
            path.display()
        );
    }
    Ok(())
}

fn resolution(global: &GlobalArgs) -> Result<WignerResolution, CliError> {
    if global.grid_r < 3 || global.grid_p < 3 {
        return Err(CliError::Config(
            "--grid-r and --grid-p need at least 3 points".into(),
        ));
    }
    Ok(WignerResolution {
        n_r: global.grid_r,
        n_p: global.grid_p,
        ..Default::default()
    })
}

fn wigner(mut cfg: RunConfig, global: &GlobalArgs, show: bool) -> Result<(), CliError> {
    let tf = require_time(global, "wigner")?;
    let js = js_or(global, &[0]);
    let res = resolution(global)?;
    cfg.js = Some(js.clone());
    cfg.alpha = Some(global.alpha);
    cfg.time = Some(tf);
    cfg.grid = Some((res.n_r, res.n_p));
    for &j in js.values() {
        let basis = basis_for(&cfg, j)?;
        let spec = cs_weights(&basis, global.alpha)?;
        let t = tf.time(periods(basis.constants())?.t_rev);
        let field = wigner_snapshot(&basis, &spec, t, res, Exec::Parallel)?;
        let mut out = cfg.header(
            &format!(
                "Wigner function for j = {j} at t = {}; gnuplot nonuniform matrix: \
                 first line n_r and the r values, then p followed by W(r, p)",
                num(t)
            ),
            &[],
        );
        let _ = writeln!(
            out,
            "# normalization {}  purity {}  min {}  max {}",
            num(field.normalization()),
            num(field.purity()),
            num(field.min()),
            num(field.max())
        );
        out.push_str(&nonuniform_matrix(&field));
        let path = write_file(&global.out, &format!("wigner_j{j}_{}.dat", tag(tf)), &out)?;
        println!(
            "j = {j}: {}x{} field, normalization {:.6}, min/max {:.3} -> {}",
            res.n_r,
            res.n_p,
            field.normalization(),
            field.min() / field.max(),
            path.display()
        );
        if show {
            print!("{}", preview(&field, 72, 28));
        }
    }
    Ok(())
}

fn scan(mut cfg: RunConfig, global: &GlobalArgs, tiles: bool) -> Result<(), CliError> {
    let tf = require_time(global, "scan")?;
    let js = js_or(global, &(0..=160).collect::<Vec<_>>());
    let res = resolution(global)?;
    let tile_js: Vec<u32> = if tiles {
        REFERENCE_JS
            .iter()
            .copied()
            .filter(|j| js.values().contains(j))
            .collect()
    } else {
        Vec::new()
    };
    cfg.js = Some(js.clone());
    cfg.alpha = Some(global.alpha);
    cfg.time = Some(tf);
    if tiles {
        cfg.grid = Some((res.n_r, res.n_p));
        cfg.extra
            .push(("tiles".into(), JSet::new(tile_js.clone()).to_string()));
    }
    let options = ScanOptions {
        branch: cfg.equilibrium,
        tile_js,
        resolution: res,
        ..Default::default()
    };
    let outcome = sensitivity_scan(&cfg.molecule, js.values(), tf, global.alpha, &options);
    if outcome.records.is_empty() {
        if let Some((_, e)) = outcome.failures.first() {
            return Err(e.clone().into());
        }
    }
    let mut out = cfg.header(
        "classical action and tile area per rotational level",
        &[
            "j",
            "delta_x",
            "delta_p",
            "action",
            "inv_action",
            "tile_area",
        ],
    );
    for r in &outcome.records {
        out.push_str(&tsv_row(&[
            r.j.to_string(),
            num(r.delta_x),
            num(r.delta_p),
            num(r.action),
            num(r.inv_action),
            r.tile_area.map_or_else(|| "nan".to_string(), num),
        ]));
    }
    let minima = record_minima(&outcome.records);
    out.push_str("# minima of inv_action: j, value, interpolated j\n");
    for m in &minima {
        let _ = writeln!(
            out,
            "# minimum\t{}\t{}\t{}",
            m.j,
            num(m.value),
            num(m.refined_j)
        );
    }
    for (j, e) in &outcome.failures {
        let _ = writeln!(out, "# skipped\t{j}\t{e}");
    }
    let path = write_file(&global.out, &format!("scan_{}.tsv", tag(tf)), &out)?;
    let listing: Vec<String> = minima.iter().map(|m| m.j.to_string()).collect();
    println!(
        "{} levels, {} skipped, minima at j = [{}] -> {}",
        outcome.records.len(),
        outcome.failures.len(),
        listing.join(", "),
        path.display()
    );
    Ok(())
}

fn fit_report(
    cfg: &RunConfig,
    global: &GlobalArgs,
    name: &str,
    points: &[(u32, f64, f64)],
) -> Result<(), CliError> {
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.1, p.2)).collect();
    let fit = scaling_fit(&pairs);
    let mut out = cfg.header(
        "scaling of tile area with inverse action",
        &["j", "inv_action", "tile_area"],
    );
    for (j, x, y) in points {
        out.push_str(&tsv_row(&[j.to_string(), num(*x), num(*y)]));
    }
    match &fit {
        Ok(ScalingFit {
            slope,
            factor,
            residual,
            points,
        }) => {
            let _ = writeln!(
                out,
                "# slope {}\n# factor {}\n# residual {}\n# points {points}",
                num(*slope),
                num(*factor),
                num(*residual)
            );
        }
        Err(e) => {
            let _ = writeln!(out, "# fit failed: {e}");
        }
    }
    let path = write_file(&global.out, name, &out)?;
    let f = fit?;
    println!(
        "slope {:.4}, factor {:.4}, rms residual {:.3e} over {} points -> {}",
        f.slope,
        f.factor,
        f.residual,
        f.points,
        path.display()
    );
    Ok(())
}

fn fit_compute(mut cfg: RunConfig, global: &GlobalArgs) -> Result<(), CliError> {
    let tf = global.time.unwrap_or(TimeFraction::new(1, 8)?);
    let js = js_or(global, &REFERENCE_JS);
    let res = resolution(global)?;
    cfg.js = Some(js.clone());
    cfg.alpha = Some(global.alpha);
    cfg.time = Some(tf);
    cfg.grid = Some((res.n_r, res.n_p));
    let options = ScanOptions {
        branch: cfg.equilibrium,
        tile_js: js.values().to_vec(),
        resolution: res,
        ..Default::default()
    };
    let outcome = sensitivity_scan(&cfg.molecule, js.values(), tf, global.alpha, &options);
    for (j, e) in &outcome.failures {
        log::warn!("j = {j} left out of the fit: {e}");
    }
    let points: Vec<(u32, f64, f64)> = outcome
        .records
        .iter()
        .filter_map(|r| r.tile_area.map(|a| (r.j, r.inv_action, a)))
        .collect();
    fit_report(&cfg, global, &format!("fit_{}.tsv", tag(tf)), &points)
}

/// Reads `(j, inv_action, tile_area)` from a scan table, skipping rows
/// without a tile area.
fn parse_scan_table(text: &str) -> Result<Vec<(u32, f64, f64)>, CliError> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let bad = || CliError::Config(format!("line {}: not a scan table row", lineno + 1));
        if cells.len() < 6 {
            return Err(bad());
        }
        let j: u32 = cells[0].trim().parse().map_err(|_| bad())?;
        let x: f64 = cells[4].trim().parse().map_err(|_| bad())?;
        let y: f64 = cells[5].trim().parse().map_err(|_| bad())?;
        if !y.is_nan() {
            points.push((j, x, y));
        }
    }
    Ok(points)
}

fn fit_file(
    mut cfg: RunConfig,
    global: &GlobalArgs,
    path: &std::path::Path,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let digest = sha256_hex(text.as_bytes());
    cfg.extra.push(("input_sha256".into(), digest));
    let points = parse_scan_table(&text)?;
    fit_report(&cfg, global, "fit_input.tsv", &points)
}

fn angle(mut cfg: RunConfig, global: &GlobalArgs, table1: bool) -> Result<(), CliError> {
    let rows: Vec<(u32, TimeFraction, Option<f64>)> = if table1 {
        cfg.extra.push(("table".into(), "reference".into()));
        ANGLE_TABLE
            .iter()
            .map(|e| {
                let tf = TimeFraction::new(e.time_fraction.0, e.time_fraction.1)?;
                Ok((e.j, tf, Some(e.phi_over_pi)))
            })
            .collect::<Result<_, rotmorse::Error>>()?
    } else {
        let tf = require_time(global, "angle")?;
        let js = global
            .j
            .clone()
            .ok_or_else(|| CliError::Config("angle needs --j or --table1".into()))?;
        cfg.js = Some(js.clone());
        cfg.time = Some(tf);
        js.values().iter().map(|&j| (j, tf, None)).collect()
    };
    cfg.alpha = Some(global.alpha);
    let options = AngleOptions {
        equilibrium: cfg.equilibrium,
        ..Default::default()
    };
    let mut out = cfg.header(
        "rotation angle of the rotated j = 0 packet that best matches the j packet",
        &[
            "j",
            "time",
            "phi_over_pi",
            "phi",
            "peak_overlap",
            "extra_over_pi",
            "reliable",
            "reference_over_pi",
            "deviation_over_pi",
        ],
    );
    println!(
        "{:>5} {:>6} {:>9} {:>9} {:>9}",
        "j", "time", "phi/pi", "overlap", "ref/pi"
    );
    for (j, tf, reference) in rows {
        let est = find_angle(&cfg.molecule, j, tf, global.alpha, &options)?;
        let phi_pi = est.phi / PI;
        let (ref_cell, dev_cell) = match reference {
            Some(r) => (num(r), num(phi_pi - r)),
            None => ("nan".to_string(), "nan".to_string()),
        };
        out.push_str(&tsv_row(&[
            j.to_string(),
            tf.to_string(),
            num(phi_pi),
            num(est.phi),
            num(est.peak_overlap),
            num(est.extra_rotation / PI),
            est.reliable.to_string(),
            ref_cell,
            dev_cell,
        ]));
        println!(
            "{j:>5} {:>6} {phi_pi:>9.4} {:>9.4} {:>9}",
            tf.to_string(),
            est.peak_overlap,
            reference.map_or_else(|| "-".to_string(), |r| format!("{r:.2}"))
        );
    }
    let name = if table1 {
        "angles_table1.tsv"
    } else {
        "angles.tsv"
    };
    let path = write_file(&global.out, name, &out)?;
    println!("-> {}", path.display());
    Ok(())
}
