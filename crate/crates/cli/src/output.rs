//! Plain-text emitters: tab-separated tables, gnuplot matrices and a
//! character preview of Wigner fields.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rotmorse::WignerField;

use crate::CliError;

/// Fixed-width scientific notation shared by every numeric column.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn tsv_row(cells: &[String]) -> String {
    let mut s = cells.join("\t");
    s.push('\n');
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Gnuplot `nonuniform matrix` body: the first line holds the column count
/// and the r values, every further line a p value followed by W(r, p) for
/// all r.
pub fn nonuniform_matrix(field: &WignerField) -> String {
    let (n_r, n_p) = field.shape();
    let mut s = String::with_capacity((n_r + 1) * (n_p + 1) * 20);
    let _ = write!(s, "{n_r}");
    for r in &field.r_axis {
        let _ = write!(s, "\t{}", num(*r));
    }
    s.push('\n');
    for (k, p) in field.p_axis.iter().enumerate() {
        s.push_str(&num(*p));
        for i in 0..n_r {
            let _ = write!(s, "\t{}", num(field.values[[i, k]]));
        }
        s.push('\n');
    }
    s
}

/// Coarse rendering with r across and p upwards; `+`/`#` mark positive
/// values, `-`/`=` negative ones, blank the near-zero background.
pub fn preview(field: &WignerField, width: usize, height: usize) -> String {
    let (n_r, n_p) = field.shape();
    let scale = field
        .max()
        .abs()
        .max(field.min().abs())
        .max(f64::MIN_POSITIVE);
    let mut out = String::new();
    for row in (0..height).rev() {
        let k = row * (n_p - 1) / (height - 1).max(1);
        for col in 0..width {
            let i = col * (n_r - 1) / (width - 1).max(1);
            let v = field.values[[i, k]] / scale;
            out.push(match v {
                v if v > 0.4 => '#',
                v if v > 0.05 => '+',
                v if v < -0.4 => '=',
                v if v < -0.05 => '-',
                _ => ' ',
            });
        }
        out.push('\n');
    }
    out
}
