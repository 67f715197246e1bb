//! File plumbing: atomic artifact writes, the grid CSV format `x,y,u` and the
//! run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use eigentrace::grid::{Grid, GridFunction};
use serde::Serialize;

/// Writes via a temp file in the same directory plus rename, so a crashed
/// run never leaves a half-written artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Shortest round-trip float formatting; re-parsing gives the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn grid_csv(u: &GridFunction) -> String {
    let grid = u.grid();
    let mut out = String::with_capacity(grid.node_count() * 24);
    out.push_str("x,y,u\n");
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            out.push_str(&fmt_f64(grid.x(i)));
            out.push(',');
            out.push_str(&fmt_f64(grid.y(j)));
            out.push(',');
            out.push_str(&fmt_f64(u.get(i, j)));
            out.push('\n');
        }
    }
    out
}

fn parse_rows(text: &str, path: &Path) -> Result<Vec<(f64, f64, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,y,u" => {}
        _ => return Err(format!("{}: expected header `x,y,u`", path.display())),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format!(
                "{}:{}: expected 3 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            ));
        }
        let mut vals = [0.0f64; 3];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| format!("{}:{}: bad number `{field}`", path.display(), lineno + 2))?;
        }
        rows.push((vals[0], vals[1], vals[2]));
    }
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

/// Reads a full-grid CSV back into a [`GridFunction`], inferring the uniform
/// layout from the coordinates. The stored node values double as the
/// boundary data.
pub fn read_grid_csv(path: &Path) -> Result<GridFunction, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let rows = parse_rows(&text, path)?;

    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let nx = xs.len();
    let ny = ys.len();
    if nx < 3 || ny < 3 || rows.len() != nx * ny {
        return Err(format!(
            "{}: expected a full {nx} x {ny} grid, got {} rows",
            path.display(),
            rows.len()
        ));
    }
    let h = xs[1] - xs[0];
    let uniform = |coords: &[f64]| {
        coords
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0))
    };
    if h <= 0.0 || !uniform(&xs) || !uniform(&ys) {
        return Err(format!("{}: grid spacing is not uniform", path.display()));
    }

    let origin = (xs[0], ys[0]);
    let mut values = vec![f64::NAN; nx * ny];
    for (x, y, u) in rows {
        let i = ((x - origin.0) / h).round() as usize;
        let j = ((y - origin.1) / h).round() as usize;
        values[j * nx + i] = u;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(format!("{}: grid has missing nodes", path.display()));
    }

    let boundary_values = values.clone();
    let (bnx, bh, borigin) = (nx, h, origin);
    let grid = Grid::new(nx, ny, h, origin, move |x, y| {
        let i = ((x - borigin.0) / bh).round() as usize;
        let j = ((y - borigin.1) / bh).round() as usize;
        boundary_values[j * bnx + i]
    })
    .map_err(|e| e.to_string())?;
    GridFunction::from_values(&grid, values).map_err(|e| e.to_string())
}

/// Every run writes one of these next to its primary artifact; rerunning the
/// recorded `argv` reproduces the artifacts byte for byte.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub seed: u64,
    /// Resolved artifact format: "json", "csv" or "csv+json".
    pub format: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
