//! File formats: the norms CSV, the run metadata key/value file, and the
//! binary state snapshot.

use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use crate::config::{fmt_f64, RunConfig};
use crate::error::{DwError, Result};
use crate::grid::{Field, Grid};
use crate::solver::{State, Trajectory};

pub const CSV_HEADER: &str = "t,l_alpha,l2_v,hs_dot_v,l2_u,linf_v,x_weighted_lalpha,x_weighted_hs";
pub const SNAPSHOT_MAGIC: &[u8; 9] = b"DWSNAP01\n";

/// One parsed CSV row, columns in header order.
pub type NormRow = [f64; 8];

/// Write `norms.csv` and `meta.txt` into `dir`, creating it if needed.
/// Returns the CSV path.
pub fn write_trajectory(traj: &Trajectory, config: &RunConfig, dir: &Path) -> Result<PathBuf> {
    if traj.samples.is_empty() {
        return Err(DwError::InvalidArgument("empty trajectory".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| DwError::io(dir, e))?;
    let csv_path = dir.join("norms.csv");
    let mut csv = String::with_capacity(128 * (traj.samples.len() + 1));
    csv.push_str(CSV_HEADER);
    csv.push('\n');
    for s in &traj.samples {
        let wl = traj.weights.weight_l_alpha(s.t) * s.l_alpha;
        let wh = traj.weights.weight_hs(s.t) * s.hs_dot_v;
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.t, s.l_alpha, s.l2_v, s.hs_dot_v, s.l2_u, s.linf_v, wl, wh
        ));
    }
    std::fs::write(&csv_path, csv).map_err(|e| DwError::io(&csv_path, e))?;
    write_meta(config, dir)?;
    Ok(csv_path)
}

/// Write `meta.txt`: the full canonical config plus its hash and the seed.
pub fn write_meta(config: &RunConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| DwError::io(dir, e))?;
    let path = dir.join("meta.txt");
    let mut text = config.canonical();
    text.push_str(&format!("config_hash = {}\n", config.hash()));
    std::fs::write(&path, text).map_err(|e| DwError::io(&path, e))
}

/// Read the `config_hash` recorded in a run directory's `meta.txt`.
pub fn read_meta_hash(dir: &Path) -> Result<String> {
    let path = dir.join("meta.txt");
    let text = std::fs::read_to_string(&path).map_err(|e| DwError::io(&path, e))?;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() == "config_hash" {
                return Ok(v.trim().to_string());
            }
        }
    }
    Err(DwError::Config(format!(
        "{}: no config_hash entry",
        path.display()
    )))
}

/// Parse `norms.csv`, checking the header.
pub fn read_norms_csv(path: &Path) -> Result<Vec<NormRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| DwError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(DwError::Config(format!(
                "{}: bad CSV header {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = [0.0; 8];
        let mut fields = line.split(',');
        for slot in &mut row {
            let field = fields.next().ok_or_else(|| {
                DwError::Config(format!("{}:{}: short row", path.display(), i + 2))
            })?;
            *slot = field.trim().parse().map_err(|_| {
                DwError::Config(format!(
                    "{}:{}: bad number {field:?}",
                    path.display(),
                    i + 2
                ))
            })?;
        }
        if fields.next().is_some() {
            return Err(DwError::Config(format!(
                "{}:{}: too many columns",
                path.display(),
                i + 2
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Binary snapshot: text magic and header, then u and v as little-endian
/// doubles in row-major node order.
pub fn write_snapshot(state: &State, p: f64, path: &Path) -> Result<()> {
    let grid = state.grid();
    let file = std::fs::File::create(path).map_err(|e| DwError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = format!(
        "{}{}\n{}\n{}\n{}\n{}\n",
        std::str::from_utf8(SNAPSHOT_MAGIC).unwrap(),
        grid.dim(),
        grid.points_per_axis(),
        fmt_f64(grid.half_length()),
        fmt_f64(state.t),
        fmt_f64(p)
    );
    let io = |e| DwError::io(path, e);
    w.write_all(header.as_bytes()).map_err(io)?;
    for field in [&state.u, &state.v] {
        for &x in field.values() {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Read a snapshot back; returns the state and the nonlinearity exponent it
/// was produced with.
pub fn read_snapshot(path: &Path) -> Result<(State, f64)> {
    let bytes = std::fs::read(path).map_err(|e| DwError::io(path, e))?;
    let bad = |msg: &str| DwError::Snapshot(format!("{}: {msg}", path.display()));
    if bytes.len() < SNAPSHOT_MAGIC.len() || &bytes[..SNAPSHOT_MAGIC.len()] != SNAPSHOT_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut rest = &bytes[SNAPSHOT_MAGIC.len()..];
    let mut line = || -> Result<String> {
        let pos = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| DwError::Snapshot(format!("{}: truncated header", path.display())))?;
        let s = std::str::from_utf8(&rest[..pos])
            .map_err(|_| DwError::Snapshot(format!("{}: non-text header", path.display())))?
            .to_string();
        rest = &rest[pos + 1..];
        Ok(s)
    };
    let dim: usize = line()?.parse().map_err(|_| bad("bad dim"))?;
    let points: usize = line()?.parse().map_err(|_| bad("bad points"))?;
    let half_length: f64 = line()?.parse().map_err(|_| bad("bad half_length"))?;
    let t: f64 = line()?.parse().map_err(|_| bad("bad t"))?;
    let p: f64 = line()?.parse().map_err(|_| bad("bad p"))?;
    drop(line);
    let grid = Grid::new(dim, points, half_length)?;
    let count = grid.node_count();
    if rest.len() != 2 * count * 8 {
        return Err(bad("payload length mismatch"));
    }
    let read_field = |offset: usize| -> Field {
        let vals: Vec<f64> = (0..count)
            .map(|i| {
                let at = offset + 8 * i;
                f64::from_le_bytes(rest[at..at + 8].try_into().unwrap())
            })
            .collect();
        Field::new(grid.clone(), vals).unwrap()
    };
    let u = read_field(0);
    let v = read_field(count * 8);
    Ok((State { u, v, t }, p))
}

/// Copy of `path` with identical bytes iff the snapshot format is stable.
pub fn rewrite_snapshot(path: &Path, out: &Path) -> Result<()> {
    let (state, p) = read_snapshot(path)?;
    write_snapshot(&state, p, out)
}
