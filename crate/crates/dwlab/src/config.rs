//! Run configuration: flat `key = value` text with dotted section prefixes,
//! command-line `--set` overrides, and a canonical form whose SHA-256 hash
//! ties output files to the configuration that produced them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{DwError, Result};
use crate::solver::{self, InitialKind};

/// Everything a run needs, with dimension-aware defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub p: f64,
    /// Sobolev order override; empty means the admissibility default.
    pub s: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_inv: Option<f64>,
    pub points: Option<usize>,
    pub half_length: Option<f64>,
    pub eps: f64,
    pub ic_kind: String,
    pub ic_width: f64,
    pub ic_radius: f64,
    pub ic_mode: i64,
    pub t_end: Option<f64>,
    pub dt: f64,
    pub samples_per_decade: usize,
    pub picard_nodes: usize,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub seed: u64,
    /// Output directory; excluded from the canonical form and hash.
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            p: 2.0,
            s: None,
            kappa: None,
            gamma_inv: None,
            points: None,
            half_length: None,
            eps: 0.01,
            ic_kind: "gaussian".into(),
            ic_width: 1.0,
            ic_radius: 1.0,
            ic_mode: 1,
            t_end: None,
            dt: 0.05,
            samples_per_decade: 40,
            picard_nodes: 512,
            picard_max_iter: 12,
            picard_tol: 1e-9,
            seed: 1,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| DwError::Config(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "run.dim" | "n" | "dim" => self.dim = parse_num(key, v)?,
            "run.p" | "p" => self.p = parse_num(key, v)?,
            "run.s" | "s" => self.s = Some(parse_num(key, v)?),
            "run.kappa" | "kappa" => self.kappa = Some(parse_num(key, v)?),
            "run.gamma_inv" | "gamma_inv" => self.gamma_inv = Some(parse_num(key, v)?),
            "run.seed" | "seed" => self.seed = parse_num(key, v)?,
            "grid.points" | "points" => self.points = Some(parse_num(key, v)?),
            "grid.half_length" | "half_length" => self.half_length = Some(parse_num(key, v)?),
            "ic.kind" => self.ic_kind = v.to_string(),
            "ic.eps" | "eps" => self.eps = parse_num(key, v)?,
            "ic.width" => self.ic_width = parse_num(key, v)?,
            "ic.radius" => self.ic_radius = parse_num(key, v)?,
            "ic.mode" => self.ic_mode = parse_num(key, v)?,
            "solve.t_end" | "t_end" => self.t_end = Some(parse_num(key, v)?),
            "solve.dt" | "dt" => self.dt = parse_num(key, v)?,
            "solve.samples_per_decade" => self.samples_per_decade = parse_num(key, v)?,
            "picard.nodes" => self.picard_nodes = parse_num(key, v)?,
            "picard.max_iter" => self.picard_max_iter = parse_num(key, v)?,
            "picard.tol" => self.picard_tol = parse_num(key, v)?,
            "out.dir" => self.out = Some(PathBuf::from(v)),
            other => {
                return Err(DwError::Config(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    /// Parse a config file: `key = value` lines, `#` comments, blank lines.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| DwError::io(path, e))?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                DwError::Config(format!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    pub fn grid_points(&self) -> usize {
        self.points
            .unwrap_or_else(|| solver::default_grid_size(self.dim).0)
    }

    pub fn grid_half_length(&self) -> f64 {
        self.half_length
            .unwrap_or_else(|| solver::default_grid_size(self.dim).1)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
            .unwrap_or(if self.dim == 2 { 120.0 } else { 400.0 })
    }

    pub fn initial_kind(&self) -> Result<InitialKind> {
        match self.ic_kind.as_str() {
            "gaussian" => Ok(InitialKind::Gaussian {
                width: self.ic_width,
            }),
            "bump" => Ok(InitialKind::Bump {
                radius: self.ic_radius,
            }),
            "single-mode" => Ok(InitialKind::SingleMode { mode: self.ic_mode }),
            other => Err(DwError::Config(format!(
                "unknown ic.kind {other:?} (gaussian | bump | single-mode)"
            ))),
        }
    }

    /// Canonical serialization: every key in sorted order, one per line,
    /// output directory excluded.
    pub fn canonical(&self) -> String {
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        map.insert("grid.half_length", fmt_f64(self.grid_half_length()));
        map.insert("grid.points", self.grid_points().to_string());
        map.insert("ic.eps", fmt_f64(self.eps));
        map.insert("ic.kind", self.ic_kind.clone());
        map.insert("ic.mode", self.ic_mode.to_string());
        map.insert("ic.radius", fmt_f64(self.ic_radius));
        map.insert("ic.width", fmt_f64(self.ic_width));
        map.insert("picard.max_iter", self.picard_max_iter.to_string());
        map.insert("picard.nodes", self.picard_nodes.to_string());
        map.insert("picard.tol", fmt_f64(self.picard_tol));
        map.insert("run.dim", self.dim.to_string());
        map.insert(
            "run.gamma_inv",
            self.gamma_inv.map(fmt_f64).unwrap_or_default(),
        );
        map.insert("run.kappa", self.kappa.map(fmt_f64).unwrap_or_default());
        map.insert("run.p", fmt_f64(self.p));
        map.insert("run.s", self.s.map(fmt_f64).unwrap_or_default());
        map.insert("run.seed", self.seed.to_string());
        map.insert("solve.dt", fmt_f64(self.dt));
        map.insert(
            "solve.samples_per_decade",
            self.samples_per_decade.to_string(),
        );
        map.insert("solve.t_end", fmt_f64(self.t_end()));
        let mut out = String::new();
        for (k, v) in map {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// SHA-256 of the canonical form, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut s = String::with_capacity(64);
        for b in digest {
            write!(s, "{b:02x}").unwrap();
        }
        s
    }
}

/// Shortest decimal that roundtrips the exact double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
