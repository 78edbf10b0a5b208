//! Flat key-value run configuration with dotted sections.
//!
//! ```text
//!     # reference power-law medium
//!     model.family = power_law
//!     model.C2 = 1.0
//!     model.H = 1.0
//!     grid.N = 1024
//!     sweep.eps_list = 0.4,0.3,0.2,0.1
//! ```
//!
//! One file drives every subcommand. Parsing is strict: unknown sections are
//! rejected with the offending line number; `model.*` keys are passed through
//! to the selected law family. A config round-trips through
//! [`RunConfig::serialize`] losslessly (up to number formatting), and the
//! SHA-256 of the canonical serialization is embedded in every output file.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::constitutive::{ConstitutiveModel, LawParams, LawRegistry};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub model_family: Option<String>,
    pub model_params: LawParams,
    pub grid_l_dom: Option<f64>,
    pub grid_n: Option<usize>,
    pub solver_outer_tol: Option<f64>,
    pub solver_max_outer: Option<usize>,
    pub solver_inner_tol: Option<f64>,
    pub solver_max_inner: Option<usize>,
    pub solver_trust_radius: Option<f64>,
    pub sweep_eps: Option<Vec<f64>>,
    pub dyn_ly: Option<f64>,
    pub dyn_ny: Option<usize>,
    pub dyn_dt: Option<f64>,
    pub dyn_t_end: Option<f64>,
    pub dyn_snapshots: Option<usize>,
    pub output_dir: Option<String>,
    pub seed: Option<u64>,
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::config(line, format!("{key}: cannot parse '{value}'")))
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(line_no, format!("expected key = value, got '{line}'")));
            };
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value, line_no)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(0, format!("{}: {e}", path.display())))?;
        RunConfig::parse_str(&text)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if let Some(param) = key.strip_prefix("model.") {
            if param == "family" {
                self.model_family = Some(value.to_string());
            } else {
                self.model_params.insert(param, line, value);
            }
            return Ok(());
        }
        match key {
            "grid.L_dom" => self.grid_l_dom = Some(parse_num(line, key, value)?),
            "grid.N" => self.grid_n = Some(parse_num(line, key, value)?),
            "solver.outer_tol" => self.solver_outer_tol = Some(parse_num(line, key, value)?),
            "solver.max_outer" => self.solver_max_outer = Some(parse_num(line, key, value)?),
            "solver.inner_tol" => self.solver_inner_tol = Some(parse_num(line, key, value)?),
            "solver.max_inner" => self.solver_max_inner = Some(parse_num(line, key, value)?),
            "solver.trust_radius" => self.solver_trust_radius = Some(parse_num(line, key, value)?),
            "sweep.eps_list" => {
                let mut eps = Vec::new();
                for piece in value.split(',') {
                    let piece = piece.trim();
                    if piece.is_empty() {
                        continue;
                    }
                    eps.push(parse_num::<f64>(line, key, piece)?);
                }
                if eps.is_empty() {
                    return Err(Error::config(line, "sweep.eps_list: empty list"));
                }
                self.sweep_eps = Some(eps);
            }
            "dynamics.Ly" => self.dyn_ly = Some(parse_num(line, key, value)?),
            "dynamics.Ny" => self.dyn_ny = Some(parse_num(line, key, value)?),
            "dynamics.dt" => self.dyn_dt = Some(parse_num(line, key, value)?),
            "dynamics.t_end" => self.dyn_t_end = Some(parse_num(line, key, value)?),
            "dynamics.snapshots" => self.dyn_snapshots = Some(parse_num(line, key, value)?),
            "output.dir" => self.output_dir = Some(value.to_string()),
            "seed" => self.seed = Some(parse_num(line, key, value)?),
            _ => {
                return Err(Error::config(line, format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }

    /// Canonical text form: fixed key order, one `key = value` per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(f) = &self.model_family {
            writeln!(out, "model.family = {f}").unwrap();
        }
        let keys: Vec<String> = self.model_params.keys().map(String::from).collect();
        for k in keys {
            writeln!(out, "model.{k} = {}", self.model_params.raw(&k).unwrap()).unwrap();
        }
        macro_rules! emit {
            ($field:expr, $key:literal) => {
                if let Some(v) = &$field {
                    writeln!(out, concat!($key, " = {}"), v).unwrap();
                }
            };
        }
        emit!(self.grid_l_dom, "grid.L_dom");
        emit!(self.grid_n, "grid.N");
        emit!(self.solver_outer_tol, "solver.outer_tol");
        emit!(self.solver_max_outer, "solver.max_outer");
        emit!(self.solver_inner_tol, "solver.inner_tol");
        emit!(self.solver_max_inner, "solver.max_inner");
        emit!(self.solver_trust_radius, "solver.trust_radius");
        if let Some(eps) = &self.sweep_eps {
            let list: Vec<String> = eps.iter().map(|e| e.to_string()).collect();
            writeln!(out, "sweep.eps_list = {}", list.join(",")).unwrap();
        }
        emit!(self.dyn_ly, "dynamics.Ly");
        emit!(self.dyn_ny, "dynamics.Ny");
        emit!(self.dyn_dt, "dynamics.dt");
        emit!(self.dyn_t_end, "dynamics.t_end");
        emit!(self.dyn_snapshots, "dynamics.snapshots");
        emit!(self.output_dir, "output.dir");
        emit!(self.seed, "seed");
        out
    }

    /// SHA-256 of the canonical serialization, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.serialize().as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").unwrap();
        }
        hex
    }

    pub fn build_model(&self, registry: &LawRegistry) -> Result<ConstitutiveModel> {
        let family = self
            .model_family
            .as_deref()
            .ok_or_else(|| Error::config(0, "model.family is required"))?;
        registry.build(family, &self.model_params)
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n.unwrap_or(1024)
    }

    pub fn outer_tol(&self) -> f64 {
        self.solver_outer_tol.unwrap_or(1e-10)
    }

    pub fn max_outer(&self) -> usize {
        self.solver_max_outer.unwrap_or(60)
    }

    pub fn inner_tol(&self) -> f64 {
        self.solver_inner_tol.unwrap_or(1e-12)
    }

    pub fn max_inner(&self) -> usize {
        self.solver_max_inner.unwrap_or(2000)
    }

    pub fn trust_factor(&self) -> f64 {
        self.solver_trust_radius.unwrap_or(2.0)
    }

    pub fn sweep_eps(&self) -> Vec<f64> {
        self.sweep_eps.clone().unwrap_or_else(|| vec![0.4, 0.3, 0.2, 0.1])
    }

    pub fn output_dir(&self) -> &str {
        self.output_dir.as_deref().unwrap_or("out")
    }

    pub fn snapshots(&self) -> usize {
        self.dyn_snapshots.unwrap_or(9).max(5)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(12345)
    }
}
