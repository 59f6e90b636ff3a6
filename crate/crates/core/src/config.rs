//! Run descriptions.
//!
//! ```toml
//! # spin-orbital index of the ionized core electron (2p = alpha, 2p+1 = beta)
//! core_index = 1
//! # any of: exact, qsp, tdcc, tddcc1, tddcc1_1b, tddcc1_2b, tddcc2
//! methods = ["exact", "tdcc", "tddcc1", "tddcc1_1b", "tddcc1_2b", "tddcc2", "qsp"]
//! dt = 0.1          # output spacing, a.u. (default 0.1)
//! t_max = 900.0     # a.u. (default 900)
//! eta = 0.01        # Lorentzian broadening, hartree (default 0.01)
//! output_dir = "out"
//! emit_components = true
//! max_channels_per_kind = 64
//! # (d_cos, d_sin) pairs; d_cos even, d_sin odd
//! qsp_degrees = [[2, 3], [4, 5], [6, 7]]
//! qsp_tau_max = 2.0   # QSP trajectories cover alpha * t in [0, qsp_tau_max]
//! qsp_points = 201
//!
//! [omega_grid]      # hartree (default -4 .. 1, 5001 points)
//! lo = -4.0
//! hi = 1.0
//! n = 5001
//!
//! [system.siam]
//! eps_impurity = -1.5
//! bath_energies = [-1.0, 1.0, 2.0]
//! hybridization = 0.4
//! onsite_u = 2.0
//! ```
//!
//! A molecular system replaces the last table with
//! `system = { fcidump = "h2o.fcidump" }`; relative paths are resolved
//! against the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_siam, Hamiltonian, SiamParams};
use crate::rteom::{AnsatzKind, PropagationOptions};
use crate::spectra::{OmegaGrid, DEFAULT_ETA};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_T_MAX: f64 = 900.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    Siam(SiamParams),
    Fcidump(PathBuf),
}

/// One entry of the method matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Qsp,
    Ansatz(AnsatzKind),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Qsp => "qsp",
            Method::Ansatz(k) => k.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "fci" => Ok(Method::Exact),
            "qsp" => Ok(Method::Qsp),
            _ => s.parse().map(Method::Ansatz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub core_index: usize,
    pub methods: Vec<String>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub omega_grid: Option<OmegaGrid>,
    #[serde(default)]
    pub qsp_degrees: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub qsp_tau_max: Option<f64>,
    #[serde(default)]
    pub qsp_points: Option<usize>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit_components: bool,
    #[serde(default)]
    pub max_channels_per_kind: Option<usize>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Note,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Note => "note",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Fully defaulted settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub system: SystemSpec,
    pub core_index: usize,
    pub methods: Vec<Method>,
    pub dt: f64,
    pub t_max: f64,
    pub eta: f64,
    pub omega_grid: OmegaGrid,
    pub qsp_degrees: Vec<(usize, usize)>,
    pub qsp_tau_max: f64,
    pub qsp_points: usize,
    pub output_dir: PathBuf,
    pub emit_components: bool,
    pub max_channels_per_kind: usize,
}

impl Settings {
    pub fn propagation(&self) -> PropagationOptions {
        PropagationOptions { dt: self.dt, t_max: self.t_max, ..Default::default() }
    }

    pub fn load_hamiltonian(&self) -> Result<Hamiltonian> {
        match &self.system {
            SystemSpec::Siam(p) => build_siam(p),
            SystemSpec::Fcidump(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open FCIDUMP {}: {e}", path.display())))?;
                crate::fcidump::load_fcidump(std::io::BufReader::new(file))
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative FCIDUMP path is taken relative to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let SystemSpec::Fcidump(p) = &mut cfg.system {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Every invariant violation, plus notes on defaults that were applied.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut error = |m: String| out.push(Diagnostic { severity: Severity::Error, message: m });
        if self.methods.is_empty() {
            error("at least one method must be requested".into());
        }
        let mut seen = Vec::new();
        for m in &self.methods {
            match m.parse::<Method>() {
                Ok(x) if seen.contains(&x) => error(format!("method '{m}' listed twice")),
                Ok(x) => seen.push(x),
                Err(_) => error(format!("unknown method '{m}'")),
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                error("dt must be positive".into());
            }
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                error("t_max must be positive".into());
            }
        }
        if let (Some(dt), Some(t)) = (self.dt, self.t_max) {
            if dt > 0.0 && t > 0.0 && t < dt {
                error("t_max must be at least dt".into());
            }
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                error("eta must be positive".into());
            }
        }
        if let Some(g) = &self.omega_grid {
            if let Err(e) = g.validate() {
                error(e.to_string());
            }
        }
        if let Some(degrees) = &self.qsp_degrees {
            if degrees.is_empty() {
                error("qsp_degrees must not be empty".into());
            }
            for &(c, s) in degrees {
                if c % 2 != 0 || s % 2 != 1 {
                    error(format!("QSP degrees ({c}, {s}) need an even cosine and odd sine degree"));
                }
            }
        }
        if let Some(t) = self.qsp_tau_max {
            if !(t > 0.0 && t.is_finite()) {
                error("qsp_tau_max must be positive".into());
            }
        }
        if matches!(self.qsp_points, Some(n) if n < 2) {
            error("qsp_points must be at least 2".into());
        }
        if self.max_channels_per_kind == Some(0) {
            error("max_channels_per_kind must be positive".into());
        }
        match &self.system {
            SystemSpec::Siam(p) => {
                if let Err(e) = p.validate() {
                    error(e.to_string());
                } else if self.core_index >= 2 * (1 + p.bath_energies.len()) {
                    error(format!("core_index {} outside {} spin orbitals", self.core_index, 2 * (1 + p.bath_energies.len())));
                }
            }
            SystemSpec::Fcidump(path) => {
                if !path.is_file() {
                    error(format!("FCIDUMP {} not readable", path.display()));
                }
            }
        }
        let mut note = |m: String| out.push(Diagnostic { severity: Severity::Note, message: m });
        if self.dt.is_none() {
            note(format!("dt defaulted to {DEFAULT_DT}"));
        }
        if self.t_max.is_none() {
            note(format!("t_max defaulted to {DEFAULT_T_MAX}"));
        }
        if self.eta.is_none() {
            note(format!("eta defaulted to {DEFAULT_ETA}"));
        }
        if self.omega_grid.is_none() {
            let g = OmegaGrid::default();
            note(format!("omega_grid defaulted to [{}, {}] with {} points", g.lo, g.hi, g.n));
        }
        out
    }

    pub fn settings(&self) -> Result<Settings> {
        let errors: Vec<String> =
            self.validate().into_iter().filter(|d| d.severity == Severity::Error).map(|d| d.message).collect();
        if !errors.is_empty() {
            return Err(Error::Config(errors.join("; ")));
        }
        let mut methods: Vec<Method> = self.methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
        methods.sort();
        Ok(Settings {
            system: self.system.clone(),
            core_index: self.core_index,
            methods,
            dt: self.dt.unwrap_or(DEFAULT_DT),
            t_max: self.t_max.unwrap_or(DEFAULT_T_MAX),
            eta: self.eta.unwrap_or(DEFAULT_ETA),
            omega_grid: self.omega_grid.unwrap_or_default(),
            qsp_degrees: self.qsp_degrees.clone().unwrap_or_else(|| vec![(2, 3), (4, 5), (6, 7)]),
            qsp_tau_max: self.qsp_tau_max.unwrap_or(2.0),
            qsp_points: self.qsp_points.unwrap_or(201),
            output_dir: self.output_dir.clone(),
            emit_components: self.emit_components,
            max_channels_per_kind: self.max_channels_per_kind.unwrap_or(64),
        })
    }
}
