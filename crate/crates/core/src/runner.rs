//! Executes a method matrix and writes its data files.
//!
//! Layout of `output_dir`:
//! - `<method>_greens.csv`, `<method>_spectrum.csv`, `<method>_qpfit.json`
//! - `components/<method>/` with one overlap trajectory per channel, spectra
//!   of the reference and dominant channels, and `manifest.json`
//! - `qsp_errors.json` when both `qsp` and `exact` run
//! - `report.json`

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::cc::{solve_ccsd, solve_lambda, CcsdSolution, LambdaSolution};
use crate::config::{Method, Settings};
use crate::error::{Error, Result};
use crate::greens::{GreensTrajectory, TimeGrid};
use crate::hamiltonian::{partition_reference, Hamiltonian};
use crate::oracle::CoreHoleLehmann;
use crate::overlap::{channel_greens, overlap_trajectory, write_channel_csv, ChannelKind, ComponentOptions};
use crate::qsp::{error_report, BlockEncoding, QspConfig, QspErrorReport, QspProblem};
use crate::rteom::{cumulant_greens, propagate, AnsatzKind, CoreCoupling};
use crate::spectra::{find_peaks, fit_qp_weight, fourier_spectrum, QpFit, SpectralFunction, HARTREE_TO_EV};

/// Relative height below which local maxima are not reported as peaks.
pub const PEAK_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport {
    pub omega_hartree: f64,
    pub omega_ev: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qp: Option<QpFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qp_omega_ev: Option<f64>,
    pub peaks: Vec<PeakReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_integral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_error: Option<f64>,
}

impl MethodReport {
    fn failed(method: &str, err: &Error) -> Self {
        Self {
            method: method.to_string(),
            ok: false,
            error: Some(err.to_string()),
            qp: None,
            qp_omega_ev: None,
            peaks: Vec::new(),
            spectrum_integral: None,
            completeness_error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QspSummary {
    pub encoding: BlockEncoding,
    pub tau_max: f64,
    pub errors: Vec<QspErrorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub n_spin_orbitals: usize,
    pub n_electrons: usize,
    pub core_index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccsd_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fci_energy: Option<f64>,
    pub methods: Vec<MethodReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qsp: Option<QspSummary>,
}

impl RunReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == name)
    }

    pub fn n_failed(&self) -> usize {
        self.methods.iter().filter(|m| !m.ok).count()
    }
}

struct Ground {
    cc: CcsdSolution,
    lambda: LambdaSolution,
    coupling: CoreCoupling,
}

fn ground_state(h: &Hamiltonian, core: usize) -> Result<Ground> {
    let part = partition_reference(h, core)?;
    let cc = solve_ccsd(h, &part)?;
    let lambda = solve_lambda(h, &part, &cc.t)?;
    let coupling = CoreCoupling::new(&part, &cc.t)?;
    Ok(Ground { cc, lambda, coupling })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_greens(path: &Path, g: &GreensTrajectory) -> Result<()> {
    let mut w = create(path)?;
    g.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_spectrum(path: &Path, a: &SpectralFunction) -> Result<()> {
    let mut w = create(path)?;
    a.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Peaks and fit of a spectrum file, as recorded in the report.
pub fn summarize_spectrum(a: &SpectralFunction) -> Result<(QpFit, Vec<PeakReport>, f64)> {
    let fit = fit_qp_weight(a)?;
    let peaks = find_peaks(a, PEAK_THRESHOLD)
        .into_iter()
        .map(|p| PeakReport { omega_hartree: p.omega, omega_ev: p.omega * HARTREE_TO_EV, height: p.height })
        .collect();
    Ok((fit, peaks, a.integral()))
}

/// Writes the trajectory, spectrum and fit of one method and summarizes the
/// spectrum as read back from disk.
fn emit(settings: &Settings, name: &str, g: &GreensTrajectory) -> Result<MethodReport> {
    let dir = &settings.output_dir;
    write_greens(&dir.join(format!("{name}_greens.csv")), g)?;
    let a = fourier_spectrum(g, settings.eta, &settings.omega_grid)?;
    let spectrum_path = dir.join(format!("{name}_spectrum.csv"));
    write_spectrum(&spectrum_path, &a)?;
    let back = SpectralFunction::read_csv(BufReader::new(File::open(&spectrum_path)?), settings.eta)?;
    let (fit, peaks, integral) = summarize_spectrum(&back)?;
    write_json(&dir.join(format!("{name}_qpfit.json")), &fit)?;
    Ok(MethodReport {
        method: name.to_string(),
        ok: true,
        error: None,
        qp: Some(fit),
        qp_omega_ev: Some(fit.omega0 * HARTREE_TO_EV),
        peaks,
        spectrum_integral: Some(integral),
        completeness_error: None,
    })
}

#[derive(Serialize)]
struct ManifestEntry {
    label: String,
    kind: &'static str,
    indices: Vec<usize>,
    remainder: bool,
    peak_modulus: f64,
    overlap: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<String>,
}

#[derive(Serialize)]
struct Manifest {
    method: String,
    completeness_error: f64,
    channels: Vec<ManifestEntry>,
}

fn run_ansatz(settings: &Settings, h: &Hamiltonian, ground: &Ground, kind: AnsatzKind) -> Result<MethodReport> {
    let prop = propagate(kind, h, &ground.coupling, ground.cc.energy, &settings.propagation())?;
    let opts = ComponentOptions { max_channels_per_kind: settings.max_channels_per_kind };
    let decomp = overlap_trajectory(&prop, &ground.coupling, &ground.cc.t, &ground.lambda.lambda, &opts)?;
    let g = cumulant_greens(&prop, ground.cc.energy, Some(&decomp.total))?;
    let mut report = emit(settings, kind.name(), &g)?;
    let completeness = decomp.completeness_error();
    if !decomp.channels.is_empty() {
        report.completeness_error = Some(completeness);
    }
    if settings.emit_components && !decomp.channels.is_empty() {
        let dir = settings.output_dir.join("components").join(kind.name());
        fs::create_dir_all(&dir)?;
        let with_spectrum: Vec<String> = [ChannelKind::DirectSingle, ChannelKind::DirectDouble, ChannelKind::HmSingle, ChannelKind::HmDouble]
            .into_iter()
            .filter_map(|k| decomp.dominant(k).map(|(l, _)| l.slug()))
            .chain(std::iter::once(ChannelKind::Reference.name().to_string()))
            .collect();
        let channels = channel_greens(&decomp, &prop, ground.cc.energy)?;
        let mut entries = Vec::with_capacity(channels.len());
        for ((label, cg), (_, o)) in channels.iter().zip(&decomp.channels) {
            let slug = label.slug();
            let file = format!("{slug}.csv");
            let mut w = create(&dir.join(&file))?;
            write_channel_csv(&mut w, &decomp.grid, o)?;
            w.flush()?;
            let spectrum = if with_spectrum.contains(&slug) {
                let name = format!("{slug}_spectrum.csv");
                write_spectrum(&dir.join(&name), &fourier_spectrum(cg, settings.eta, &settings.omega_grid)?)?;
                Some(name)
            } else {
                None
            };
            entries.push(ManifestEntry {
                label: label.to_string(),
                kind: label.kind.name(),
                indices: label.indices.clone(),
                remainder: label.is_remainder(),
                peak_modulus: o.iter().map(|z| z.norm()).fold(0.0, f64::max),
                overlap: file,
                spectrum,
            });
        }
        write_json(&dir.join("manifest.json"), &Manifest { method: kind.name().into(), completeness_error: completeness, channels: entries })?;
    }
    Ok(report)
}

/// Grid of `points` samples over `alpha t` in `[0, tau_max]`.
pub fn qsp_grid(encoding: &BlockEncoding, tau_max: f64, points: usize) -> Result<TimeGrid> {
    TimeGrid::new(tau_max / encoding.alpha / (points - 1) as f64, points)
}

fn qsp_name(d: (usize, usize)) -> String {
    format!("qsp_d{}_{}", d.0, d.1)
}

fn run_qsp(settings: &Settings, exact: &CoreHoleLehmann) -> Result<(Vec<MethodReport>, QspSummary)> {
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let mut encoding = None;
    let exact_traj = |grid| exact.trajectory(grid);
    for &d in &settings.qsp_degrees {
        let cfg = QspConfig::new(d.0, d.1);
        let problem = QspProblem::from_lehmann(exact, &cfg)?;
        let grid = qsp_grid(&problem.encoding, settings.qsp_tau_max, settings.qsp_points)?;
        let g = problem.trajectory(grid, &cfg);
        let name = qsp_name(d);
        reports.push(emit(settings, &name, &g)?);
        errors.push(error_report(&g, &exact_traj(grid), &cfg, settings.eta, &settings.omega_grid)?);
        encoding = Some(problem.encoding);
    }
    let encoding = encoding.ok_or_else(|| Error::Config("no QSP degrees".into()))?;
    Ok((reports, QspSummary { encoding, tau_max: settings.qsp_tau_max, errors }))
}

enum Outcome {
    Single(MethodReport),
    Qsp(Vec<MethodReport>, Option<QspSummary>),
}

/// Runs every requested method. Failures of individual methods are recorded
/// in the report; only setup and I/O of the shared outputs are fatal.
pub fn run(settings: &Settings) -> Result<RunReport> {
    fs::create_dir_all(&settings.output_dir)?;
    let h = settings.load_hamiltonian()?;
    let needs_ground = settings.methods.iter().any(|m| matches!(m, Method::Ansatz(_)));
    let needs_exact = settings.methods.iter().any(|m| matches!(m, Method::Exact | Method::Qsp));
    let ground = needs_ground.then(|| ground_state(&h, settings.core_index));
    let exact = needs_exact.then(|| CoreHoleLehmann::compute(&h, settings.core_index));
    if let Some(Err(e)) = &ground {
        warn!("ground state failed: {e}");
    }
    let outcomes: Vec<Outcome> = settings
        .methods
        .par_iter()
        .map(|&method| {
            info!("running {method}");
            let single = |r: Result<MethodReport>| {
                Outcome::Single(r.unwrap_or_else(|e| {
                    let e = e.tagged(method.name());
                    warn!("{e}");
                    MethodReport::failed(method.name(), &e)
                }))
            };
            match method {
                Method::Ansatz(kind) => single(match ground.as_ref().expect("ground state requested") {
                    Ok(g) => run_ansatz(settings, &h, g, kind),
                    Err(e) => Err(Error::Config(e.to_string())),
                }),
                Method::Exact => single(match exact.as_ref().expect("exact requested") {
                    Ok(x) => TimeGrid::span(settings.dt, settings.t_max).and_then(|grid| emit(settings, "exact", &x.trajectory(grid))),
                    Err(e) => Err(Error::Config(e.to_string())),
                }),
                Method::Qsp => match exact.as_ref().expect("exact requested").as_ref().map_err(|e| Error::Config(e.to_string())).and_then(|x| run_qsp(settings, x)) {
                    Ok((reports, summary)) => Outcome::Qsp(reports, Some(summary)),
                    Err(e) => {
                        let e = e.tagged("qsp");
                        warn!("{e}");
                        Outcome::Qsp(vec![MethodReport::failed("qsp", &e)], None)
                    }
                },
            }
        })
        .collect();

    let mut methods = Vec::new();
    let mut qsp = None;
    for o in outcomes {
        match o {
            Outcome::Single(r) => methods.push(r),
            Outcome::Qsp(r, s) => {
                methods.extend(r);
                qsp = s;
            }
        }
    }
    let exact_ran = settings.methods.contains(&Method::Exact);
    if let (Some(summary), true) = (&qsp, exact_ran) {
        write_json(&settings.output_dir.join("qsp_errors.json"), &summary.errors)?;
    }
    let report = RunReport {
        n_spin_orbitals: h.n_spin_orbitals(),
        n_electrons: h.n_electrons(),
        core_index: settings.core_index,
        ccsd_energy: ground.and_then(|g| g.ok()).map(|g| g.cc.energy),
        fci_energy: exact.and_then(|x| x.ok()).map(|x| x.ground_energy),
        methods,
        qsp,
    };
    write_json(&settings.output_dir.join("report.json"), &report)?;
    Ok(report)
}

/// Files written by [`run`] for a method name.
pub fn method_files(dir: &Path, name: &str) -> [PathBuf; 3] {
    ["greens.csv", "spectrum.csv", "qpfit.json"].map(|s| dir.join(format!("{name}_{s}")))
}
