//! Executes an experiment into an output directory: trajectory CSV, ledger,
//! suite reports and a manifest with content hashes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::checks::algebra_checks;
use super::config::{Check, ClosureScale, Experiment, ExperimentKind, Trend};
use crate::coupling::{CouplingMode, CouplingTopology};
use crate::dynamics::{
    asymptotic_check, energy_ledger, eom_residual, run_integrator, tau0, AsymptoticReport, EnergyLedger, IterationReport,
    RunawayReport, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use crate::spacetime::FourVector;
use crate::symmetry::{measure_parity, parity_table, tt_arrow_deviation};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const LEDGER_FILE: &str = "ledger.json";
pub const PARITY_FILE: &str = "parity.txt";
pub const ALGEBRA_FILE: &str = "algebra.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const TRAJECTORY_COLUMNS: [&str; 12] = ["t", "particle", "x", "y", "z", "ux", "uy", "uz", "ax", "ay", "az", "larmor"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    /// Data rows, excluding any header.
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunError {
    pub code: String,
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for RunError {
    fn from(e: &Error) -> Self {
        RunError { code: e.code().to_string(), exit_code: e.exit_code(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    /// SHA-256 of the resolved configuration as JSON.
    pub content_hash: String,
    pub artifact_version: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub config: Experiment,
    pub outputs: Vec<OutputFile>,
    pub checks: Vec<CheckOutcome>,
    pub error: Option<RunError>,
}

impl RunManifest {
    pub fn success(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    /// 0 on success, the error's code on failure, 1 when only checks failed.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some(e) => e.exit_code,
            None if self.checks.iter().all(|c| c.pass) => 0,
            None => 1,
        }
    }
}

/// Diagnostics written next to a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub method: String,
    pub p: f64,
    pub energy: EnergyLedger,
    pub asymptotic: Vec<AsymptoticReport>,
    pub runaway: Option<RunawayReport>,
    pub iteration: Option<IterationReport>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &FsPath, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    fn put(&mut self, name: &str, text: String, rows: usize) -> Result<()> {
        write_atomic(&self.dir.join(name), text.as_bytes())?;
        self.files.push(OutputFile { name: name.to_string(), rows, sha256: sha256_hex(text.as_bytes()) });
        Ok(())
    }
}

pub fn trajectory_csv(tr: &TrajectoryRecord) -> (String, usize) {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    let n = tr.particles.iter().map(|p| p.rows.len()).max().unwrap_or(0);
    let mut rows = 0;
    for i in 0..n {
        for (k, p) in tr.particles.iter().enumerate() {
            let Some(r) = p.rows.get(i) else { continue };
            let vals = [
                r.position.x,
                r.position.y,
                r.position.z,
                r.velocity.x,
                r.velocity.y,
                r.velocity.z,
                r.acceleration.x,
                r.acceleration.y,
                r.acceleration.z,
                r.larmor,
            ];
            let _ = write!(out, "{},{}", fmt_f64(r.t), k);
            for v in vals {
                let _ = write!(out, ",{}", fmt_f64(v));
            }
            out.push('\n');
            rows += 1;
        }
    }
    (out, rows)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Runs the experiment into `out_dir`. Failures of the physics are recorded
/// in the manifest rather than returned; only I/O and setup errors are `Err`.
pub fn run(exp: &Experiment, out_dir: &FsPath, seed: u64) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    let started = now_ms();
    let mut outs = Outputs { dir: out_dir.to_path_buf(), files: Vec::new() };
    let mut checks = Vec::new();
    let result = match exp.kind {
        ExperimentKind::Trajectory => run_trajectory(exp, &mut outs, &mut checks),
        ExperimentKind::SymmetrySuite => run_symmetry(exp, &mut outs, &mut checks),
        ExperimentKind::AlgebraSuite => run_algebra(exp, seed, &mut outs, &mut checks),
    };
    let error = match result {
        Ok(()) => None,
        Err(e @ Error::Io(_)) => return Err(e),
        Err(e) => Some(RunError::from(&e)),
    };
    let manifest = RunManifest {
        scenario: exp.name.clone(),
        content_hash: sha256_hex(serde_json::to_string(exp)?.as_bytes()),
        artifact_version: ARTIFACT_VERSION.to_string(),
        seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        config: exp.clone(),
        outputs: outs.files,
        checks,
        error,
    };
    write_atomic(&out_dir.join(MANIFEST_FILE), to_json(&manifest)?.as_bytes())?;
    Ok(manifest)
}

fn scenario_of(exp: &Experiment) -> Result<&crate::coupling::Scenario> {
    exp.scenario.as_ref().ok_or_else(|| Error::usage(format!("experiment {} has no scenario", exp.name)))
}

fn run_trajectory(exp: &Experiment, outs: &mut Outputs, checks: &mut Vec<CheckOutcome>) -> Result<()> {
    let s = scenario_of(exp)?;
    let tr = run_integrator(s)?;
    let (csv, rows) = trajectory_csv(&tr);
    outs.put(TRAJECTORY_FILE, csv, rows)?;
    let energy = energy_ledger(&tr);
    let mut asymptotic = Vec::new();
    for c in &exp.output.checks {
        let outcome = evaluate_check(c, exp, &tr, &energy)?;
        if let Check::Asymptotic { window, .. } = c {
            asymptotic.push(asymptotic_check(&tr, *window)?);
        }
        checks.push(outcome);
    }
    let ledger = Ledger {
        method: tr.method.name().to_string(),
        p: tr.p,
        energy,
        asymptotic,
        runaway: tr.runaway,
        iteration: tr.iteration.clone(),
    };
    outs.put(LEDGER_FILE, to_json(&ledger)?, 1)
}

fn mean_separation(tr: &TrajectoryRecord, range: std::ops::Range<usize>) -> f64 {
    let (a, b) = (&tr.particles[0].rows, &tr.particles[1].rows);
    let n = range.len().max(1);
    range.map(|i| (a[i].position - b[i].position).norm()).sum::<f64>() / n as f64
}

fn evaluate_check(c: &Check, exp: &Experiment, tr: &TrajectoryRecord, energy: &EnergyLedger) -> Result<CheckOutcome> {
    let s = scenario_of(exp)?;
    Ok(match c {
        Check::LedgerClosure { max, scale } => {
            let denom = match scale {
                ClosureScale::Radiated => energy.radiated.abs(),
                ClosureScale::Kinetic => energy.delta_kinetic().abs(),
            };
            let rel = energy.closure_residual.abs() / denom;
            CheckOutcome::new("ledger-closure", rel <= *max, format!("relative closure {} (max {})", fmt_f64(rel), fmt_f64(*max)))
        }
        Check::KineticLoss => {
            let d = energy.delta_kinetic();
            CheckOutcome::new("kinetic-loss", d < 0.0, format!("ΔKE {}", fmt_f64(d)))
        }
        Check::KineticGain => {
            let d = energy.delta_kinetic();
            CheckOutcome::new("kinetic-gain", d > 0.0, format!("ΔKE {}", fmt_f64(d)))
        }
        Check::Asymptotic { window, expect } => {
            let r = asymptotic_check(tr, *window)?;
            CheckOutcome::new(
                "asymptotic",
                r.pass == *expect,
                format!(
                    "trailing max|a| {} overall {} pass {} (expected {})",
                    fmt_f64(r.max_accel_window),
                    fmt_f64(r.max_accel_overall),
                    r.pass,
                    expect
                ),
            )
        }
        Check::Runaway { tol } => match &tr.runaway {
            Some(r) => CheckOutcome::new(
                "runaway",
                r.detected && (r.rate_times_tau0 - 1.0).abs() <= *tol,
                format!("rate·τ₀ {} detected {}", fmt_f64(r.rate_times_tau0), r.detected),
            ),
            None => CheckOutcome::new("runaway", false, "no runaway report (not a local run)"),
        },
        Check::Preacceleration { switch_on, amplitude, tol } => {
            let t0 = tau0(s.particles[0].charge, s.particles[0].mass)?;
            let mut worst: f64 = 0.0;
            let mut n = 0;
            for r in tr.particles[0].rows.iter().filter(|r| r.t >= switch_on - 5.0 * t0 && r.t < *switch_on) {
                let expect = amplitude * ((r.t - switch_on) / t0).exp();
                worst = worst.max((r.acceleration.x - expect).abs() / expect.abs());
                n += 1;
            }
            CheckOutcome::new("preacceleration", n > 0 && worst <= *tol, format!("max relative error {} over {n} nodes", fmt_f64(worst)))
        }
        Check::ProperAcceleration { after, value, tol } => {
            let worst = tr.particles[0]
                .rows
                .iter()
                .filter(|r| r.t >= *after)
                .map(|r| (r.proper_acceleration() - value).abs() / value.abs())
                .fold(0.0, f64::max);
            CheckOutcome::new("proper-acceleration", worst <= *tol, format!("max relative error {}", fmt_f64(worst)))
        }
        Check::Separation { trend } => {
            if tr.particles.len() < 2 {
                return Err(Error::usage("separation check needs two particles"));
            }
            let n = tr.particles[0].rows.len().min(tr.particles[1].rows.len());
            let k = (n / 10).max(1);
            let (first, last) = (mean_separation(tr, 0..k), mean_separation(tr, n - k..n));
            let pass = match trend {
                Trend::Increasing => last > first,
                Trend::Decreasing => last < first,
            };
            CheckOutcome::new("separation", pass, format!("mean separation first tenth {} last tenth {}", fmt_f64(first), fmt_f64(last)))
        }
        Check::EomResidual { max } => {
            let r = eom_residual(s, tr)?;
            CheckOutcome::new("eom-residual", r.relative <= *max, format!("relative residual {} (max {})", fmt_f64(r.relative), fmt_f64(*max)))
        }
        Check::Parity { .. } | Check::CedArrowReversal { .. } => {
            return Err(Error::usage("parity checks belong to a symmetry-suite experiment"));
        }
    })
}

fn probe_of(exp: &Experiment) -> FourVector {
    exp.output.probe.unwrap_or(FourVector::new(0.3, 2.0, -1.5, 0.5))
}

fn run_symmetry(exp: &Experiment, outs: &mut Outputs, checks: &mut Vec<CheckOutcome>) -> Result<()> {
    let s = scenario_of(exp)?;
    let (k, x) = (exp.output.observer, probe_of(exp));
    let table = parity_table(s, k, x)?;
    let mut text = String::from("op quantity parity even_residual odd_residual\n");
    for m in &table {
        let _ = writeln!(
            text,
            "{} {} {} {} {}",
            m.op.name(),
            m.quantity.name(),
            m.parity.label(),
            fmt_f64(m.even_residual),
            fmt_f64(m.odd_residual)
        );
    }
    outs.put(PARITY_FILE, text, table.len())?;
    for c in &exp.output.checks {
        checks.push(match c {
            Check::Parity { op, quantity, expect } => {
                let m = measure_parity(*op, *quantity, s, k, x)?;
                CheckOutcome::new(
                    format!("parity {} {}", quantity.name(), op.name()),
                    m.parity == *expect,
                    format!("measured {} expected {}", m.parity.label(), expect.label()),
                )
            }
            Check::CedArrowReversal { quantity, tol } => {
                let mut ced = s.clone();
                ced.topology = CouplingTopology { mode: CouplingMode::Ced, ..ced.topology.clone() };
                let d = tt_arrow_deviation(*quantity, &ced, k, x)?;
                CheckOutcome::new(format!("ced {} Tt reverses p", quantity.name()), d <= *tol, format!("deviation {}", fmt_f64(d)))
            }
            _ => return Err(Error::usage("a symmetry-suite experiment takes only parity checks")),
        });
    }
    Ok(())
}

fn run_algebra(exp: &Experiment, seed: u64, outs: &mut Outputs, checks: &mut Vec<CheckOutcome>) -> Result<()> {
    let spec = exp.algebra.clone().unwrap_or_default();
    let results = algebra_checks(&spec, seed)?;
    let mut text = String::from("check pass detail\n");
    for c in &results {
        let _ = writeln!(text, "{} {} {}", c.name.replace(' ', "_"), c.pass, c.detail);
    }
    outs.put(ALGEBRA_FILE, text, results.len())?;
    checks.extend(results);
    Ok(())
}
