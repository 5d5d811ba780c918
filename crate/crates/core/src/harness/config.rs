//! Scenario files: one TOML document per experiment with sections
//! `scenario`, `particles`, `topology`, `external`, `integrator`, `output`
//! and, for the algebra suite, `algebra`.

use std::ops::Range;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::coupling::{CouplingMode, CouplingTopology, Particle, Scenario};
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::spacetime::{ExternalField, FourVector, Path, Vec3};
use crate::symmetry::{Parity, Quantity, SymmetryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Trajectory,
    SymmetrySuite,
    AlgebraSuite,
}

/// Pass/fail assertion evaluated on a finished trajectory run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Check {
    /// `|ΔKE + E_rad + ΔPE|` relative to `|E_rad|` or `|ΔKE|`.
    LedgerClosure {
        max: f64,
        #[serde(default)]
        scale: ClosureScale,
    },
    KineticLoss,
    KineticGain,
    /// Trailing-window acceleration test, expected to pass or fail.
    Asymptotic { window: f64, expect: bool },
    /// Local runaway detected with `rate·τ₀` within `tol` of 1.
    Runaway { tol: f64 },
    /// Acceleration along x on `[t₁ − 5τ₀, t₁)` follows `amplitude·e^{(t−t₁)/τ₀}`.
    Preacceleration { switch_on: f64, amplitude: f64, tol: f64 },
    /// Proper acceleration after time `after` equals `value` within `tol` relative.
    ProperAcceleration { after: f64, value: f64, tol: f64 },
    /// Mean separation of the first two particles over the last tenth of the
    /// run versus the first tenth.
    Separation { trend: Trend },
    /// Relative residual of the recorded worldlines in the run's own equations.
    EomResidual { max: f64 },
    /// Measured parity of a field quantity at the probe point.
    Parity { op: SymmetryOp, quantity: Quantity, expect: Parity },
    /// With the topology switched to CED, `T_t` acts on the quantity as `p → −p`.
    CedArrowReversal { quantity: Quantity, tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureScale {
    #[default]
    Radiated,
    Kinetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Observer index and spacetime point of the symmetry suite.
    #[serde(default)]
    pub observer: usize,
    #[serde(default)]
    pub probe: Option<FourVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default = "default_colors")]
    pub colors: Vec<u32>,
    #[serde(default = "default_max_photons")]
    pub max_photons: usize,
    /// Random polynomial triples for the Jacobi identity.
    #[serde(default = "default_random_triples")]
    pub random_triples: usize,
    /// Extra script lines in the expression format.
    #[serde(default)]
    pub script: String,
}

fn default_colors() -> Vec<u32> {
    vec![2, 3, 4, 5, 6]
}

fn default_max_photons() -> usize {
    3
}

fn default_random_triples() -> usize {
    200
}

impl Default for AlgebraSpec {
    fn default() -> Self {
        AlgebraSpec {
            colors: default_colors(),
            max_photons: default_max_photons(),
            random_triples: default_random_triples(),
            script: String::new(),
        }
    }
}

/// Fully resolved experiment, as recorded in the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub description: String,
    pub scenario: Option<Scenario>,
    pub output: OutputSpec,
    pub algebra: Option<AlgebraSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    name: String,
    #[serde(default)]
    kind: ExperimentKind,
    #[serde(default)]
    description: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleSpec {
    charge: f64,
    mass: f64,
    #[serde(default)]
    position: Vec3,
    #[serde(default)]
    velocity: Vec3,
    #[serde(default)]
    acceleration: Vec3,
    /// Prescribed source worldline; absent means inertial from the initial data.
    #[serde(default)]
    path: Option<Path>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario: Spanned<Header>,
    #[serde(default)]
    particles: Vec<Spanned<ParticleSpec>>,
    topology: Option<Spanned<CouplingTopology>>,
    external: Option<Spanned<ExternalField>>,
    integrator: Option<Spanned<IntegratorConfig>>,
    #[serde(default)]
    output: Option<Spanned<OutputSpec>>,
    algebra: Option<Spanned<AlgebraSpec>>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
    path: Option<PathBuf>,
}

impl Ctx<'_> {
    fn err(&self, span: Option<Range<usize>>, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line: span.map(|s| line_of(self.src, s.start)), message: message.into() }
    }

    fn check(&self, span: Range<usize>, r: Result<()>) -> Result<()> {
        self.lift(span, r)
    }

    fn lift<T>(&self, span: Range<usize>, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Domain(m) | Error::Usage(m) => self.err(Some(span), m),
            other => other,
        })
    }
}

/// Parses and validates a scenario document; `path` only labels errors.
pub fn parse_scenario_str(src: &str, path: Option<&FsPath>) -> Result<Experiment> {
    let cx = Ctx { src, path: path.map(FsPath::to_path_buf) };
    let file: ScenarioFile = toml::from_str(src).map_err(|e| cx.err(e.span(), e.message().to_string()))?;
    let header_span = file.scenario.span();
    let header = file.scenario.into_inner();
    if header.name.trim().is_empty() {
        return Err(cx.err(Some(header_span), "scenario name must not be empty"));
    }
    let output = file.output.map(Spanned::into_inner).unwrap_or_default();
    if header.kind == ExperimentKind::AlgebraSuite {
        if !file.particles.is_empty() || file.topology.is_some() || file.integrator.is_some() {
            return Err(cx.err(Some(header_span), "the algebra suite takes only [scenario], [algebra] and [output] sections"));
        }
        let algebra = file.algebra.map(Spanned::into_inner).unwrap_or_default();
        if algebra.colors.iter().any(|n| *n < 2) {
            return Err(cx.err(Some(header_span), "the color algebra needs N ≥ 2"));
        }
        return Ok(Experiment { name: header.name, kind: header.kind, description: header.description, scenario: None, output, algebra: Some(algebra) });
    }
    if let Some(a) = &file.algebra {
        return Err(cx.err(Some(a.span()), "[algebra] is only valid for kind = \"algebra-suite\""));
    }
    let topology = file.topology.ok_or_else(|| cx.err(Some(header_span.clone()), "missing [topology] section"))?;
    let topo_span = topology.span();
    let topology = topology.into_inner();
    cx.check(topo_span.clone(), topology.validate())?;

    let mut particles = Vec::with_capacity(file.particles.len());
    for sp in file.particles {
        let span = sp.span();
        let p = sp.into_inner();
        let particle = match p.path {
            Some(path) => cx.lift(span.clone(), Particle::on_path(p.charge, p.mass, path))?,
            None => Particle { acceleration: p.acceleration, ..Particle::new(p.charge, p.mass, p.position, p.velocity) },
        };
        cx.check(span, particle.validate())?;
        particles.push(particle);
    }
    if topology.mode == CouplingMode::McCed && particles.len() < 2 {
        return Err(cx.err(Some(topo_span), format!("mc-ced requires N ≥ 2 charges, got {}", particles.len())));
    }
    if particles.is_empty() {
        return Err(cx.err(Some(header_span), "scenario has no particles"));
    }
    let mut scenario = Scenario::new(header.name.clone(), particles, topology);
    if let Some(ext) = file.external {
        let span = ext.span();
        scenario.external = ext.into_inner();
        cx.check(span, scenario.external.validate())?;
    }
    if let Some(int) = file.integrator {
        let span = int.span();
        scenario.integrator = int.into_inner();
        cx.check(span, scenario.integrator.validate())?;
    } else if header.kind == ExperimentKind::Trajectory {
        return Err(cx.err(Some(header_span), "missing [integrator] section"));
    }
    cx.check(header_span, scenario.validate())?;
    Ok(Experiment { name: header.name, kind: header.kind, description: header.description, scenario: Some(scenario), output, algebra: None })
}

pub fn parse_scenario(path: &FsPath) -> Result<Experiment> {
    let src = std::fs::read_to_string(path)?;
    parse_scenario_str(&src, Some(path))
}
