//! Equations of motion with radiation reaction: the integro-differential and
//! local Lorentz–Dirac forms, Landau–Lifshitz reduction of order, and
//! retarded/advanced N-body delay dynamics. Also energy ledgers and
//! asymptotic diagnostics.

mod integro;
mod local;
mod nbody;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingMode, Scenario};
use crate::error::{Error, Result};
use crate::lienard_wiechert::{lw_field, FieldTensor, LightConeBranch};
use crate::numeric::fit_line;
use crate::spacetime::{minkowski_dot, ExternalField, FourVector, Trajectory, Vec3, Worldline, WorldlineSample};

pub use integro::integrate_ld_integro;
pub use local::{integrate_landau_lifshitz, integrate_ld_local, integrate_ld_local_terminal, RunawayReport};
pub use nbody::{eom_residual, integrate_advanced_direct, integrate_advanced_nbody, integrate_retarded_nbody, EomResidual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LdIntegro,
    LdLocal,
    LandauLifshitz,
    NbodyRetarded,
    NbodyAdvanced,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LdIntegro => "ld-integro",
            Method::LdLocal => "ld-local",
            Method::LandauLifshitz => "landau-lifshitz",
            Method::NbodyRetarded => "nbody-retarded",
            Method::NbodyAdvanced => "nbody-advanced",
        }
    }

    pub fn is_nbody(self) -> bool {
        matches!(self, Method::NbodyRetarded | Method::NbodyAdvanced)
    }
}

/// Self-interaction model for N-body runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfForceModel {
    /// Reduction of order of the Lorentz–Dirac self force.
    #[default]
    LandauLifshitz,
    /// Point-split minus field on the stored history, evaluated two steps in
    /// the past so that both light-cone branches fall inside the history.
    MinusField,
    /// No self force.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Coordinate-time step; `None` selects `τ₀/50` for single-particle
    /// methods and `1/500` of the closest pair's orbital time for N-body runs.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    /// Kernel truncation of the integro form, in units of `τ₀`.
    #[serde(default = "default_future_horizon")]
    pub future_horizon: f64,
    #[serde(default = "default_waveform_iterations")]
    pub waveform_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub self_force: SelfForceModel,
    /// Smoothing width for step envelopes on RK4 paths; `None` selects `τ₀/10`.
    #[serde(default)]
    pub ramp: Option<f64>,
    /// Keep every n-th step in the trajectory record.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_future_horizon() -> f64 {
    30.0
}

fn default_waveform_iterations() -> usize {
    60
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_record_every() -> usize {
    1
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::LandauLifshitz,
            dt: None,
            t_start: 0.0,
            t_end: 1.0,
            future_horizon: default_future_horizon(),
            waveform_iterations: default_waveform_iterations(),
            tolerance: default_tolerance(),
            self_force: SelfForceModel::default(),
            ramp: None,
            record_every: default_record_every(),
        }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_end: f64) -> Self {
        IntegratorConfig { method, dt: Some(dt), t_end, ..IntegratorConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::domain(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::domain("t_end must exceed t_start"));
        }
        if !(self.future_horizon >= 20.0) {
            return Err(Error::domain(format!(
                "future_horizon must be at least 20 (kernel truncation e^-20 < 1e-8), got {}",
                self.future_horizon
            )));
        }
        if self.waveform_iterations < 1 {
            return Err(Error::domain("waveform_iterations must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        if let Some(r) = self.ramp {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain("ramp must be positive"));
            }
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        Ok(())
    }

    /// Step actually used for scenario `s`.
    pub fn effective_dt(&self, s: &Scenario) -> Result<f64> {
        if let Some(dt) = self.dt {
            return Ok(dt);
        }
        if self.method.is_nbody() {
            return Ok(orbital_time(s) / 500.0);
        }
        let t = s.particles.iter().map(|p| tau0(p.charge, p.mass)).collect::<Result<Vec<_>>>()?;
        let t0 = t.into_iter().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        if t0.is_finite() {
            Ok(t0 / 50.0)
        } else {
            Err(Error::usage("dt must be given when no particle has a finite radiation time"))
        }
    }
}

/// Characteristic orbital time of the closest pair.
fn orbital_time(s: &Scenario) -> f64 {
    let mut best = f64::INFINITY;
    for (j, a) in s.particles.iter().enumerate() {
        for b in &s.particles[j + 1..] {
            let r = (a.position - b.position).norm();
            let mu = a.mass * b.mass / (a.mass + b.mass);
            let vc = (a.charge * b.charge).abs() / (4.0 * PI * mu * r);
            let speed = vc.sqrt() + (a.velocity - b.velocity).norm();
            if speed > 0.0 {
                best = best.min(2.0 * PI * r / speed);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

/// Radiation time `τ₀ = e²/(6π m)`: `(2/3)e²/m` with the Heaviside–Lorentz `1/4π`.
pub fn tau0(charge: f64, mass: f64) -> Result<f64> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {mass}")));
    }
    Ok(charge * charge / (6.0 * PI * mass))
}

/// Radiated power `R = −e²(a·a)/(6π) ≥ 0` (Liénard's invariant Larmor power).
pub fn larmor_power(u: FourVector, a: FourVector, charge: f64) -> f64 {
    let _ = u;
    -charge * charge * minkowski_dot(a, a) / (6.0 * PI)
}

/// Applied four-force split by source.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub external: FourVector,
    pub interaction: FourVector,
    pub self_force: FourVector,
}

impl ForceBreakdown {
    pub fn total(&self) -> FourVector {
        self.external + self.interaction + self.self_force
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub t: f64,
    pub tau: f64,
    pub position: Vec3,
    pub velocity: FourVector,
    pub acceleration: FourVector,
    pub larmor: f64,
    pub force: ForceBreakdown,
}

impl RecordRow {
    pub fn speed(&self) -> f64 {
        self.velocity.spatial().norm() / self.velocity.t
    }

    pub fn proper_acceleration(&self) -> f64 {
        (-minkowski_dot(self.acceleration, self.acceleration)).max(0.0).sqrt()
    }

    pub fn kinetic_energy(&self, mass: f64) -> f64 {
        // γ − 1 = |u|²/(γ + 1) avoids cancellation at low speed.
        let u2 = self.velocity.spatial().norm_sq();
        mass * u2 / (self.velocity.t + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    pub charge: f64,
    pub mass: f64,
    pub rows: Vec<RecordRow>,
}

impl ParticleRecord {
    pub fn worldline(&self) -> Result<Worldline> {
        Worldline::from_samples(
            self.rows
                .iter()
                .map(|r| WorldlineSample {
                    tau: r.tau,
                    position: FourVector::from_parts(r.t, r.position),
                    velocity: r.velocity,
                    acceleration: r.acceleration,
                })
                .collect(),
        )
    }
}

/// Result of Picard (waveform) iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub method: Method,
    pub p: f64,
    pub particles: Vec<ParticleRecord>,
    #[serde(default)]
    pub runaway: Option<RunawayReport>,
    #[serde(default)]
    pub iteration: Option<IterationReport>,
}

impl TrajectoryRecord {
    pub fn duration(&self) -> f64 {
        self.particles
            .first()
            .and_then(|p| Some(p.rows.last()?.t - p.rows.first()?.t))
            .unwrap_or(0.0)
    }

    /// Image under `t → −t`: rows in reverse order with `t`, `τ`, `u⃗` and the
    /// time components of acceleration and forces negated. `p` is unchanged.
    pub fn time_reversed(&self) -> TrajectoryRecord {
        let flip = |v: FourVector| FourVector::from_parts(-v.t, v.spatial());
        self.map_rows(true, |r| RecordRow {
            t: -r.t,
            tau: -r.tau,
            position: r.position,
            velocity: FourVector::from_parts(r.velocity.t, -r.velocity.spatial()),
            acceleration: flip(r.acceleration),
            larmor: r.larmor,
            force: ForceBreakdown {
                external: flip(r.force.external),
                interaction: flip(r.force.interaction),
                self_force: flip(r.force.self_force),
            },
        })
    }

    /// Image under `x⃗ → −x⃗`.
    pub fn space_reflected(&self) -> TrajectoryRecord {
        let flip = |v: FourVector| FourVector::from_parts(v.t, -v.spatial());
        self.map_rows(false, |r| RecordRow {
            position: -r.position,
            velocity: flip(r.velocity),
            acceleration: flip(r.acceleration),
            force: ForceBreakdown {
                external: flip(r.force.external),
                interaction: flip(r.force.interaction),
                self_force: flip(r.force.self_force),
            },
            ..*r
        })
    }

    /// Image under `e → −e`: kinematics unchanged.
    pub fn charge_conjugated(&self) -> TrajectoryRecord {
        let mut out = self.clone();
        for p in &mut out.particles {
            p.charge = -p.charge;
        }
        out
    }

    fn map_rows(&self, reverse: bool, f: impl Fn(&RecordRow) -> RecordRow) -> TrajectoryRecord {
        let mut out = self.clone();
        for p in &mut out.particles {
            let mut rows: Vec<RecordRow> = p.rows.iter().map(&f).collect();
            if reverse {
                rows.reverse();
            }
            p.rows = rows;
        }
        out
    }

    pub fn worldlines(&self) -> Result<Vec<Worldline>> {
        self.particles.iter().map(|p| p.worldline()).collect()
    }

    /// Summed Larmor power against time.
    pub fn larmor_series(&self) -> Vec<(f64, f64)> {
        let Some(first) = self.particles.first() else { return Vec::new() };
        (0..first.rows.len())
            .map(|i| (first.rows[i].t, self.particles.iter().map(|p| p.rows.get(i).map_or(0.0, |r| r.larmor)).sum()))
            .collect()
    }

    /// Cumulative radiated energy `p ∫ Σ R dt` (trapezoidal).
    pub fn radiated_series(&self) -> Vec<(f64, f64)> {
        let l = self.larmor_series();
        let mut out = Vec::with_capacity(l.len());
        let mut acc = 0.0;
        for i in 0..l.len() {
            if i > 0 {
                acc += 0.5 * (l[i].1 + l[i - 1].1) * (l[i].0 - l[i - 1].0);
            }
            out.push((l[i].0, self.p * acc));
        }
        out
    }

    /// Total kinetic energy against time.
    pub fn kinetic_series(&self) -> Vec<(f64, f64)> {
        let Some(first) = self.particles.first() else { return Vec::new() };
        (0..first.rows.len())
            .map(|i| {
                let ke = self.particles.iter().map(|p| p.rows.get(i).map_or(0.0, |r| r.kinetic_energy(p.mass))).sum();
                (first.rows[i].t, ke)
            })
            .collect()
    }
}

/// Kinetic, radiated and Coulomb interaction energy at the endpoints of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial_kinetic: f64,
    pub final_kinetic: f64,
    pub radiated: f64,
    pub initial_potential: f64,
    pub final_potential: f64,
    /// `ΔKE + E_rad + ΔPE`.
    pub closure_residual: f64,
}

impl EnergyLedger {
    pub fn delta_kinetic(&self) -> f64 {
        self.final_kinetic - self.initial_kinetic
    }

    pub fn delta_potential(&self) -> f64 {
        self.final_potential - self.initial_potential
    }

    /// Closure residual relative to `|E_rad|`.
    pub fn relative_closure(&self) -> f64 {
        self.closure_residual.abs() / self.radiated.abs()
    }
}

fn coulomb_energy(parts: &[&ParticleRecord], idx: impl Fn(&ParticleRecord) -> Option<Vec3>) -> f64 {
    let mut pe = 0.0;
    for (j, a) in parts.iter().enumerate() {
        for b in &parts[j + 1..] {
            if let (Some(xa), Some(xb)) = (idx(a), idx(b)) {
                pe += a.charge * b.charge / (4.0 * PI * (xa - xb).norm());
            }
        }
    }
    pe
}

pub fn energy_ledger(tr: &TrajectoryRecord) -> EnergyLedger {
    let ke = tr.kinetic_series();
    let rad = tr.radiated_series();
    let parts: Vec<&ParticleRecord> = tr.particles.iter().collect();
    let initial_potential = coulomb_energy(&parts, |p| p.rows.first().map(|r| r.position));
    let final_potential = coulomb_energy(&parts, |p| p.rows.last().map(|r| r.position));
    let initial_kinetic = ke.first().map_or(0.0, |x| x.1);
    let final_kinetic = ke.last().map_or(0.0, |x| x.1);
    let radiated = rad.last().map_or(0.0, |x| x.1);
    EnergyLedger {
        initial_kinetic,
        final_kinetic,
        radiated,
        initial_potential,
        final_potential,
        closure_residual: (final_kinetic - initial_kinetic) + radiated + (final_potential - initial_potential),
    }
}

/// Relative tolerance of [`asymptotic_check`]: the trailing-window peak of
/// `|a|` must fall below this fraction of the run's overall peak.
pub const ASYMPTOTIC_REL_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub window: f64,
    pub max_accel_window: f64,
    pub max_accel_overall: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that the proper acceleration has died away over the trailing
/// `window` of coordinate time.
pub fn asymptotic_check(tr: &TrajectoryRecord, window: f64) -> Result<AsymptoticReport> {
    if !(window > 0.0) || tr.duration() <= window {
        return Err(Error::usage(format!(
            "asymptotic window {window} must be positive and shorter than the run ({})",
            tr.duration()
        )));
    }
    let mut overall: f64 = 0.0;
    let mut trailing: f64 = 0.0;
    for p in &tr.particles {
        let Some(end) = p.rows.last().map(|r| r.t) else { continue };
        for r in &p.rows {
            let a = r.proper_acceleration();
            let a = if a.is_finite() { a } else { f64::INFINITY };
            overall = overall.max(a);
            if r.t >= end - window {
                trailing = trailing.max(a);
            }
        }
    }
    let pass = trailing == 0.0 || trailing <= ASYMPTOTIC_REL_TOL * overall && trailing.is_finite();
    Ok(AsymptoticReport {
        window,
        max_accel_window: trailing,
        max_accel_overall: overall,
        tolerance: ASYMPTOTIC_REL_TOL,
        pass,
    })
}

/// Fitted exponential growth rate of `|a|` in proper time.
pub fn fit_growth_rate(rows: &[RecordRow]) -> Option<f64> {
    let (tau, ln_a): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| {
            let a = r.proper_acceleration();
            (a > 0.0 && a.is_finite()).then(|| (r.tau, a.ln()))
        })
        .unzip();
    fit_line(&tau, &ln_a).map(|f| f.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PointerBasisClassical,
    QuantumSuperposition,
    Intermediate,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::PointerBasisClassical => "pointer-basis classical",
            Regime::QuantumSuperposition => "quantum superposition",
            Regime::Intermediate => "intermediate",
        }
    }
}

/// Compares a correlation length with a wavelength (same units): a ratio
/// above 10 is classical, below 0.1 quantum.
pub fn classical_threshold(correlation_length: f64, wavelength: f64) -> Result<Regime> {
    if !(correlation_length > 0.0 && wavelength > 0.0 && correlation_length.is_finite() && wavelength.is_finite()) {
        return Err(Error::domain("correlation length and wavelength must be positive"));
    }
    let ratio = correlation_length / wavelength;
    Ok(if ratio > 10.0 {
        Regime::PointerBasisClassical
    } else if ratio < 0.1 {
        Regime::QuantumSuperposition
    } else {
        Regime::Intermediate
    })
}

/// Lorentz–Dirac kernel `K = e u_ν(Σ_{j≠k} F_ret⁽ʲ⁾ + F_ext)^{μν} − R u^μ`
/// along particle `k`'s current worldline at proper time `tau`.
pub fn ld_kernel(s: &Scenario, k: usize, tau: f64) -> Result<FourVector> {
    let pk = s
        .particles
        .get(k)
        .ok_or_else(|| Error::usage(format!("particle index {k} out of range")))?;
    let t = pk.path.coordinate_time_at(tau)?;
    let st = pk.path.state_at(t)?;
    let mut field = applied_field(s).field_at(st.position);
    for (j, pj) in s.particles.iter().enumerate() {
        if j != k {
            field += lw_field(&pj.path, pj.charge, st.position, LightConeBranch::Retarded)?;
        }
    }
    let r = larmor_power(st.velocity, st.acceleration, pk.charge);
    Ok(field.force(pk.charge, st.velocity) - st.velocity * r)
}

/// External field plus, for CED, the free radiation field.
pub(crate) struct Applied {
    fields: Vec<ExternalField>,
}

impl Applied {
    pub(crate) fn field_at(&self, x: FourVector) -> FieldTensor {
        self.fields.iter().fold(FieldTensor::ZERO, |acc, f| acc + f.field_at(x))
    }

    /// Field inside a step whose end is `seg_end`: at the end itself the
    /// left limit is used.
    pub(crate) fn field_in(&self, x: FourVector, seg_end: f64) -> FieldTensor {
        if x.t >= seg_end {
            self.fields.iter().fold(FieldTensor::ZERO, |acc, f| acc + f.field_left_at(x))
        } else {
            self.field_at(x)
        }
    }

    pub(crate) fn smoothed(&self, ramp: f64) -> Applied {
        Applied { fields: self.fields.iter().map(|f| f.smoothed(ramp)).collect() }
    }

    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        self.fields.iter().flat_map(|f| f.breakpoints()).collect()
    }
}

pub(crate) fn applied_field(s: &Scenario) -> Applied {
    let mut fields = vec![s.external.clone()];
    if s.topology.mode == CouplingMode::Ced && !s.topology.free_field.is_none() {
        fields.push(s.topology.free_field.clone());
    }
    Applied { fields }
}

/// Uniform grid on `[t0, t1]` with the given breakpoints inserted as nodes.
pub(crate) fn build_grid(t0: f64, t1: f64, dt: f64, breaks: &[f64]) -> Vec<f64> {
    let n = ((t1 - t0) / dt).ceil() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| (t0 + i as f64 * dt).min(t1)).collect();
    let mut b: Vec<f64> = breaks.iter().copied().filter(|t| *t > t0 && *t < t1).collect();
    b.sort_by(f64::total_cmp);
    g.retain(|t| b.iter().all(|bt| (t - bt).abs() > 1e-3 * dt));
    g.extend(b);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Projection of `v` orthogonal to the unit timelike `u`.
pub(crate) fn project_orthogonal(v: FourVector, u: FourVector) -> FourVector {
    v - u * minkowski_dot(v, u)
}

/// Runs the integrator selected by the scenario's configuration.
pub fn run_integrator(s: &Scenario) -> Result<TrajectoryRecord> {
    s.validate()?;
    match s.integrator.method {
        Method::LdIntegro => integrate_ld_integro(s),
        Method::LdLocal => integrate_ld_local(s),
        Method::LandauLifshitz => integrate_landau_lifshitz(s),
        Method::NbodyRetarded => integrate_retarded_nbody(s),
        Method::NbodyAdvanced => integrate_advanced_nbody(s),
    }
}

pub(crate) fn single_particle(s: &Scenario) -> Result<&crate::coupling::Particle> {
    if s.particles.len() != 1 {
        return Err(Error::usage(format!(
            "{} integrates a single charge in an applied field; scenario has {}",
            s.integrator.method.name(),
            s.particles.len()
        )));
    }
    Ok(&s.particles[0])
}
