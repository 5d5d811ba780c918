//! Single-charge integrators in coordinate time: the third-order local
//! Lorentz–Dirac system (forward, or backward from a terminal state) and the
//! Landau–Lifshitz reduction of order.

use serde::{Deserialize, Serialize};

use super::{
    applied_field, build_grid, fit_growth_rate, larmor_power, project_orthogonal, single_particle, tau0, Applied,
    ForceBreakdown, Method, ParticleRecord, RecordRow, TrajectoryRecord,
};
use crate::coupling::Scenario;
use crate::error::{Error, Result};
use crate::lienard_wiechert::FieldTensor;
use crate::spacetime::{minkowski_dot, FourVector, State, Vec3};

/// Step of the central difference for field derivatives along `u`.
pub(crate) const LL_FD_STEP: f64 = 1e-5;

/// Magnitude beyond which a runaway is truncated.
const OVERFLOW: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunawayReport {
    /// Fitted growth rate of `ln|a|` in proper time.
    pub fitted_rate: f64,
    pub tau0: f64,
    /// `fitted_rate · τ₀`; close to 1 for a free runaway.
    pub rate_times_tau0: f64,
    pub detected: bool,
    /// Coordinate time at which the run was cut short by overflow.
    pub truncated_at: Option<f64>,
}

/// Classic RK4 step; `seg_end` is the later end of the step, where step
/// envelopes are read as left limits.
pub(crate) fn rk4<const N: usize>(
    t: f64,
    h: f64,
    y: &[f64; N],
    f: &dyn Fn(f64, &[f64; N], f64) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let seg_end = t.max(t + h);
    let add = |a: &[f64; N], k: &[f64; N], c: f64| {
        let mut o = *a;
        for i in 0..N {
            o[i] += c * k[i];
        }
        o
    };
    let k1 = f(t, y, seg_end)?;
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h), seg_end)?;
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h), seg_end)?;
    let k4 = f(t + h, &add(y, &k3, h), seg_end)?;
    let mut o = *y;
    for i in 0..N {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(o)
}

pub(crate) fn v3(y: &[f64], i: usize) -> Vec3 {
    Vec3::new(y[i], y[i + 1], y[i + 2])
}

pub(crate) fn put3(y: &mut [f64], i: usize, v: Vec3) {
    y[i] = v.x;
    y[i + 1] = v.y;
    y[i + 2] = v.z;
}

/// Landau–Lifshitz self force `τ₀(dF/dτ + (F·F)u/m)` for the applied force
/// `F = e F^{μν}u_ν`, with `dF/dτ` from a central difference of the field
/// along `u` plus `e F^{μν}(F/m)_ν`.
pub(crate) fn ll_self_force(
    field: &dyn Fn(FourVector) -> Result<FieldTensor>,
    f0: FieldTensor,
    x: FourVector,
    u: FourVector,
    charge: f64,
    mass: f64,
    tau0: f64,
) -> Result<FourVector> {
    let force = f0.force(charge, u);
    let h = LL_FD_STEP;
    let df = (field(x + u * h)? - field(x - u * h)?) * (0.5 / h);
    let fdot = df.force(charge, u) + f0.force(charge, force / mass);
    let s = (fdot + u * (minkowski_dot(force, force) / mass)) * tau0;
    Ok(project_orthogonal(s, u))
}

fn row(t: f64, tau: f64, x: Vec3, u: FourVector, a: FourVector, charge: f64, force: ForceBreakdown) -> RecordRow {
    RecordRow { t, tau, position: x, velocity: u, acceleration: a, larmor: larmor_power(u, a, charge), force }
}

fn ramp_for(s: &Scenario, t0: f64) -> f64 {
    s.integrator.ramp.unwrap_or(t0 / 10.0)
}

/// Landau–Lifshitz integration of one charge in the applied field.
pub fn integrate_landau_lifshitz(s: &Scenario) -> Result<TrajectoryRecord> {
    s.validate()?;
    let p = single_particle(s)?;
    let cfg = &s.integrator;
    let dt = cfg.effective_dt(s)?;
    let t0 = tau0(p.charge, p.mass)?;
    let app = applied_field(s);
    let app = if t0 > 0.0 { app.smoothed(ramp_for(s, t0)) } else { app };
    let grid = build_grid(cfg.t_start, cfg.t_end, dt, &app.breakpoints());
    let u0 = FourVector::velocity_from_3velocity(p.velocity)?;
    let rows = landau_lifshitz_rows(&app, p.charge, p.mass, &grid, p.position, u0.spatial(), cfg.record_every)?;
    Ok(TrajectoryRecord {
        method: Method::LandauLifshitz,
        p: s.topology.p,
        particles: vec![ParticleRecord { charge: p.charge, mass: p.mass, rows }],
        runaway: None,
        iteration: None,
    })
}

pub(crate) fn ll_forces(app: &Applied, x: FourVector, u: FourVector, charge: f64, mass: f64, seg_end: f64) -> Result<ForceBreakdown> {
    let t0 = tau0(charge, mass)?;
    let f0 = app.field_in(x, seg_end);
    let external = f0.force(charge, u);
    let self_force = if t0 > 0.0 {
        ll_self_force(&|y| Ok(app.field_at(y)), f0, x, u, charge, mass, t0)?
    } else {
        FourVector::ZERO
    };
    Ok(ForceBreakdown { external, interaction: FourVector::ZERO, self_force })
}

/// LL rows on a given grid starting from `(x0, u⃗0)` at `grid[0]`.
pub(crate) fn landau_lifshitz_rows(
    app: &Applied,
    charge: f64,
    mass: f64,
    grid: &[f64],
    x0: Vec3,
    u0: Vec3,
    record_every: usize,
) -> Result<Vec<RecordRow>> {
    let rhs = |t: f64, y: &[f64; 7], seg_end: f64| -> Result<[f64; 7]> {
        let u = FourVector::velocity_from_spatial(v3(y, 3));
        let x = FourVector::from_parts(t, v3(y, 0));
        let f = ll_forces(app, x, u, charge, mass, seg_end)?.total();
        let mut d = [0.0; 7];
        put3(&mut d, 0, u.spatial() / u.t);
        put3(&mut d, 3, f.spatial() / (mass * u.t));
        d[6] = 1.0 / u.t;
        Ok(d)
    };
    let mut y = [0.0; 7];
    put3(&mut y, 0, x0);
    put3(&mut y, 3, u0);
    let mut rows = Vec::with_capacity(grid.len() / record_every + 2);
    let make = |t: f64, y: &[f64; 7], seg_end: f64| -> Result<RecordRow> {
        let u = FourVector::velocity_from_spatial(v3(y, 3));
        let x = v3(y, 0);
        let f = ll_forces(app, FourVector::from_parts(t, x), u, charge, mass, seg_end)?;
        let a = project_orthogonal(f.total() / mass, u);
        Ok(row(t, y[6], x, u, a, charge, f))
    };
    for i in 0..grid.len() {
        if i > 0 {
            y = rk4(grid[i - 1], grid[i] - grid[i - 1], &y, &rhs)?;
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalLimit { estimates: vec![grid[i]] });
        }
        if i % record_every == 0 || i + 1 == grid.len() {
            let seg_end = grid.get(i + 1).copied().unwrap_or(f64::INFINITY);
            rows.push(make(grid[i], &y, seg_end)?);
        }
    }
    Ok(rows)
}

/// Local Lorentz–Dirac right-hand side in coordinate time for the state
/// `(r⃗, u⃗, a⃗, τ)`: `da/dτ = (a − F/m)/τ₀ − (a·a)u`.
fn ld_local_rhs(
    app: &Applied,
    charge: f64,
    mass: f64,
    t0: f64,
) -> impl Fn(f64, &[f64; 10], f64) -> Result<[f64; 10]> + '_ {
    move |t, y, seg_end| {
        let (u, a) = ld_state(y);
        let f = app.field_in(FourVector::from_parts(t, v3(y, 0)), seg_end).force(charge, u);
        let adot = (a - f / mass) / t0 - u * minkowski_dot(a, a);
        let mut d = [0.0; 10];
        put3(&mut d, 0, u.spatial() / u.t);
        put3(&mut d, 3, a.spatial() / u.t);
        put3(&mut d, 6, adot.spatial() / u.t);
        d[9] = 1.0 / u.t;
        Ok(d)
    }
}

fn ld_state(y: &[f64; 10]) -> (FourVector, FourVector) {
    let u = FourVector::velocity_from_spatial(v3(y, 3));
    let av = v3(y, 6);
    // u·a = 0 fixes the time component.
    let a = FourVector::from_parts(u.spatial().dot(av) / u.t, av);
    (u, a)
}

fn ld_row(app: &Applied, t: f64, y: &[f64; 10], charge: f64, mass: f64, seg_end: f64) -> RecordRow {
    let (u, a) = ld_state(y);
    let x = v3(y, 0);
    let external = app.field_in(FourVector::from_parts(t, x), seg_end).force(charge, u);
    let force = ForceBreakdown { external, interaction: FourVector::ZERO, self_force: a * mass - external };
    row(t, y[9], x, u, a, charge, force)
}

fn overflowed(y: &[f64; 10]) -> bool {
    !y.iter().all(|v| v.is_finite() && v.abs() < OVERFLOW)
}

/// Forward integration of the local third-order form from the initial
/// position, velocity and acceleration. Runaways are fitted and, on
/// overflow, truncated.
pub fn integrate_ld_local(s: &Scenario) -> Result<TrajectoryRecord> {
    s.validate()?;
    let p = single_particle(s)?;
    let cfg = &s.integrator;
    let t0 = tau0(p.charge, p.mass)?;
    if t0 <= 0.0 {
        return Err(Error::domain("the local third-order form needs a charged particle (τ₀ > 0)"));
    }
    let dt = cfg.effective_dt(s)?;
    let app = applied_field(s);
    let grid = build_grid(cfg.t_start, cfg.t_end, dt, &app.breakpoints());
    let st = State::from_coordinate(cfg.t_start, p.position, p.velocity, p.acceleration)?;
    let mut y = [0.0; 10];
    put3(&mut y, 0, p.position);
    put3(&mut y, 3, st.velocity.spatial());
    put3(&mut y, 6, project_orthogonal(st.acceleration, st.velocity).spatial());
    let rhs = ld_local_rhs(&app, p.charge, p.mass, t0);
    let mut rows = Vec::new();
    let mut truncated_at = None;
    for i in 0..grid.len() {
        if i > 0 {
            let next = rk4(grid[i - 1], grid[i] - grid[i - 1], &y, &rhs)?;
            if overflowed(&next) {
                truncated_at = Some(grid[i]);
                break;
            }
            y = next;
        }
        if i % cfg.record_every == 0 || i + 1 == grid.len() {
            let seg_end = grid.get(i + 1).copied().unwrap_or(f64::INFINITY);
            rows.push(ld_row(&app, grid[i], &y, p.charge, p.mass, seg_end));
        }
    }
    let runaway = fit_growth_rate(&rows).map(|rate| RunawayReport {
        fitted_rate: rate,
        tau0: t0,
        rate_times_tau0: rate * t0,
        detected: rate * t0 > 0.5,
        truncated_at,
    });
    Ok(TrajectoryRecord {
        method: Method::LdLocal,
        p: s.topology.p,
        particles: vec![ParticleRecord { charge: p.charge, mass: p.mass, rows }],
        runaway,
        iteration: None,
    })
}

/// Backward integration of the local form from a terminal state at
/// `t_end`. Backward in time the runaway mode decays, so this recovers the
/// physical (preaccelerating) solution.
pub fn integrate_ld_local_terminal(s: &Scenario, terminal: &State) -> Result<TrajectoryRecord> {
    s.validate()?;
    let p = single_particle(s)?;
    let cfg = &s.integrator;
    let t0 = tau0(p.charge, p.mass)?;
    if t0 <= 0.0 {
        return Err(Error::domain("the local third-order form needs a charged particle (τ₀ > 0)"));
    }
    let dt = cfg.effective_dt(s)?;
    let app = applied_field(s);
    let mut grid = build_grid(cfg.t_start, terminal.time(), dt, &app.breakpoints());
    grid.reverse();
    let mut y = [0.0; 10];
    put3(&mut y, 0, terminal.position.spatial());
    put3(&mut y, 3, terminal.velocity.spatial());
    put3(&mut y, 6, project_orthogonal(terminal.acceleration, terminal.velocity).spatial());
    let rhs = ld_local_rhs(&app, p.charge, p.mass, t0);
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        if i > 0 {
            y = rk4(grid[i - 1], grid[i] - grid[i - 1], &y, &rhs)?;
            if overflowed(&y) {
                return Err(Error::NumericalLimit { estimates: vec![grid[i]] });
            }
        }
        // Right-continuous reading at nodes, as in the forward direction.
        let seg_end = if i > 0 { f64::INFINITY } else { grid[0] };
        rows.push(ld_row(&app, grid[i], &y, p.charge, p.mass, seg_end));
    }
    rows.reverse();
    let shift = rows[0].tau;
    for r in &mut rows {
        r.tau -= shift;
    }
    Ok(TrajectoryRecord {
        method: Method::LdLocal,
        p: s.topology.p,
        particles: vec![ParticleRecord { charge: p.charge, mass: p.mass, rows }],
        runaway: None,
        iteration: None,
    })
}
