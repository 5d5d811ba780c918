//! N-body delay dynamics under MC-CED coupling with `p = ±1`.
//!
//! `p = +1`: each charge feels the retarded fields of the others, the applied
//! field and its own radiation reaction; fixed-step RK4 over append-only
//! histories with an inertial past. `p = −1`: advanced fields of the others
//! and the opposite self force, obtained as the time-reversal image of a
//! retarded run, or directly by fixed-point sweeps backward in time over a
//! short window.

use serde::{Deserialize, Serialize};

use super::local::ll_self_force;
use super::{
    applied_field, build_grid, larmor_power, project_orthogonal, tau0, Applied, ForceBreakdown, IterationReport, Method,
    ParticleRecord, RecordRow, SelfForceModel, TrajectoryRecord,
};
use crate::coupling::{CouplingMode, Scenario};
use crate::error::{Error, Result};
use crate::lienard_wiechert::{lw_field, minus_field_on_worldline, FieldTensor, LightConeBranch, PointSplit};
use crate::spacetime::{FourVector, Trajectory, Vec3, Worldline, WorldlineSample};

struct Body {
    charge: f64,
    mass: f64,
    tau0: f64,
}

fn bodies(s: &Scenario) -> Result<Vec<Body>> {
    s.particles
        .iter()
        .map(|p| Ok(Body { charge: p.charge, mass: p.mass, tau0: tau0(p.charge, p.mass)? }))
        .collect()
}

fn check_nbody(s: &Scenario, p: f64) -> Result<()> {
    s.validate()?;
    if s.topology.mode != CouplingMode::McCed {
        return Err(Error::usage("N-body delay dynamics use the mc-ced coupling"));
    }
    if s.topology.p != p {
        return Err(Error::domain(format!(
            "{} needs p = {p:+}, scenario has p = {}",
            if p > 0.0 { "nbody-retarded" } else { "nbody-advanced" },
            s.topology.p
        )));
    }
    Ok(())
}

/// Applied field as seen by the N-body integrators: exact steps ramped.
fn nbody_applied(s: &Scenario, bs: &[Body], dt: f64) -> Applied {
    let t0 = bs.iter().map(|b| b.tau0).filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
    let ramp = s.integrator.ramp.unwrap_or(if t0.is_finite() { t0 / 10.0 } else { dt });
    applied_field(s).smoothed(ramp)
}

/// Delay-equation context: who sources the field and with which branch.
struct Dynamics<'a, W: Trajectory> {
    bodies: &'a [Body],
    paths: &'a [W],
    applied: &'a Applied,
    branch: LightConeBranch,
    /// `+1` for the retarded equations, `−1` for the advanced ones.
    self_sign: f64,
    self_model: SelfForceModel,
}

impl<W: Trajectory> Dynamics<'_, W> {
    fn others_field(&self, k: usize, x: FourVector) -> Result<FieldTensor> {
        let mut f = FieldTensor::ZERO;
        for (j, b) in self.bodies.iter().enumerate() {
            if j != k {
                f += lw_field(&self.paths[j], b.charge, x, self.branch)?;
            }
        }
        Ok(f)
    }

    fn forces(&self, k: usize, x: FourVector, u: FourVector, seg_end: f64, lagged_self: Option<FourVector>) -> Result<ForceBreakdown> {
        let b = &self.bodies[k];
        let f_int = self.others_field(k, x)?;
        let f_ext = self.applied.field_in(x, seg_end);
        let interaction = f_int.force(b.charge, u);
        let external = f_ext.force(b.charge, u);
        let self_force = match self.self_model {
            SelfForceModel::None => FourVector::ZERO,
            _ if b.tau0 == 0.0 => FourVector::ZERO,
            SelfForceModel::LandauLifshitz => {
                let field = |y: FourVector| -> Result<FieldTensor> { Ok(self.others_field(k, y)? + self.applied.field_at(y)) };
                ll_self_force(&field, f_int + f_ext, x, u, b.charge, b.mass, b.tau0)? * self.self_sign
            }
            SelfForceModel::MinusField => lagged_self.map_or(FourVector::ZERO, |f| project_orthogonal(f, u)),
        };
        Ok(ForceBreakdown { external, interaction, self_force })
    }
}

const STRIDE: usize = 7;

fn unpack(y: &[f64], k: usize) -> (Vec3, FourVector) {
    let o = k * STRIDE;
    (Vec3::new(y[o], y[o + 1], y[o + 2]), FourVector::velocity_from_spatial(Vec3::new(y[o + 3], y[o + 4], y[o + 5])))
}

fn rk4_vec(t: f64, h: f64, y: &[f64], f: &dyn Fn(f64, &[f64], f64) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let seg_end = t.max(t + h);
    let add = |a: &[f64], k: &[f64], c: f64| a.iter().zip(k).map(|(a, k)| a + c * k).collect::<Vec<f64>>();
    let k1 = f(t, y, seg_end)?;
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h), seg_end)?;
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h), seg_end)?;
    let k4 = f(t + h, &add(y, &k3, h), seg_end)?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

fn derivative<W: Trajectory>(dynm: &Dynamics<'_, W>, lagged: &[Option<FourVector>], t: f64, y: &[f64], seg_end: f64) -> Result<Vec<f64>> {
    let mut d = vec![0.0; y.len()];
    for (k, b) in dynm.bodies.iter().enumerate() {
        let (x, u) = unpack(y, k);
        let f = project_orthogonal(dynm.forces(k, FourVector::from_parts(t, x), u, seg_end, lagged[k])?.total(), u);
        let o = k * STRIDE;
        let v = u.spatial() / u.t;
        let du = f.spatial() / (b.mass * u.t);
        d[o..o + 3].copy_from_slice(&v.to_array());
        d[o + 3..o + 6].copy_from_slice(&du.to_array());
        d[o + 6] = 1.0 / u.t;
    }
    Ok(d)
}

fn make_row(t: f64, y: &[f64], k: usize, b: &Body, force: ForceBreakdown) -> RecordRow {
    let (x, u) = unpack(y, k);
    let a = project_orthogonal(force.total() / b.mass, u);
    RecordRow { t, tau: y[k * STRIDE + 6], position: x, velocity: u, acceleration: a, larmor: larmor_power(u, a, b.charge), force }
}

fn initial_vector(s: &Scenario, velocity_sign: f64) -> Result<Vec<f64>> {
    let mut y = Vec::with_capacity(s.particles.len() * STRIDE);
    for p in &s.particles {
        let u = FourVector::velocity_from_3velocity(p.velocity * velocity_sign)?;
        y.extend_from_slice(&p.position.to_array());
        y.extend_from_slice(&u.spatial().to_array());
        y.push(0.0);
    }
    Ok(y)
}

/// Lagged point-split self force, two steps behind the newest sample.
fn lagged_minus_force(model: SelfForceModel, hist: &[Worldline], bs: &[Body], t_now: f64, dt: f64) -> Result<Vec<Option<FourVector>>> {
    if model != SelfForceModel::MinusField {
        return Ok(vec![None; bs.len()]);
    }
    let t_eval = t_now - 2.0 * dt;
    hist.iter()
        .zip(bs)
        .map(|(w, b)| {
            if w.first_time().is_some_and(|t| t_eval - dt > t) {
                let st = w.state_at(t_eval)?;
                Ok(Some(minus_field_on_worldline(w, b.charge, t_eval, PointSplit::default())?.force(b.charge, st.velocity)))
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Retarded (`p = +1`) N-body run.
pub fn integrate_retarded_nbody(s: &Scenario) -> Result<TrajectoryRecord> {
    check_nbody(s, 1.0)?;
    retarded_run(s, 1.0)
}

fn retarded_run(s: &Scenario, velocity_sign: f64) -> Result<TrajectoryRecord> {
    let cfg = &s.integrator;
    let bs = bodies(s)?;
    let dt = cfg.effective_dt(s)?;
    let app = nbody_applied(s, &bs, dt);
    let grid = build_grid(cfg.t_start, cfg.t_end, dt, &app.breakpoints());
    let n = bs.len();
    let mut y = initial_vector(s, velocity_sign)?;
    let mut hist: Vec<Worldline> = vec![Worldline::new(); n];
    let mut rows: Vec<Vec<RecordRow>> = vec![Vec::new(); n];

    // Node forces use the history up to the previous node; retarded times of
    // separated charges lie before it.
    let record = |i: usize, y: &[f64], hist: &mut Vec<Worldline>, rows: &mut Vec<Vec<RecordRow>>| -> Result<()> {
        let t = grid[i];
        let seg_end = grid.get(i + 1).copied().unwrap_or(f64::INFINITY);
        let lagged = lagged_minus_force(cfg.self_force, hist, &bs, t, dt)?;
        let mut node_rows = Vec::with_capacity(n);
        {
            let seeded: Vec<Worldline>;
            let view: &[Worldline] = if hist.iter().any(|w| w.is_empty()) {
                seeded = (0..n)
                    .map(|k| {
                        let (x, u) = unpack(y, k);
                        Worldline::from_samples(vec![WorldlineSample {
                            tau: 0.0,
                            position: FourVector::from_parts(t, x),
                            velocity: u,
                            acceleration: FourVector::ZERO,
                        }])
                    })
                    .collect::<Result<_>>()?;
                &seeded
            } else {
                hist
            };
            let dynm = Dynamics { bodies: &bs, paths: view, applied: &app, branch: LightConeBranch::Retarded, self_sign: 1.0, self_model: cfg.self_force };
            for k in 0..n {
                let (x, u) = unpack(y, k);
                let f = dynm.forces(k, FourVector::from_parts(t, x), u, seg_end, lagged[k])?;
                node_rows.push(make_row(t, y, k, &bs[k], f));
            }
        }
        for (k, r) in node_rows.into_iter().enumerate() {
            hist[k].push(WorldlineSample { tau: r.tau, position: FourVector::from_parts(r.t, r.position), velocity: r.velocity, acceleration: r.acceleration })?;
            if i.is_multiple_of(cfg.record_every) || i + 1 == grid.len() {
                rows[k].push(r);
            }
        }
        Ok(())
    };

    record(0, &y, &mut hist, &mut rows)?;
    for i in 1..grid.len() {
        let lagged = lagged_minus_force(cfg.self_force, &hist, &bs, grid[i - 1], dt)?;
        let dynm = Dynamics { bodies: &bs, paths: &hist, applied: &app, branch: LightConeBranch::Retarded, self_sign: 1.0, self_model: cfg.self_force };
        let rhs = |t: f64, y: &[f64], seg_end: f64| derivative(&dynm, &lagged, t, y, seg_end);
        y = rk4_vec(grid[i - 1], grid[i] - grid[i - 1], &y, &rhs)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalLimit { estimates: vec![grid[i]] });
        }
        record(i, &y, &mut hist, &mut rows)?;
    }
    Ok(TrajectoryRecord {
        method: Method::NbodyRetarded,
        p: 1.0,
        particles: rows
            .into_iter()
            .zip(&bs)
            .map(|(rows, b)| ParticleRecord { charge: b.charge, mass: b.mass, rows })
            .collect(),
        runaway: None,
        iteration: None,
    })
}

/// Advanced (`p = −1`) N-body run as the time-reversal image of the
/// retarded run of the mirrored scenario: velocities reversed, applied field
/// time-reversed, `p → +1`. The given data are reached at `t = −t_start` and
/// the record spans `[−t_end, −t_start]`.
pub fn integrate_advanced_nbody(s: &Scenario) -> Result<TrajectoryRecord> {
    check_nbody(s, -1.0)?;
    let bs = bodies(s)?;
    let dt = s.integrator.effective_dt(s)?;
    let mut image = s.clone();
    image.topology.p = 1.0;
    image.integrator.method = Method::NbodyRetarded;
    image.integrator.dt = Some(dt);
    // Ramp first so the reversed envelope mirrors the ramp exactly.
    let ramp = {
        let t0 = bs.iter().map(|b| b.tau0).filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
        s.integrator.ramp.unwrap_or(if t0.is_finite() { t0 / 10.0 } else { dt })
    };
    image.external = s.external.smoothed(ramp).time_reversed();
    image.integrator.ramp = Some(ramp);
    let forward = retarded_run(&image, -1.0)?;
    let mut out = forward.time_reversed();
    out.p = -1.0;
    out.method = Method::NbodyAdvanced;
    Ok(out)
}

/// Direct advanced solver: Picard sweeps backward in time from the data at
/// `t = 0` over `[−window, 0]`, each sweep using the advanced fields of the
/// previous iterate. Meant for short windows.
pub fn integrate_advanced_direct(s: &Scenario, window: f64) -> Result<TrajectoryRecord> {
    check_nbody(s, -1.0)?;
    if !(window > 0.0) {
        return Err(Error::domain("window must be positive"));
    }
    let cfg = &s.integrator;
    let bs = bodies(s)?;
    let dt = cfg.effective_dt(s)?;
    let app = nbody_applied(s, &bs, dt);
    // Mirror of the forward grid, so nodes coincide with the image run's.
    let mirrored: Vec<f64> = app.breakpoints().iter().map(|t| -t).collect();
    let grid: Vec<f64> = build_grid(0.0, window, dt, &mirrored).into_iter().map(|t| -t).collect();
    let n = bs.len();
    let y0 = initial_vector(s, 1.0)?;
    let mut paths: Vec<Worldline> = (0..n)
        .map(|k| {
            let (x, u) = unpack(&y0, k);
            let at = |t: f64| WorldlineSample {
                tau: t / u.t,
                position: FourVector::from_parts(t, x + u.spatial() * (t / u.t)),
                velocity: u,
                acceleration: FourVector::ZERO,
            };
            Worldline::from_samples(vec![at(-window), at(0.0)])
        })
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    for sweep in 1..=cfg.waveform_iterations {
        let dynm = Dynamics { bodies: &bs, paths: &paths, applied: &app, branch: LightConeBranch::Advanced, self_sign: -1.0, self_model: SelfForceModel::LandauLifshitz };
        let none = vec![None; n];
        let rhs = |t: f64, y: &[f64], seg_end: f64| derivative(&dynm, &none, t, y, seg_end);
        let mut y = y0.clone();
        let mut rows: Vec<Vec<RecordRow>> = vec![Vec::with_capacity(grid.len()); n];
        for i in 0..grid.len() {
            if i > 0 {
                y = rk4_vec(grid[i - 1], grid[i] - grid[i - 1], &y, &rhs)?;
            }
            for k in 0..n {
                let (x, u) = unpack(&y, k);
                let f = dynm.forces(k, FourVector::from_parts(grid[i], x), u, f64::INFINITY, None)?;
                rows[k].push(make_row(grid[i], &y, k, &bs[k], f));
            }
        }
        for r in &mut rows {
            r.reverse();
        }
        let next: Vec<Worldline> = rows
            .iter()
            .map(|r| {
                Worldline::from_samples(
                    r.iter()
                        .map(|r| WorldlineSample { tau: r.tau, position: FourVector::from_parts(r.t, r.position), velocity: r.velocity, acceleration: r.acceleration })
                        .collect(),
                )
            })
            .collect::<Result<_>>()?;
        let mut residual: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in next.iter().zip(&paths) {
            for smp in a.samples() {
                let old = b.state_at(smp.position.t)?.position.spatial();
                residual = residual.max((smp.position.spatial() - old).max_abs());
                scale = scale.max(smp.position.spatial().max_abs());
            }
        }
        residuals.push(residual);
        paths = next;
        if residual <= cfg.tolerance * (1.0 + scale) {
            return Ok(TrajectoryRecord {
                method: Method::NbodyAdvanced,
                p: -1.0,
                particles: rows.into_iter().zip(&bs).map(|(rows, b)| ParticleRecord { charge: b.charge, mass: b.mass, rows }).collect(),
                runaway: None,
                iteration: Some(IterationReport { iterations: sweep, residuals }),
            });
        }
    }
    Err(Error::Convergence { iterations: cfg.waveform_iterations, residuals })
}

/// How well a record satisfies the delay equations of scenario `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EomResidual {
    /// Largest `|m a − f|` over particles and recorded nodes.
    pub max_abs: f64,
    /// Largest `|f|`.
    pub scale: f64,
    pub relative: f64,
}

/// Residual of the `p = ±1` N-body equations of `s` along the recorded
/// worldlines.
pub fn eom_residual(s: &Scenario, tr: &TrajectoryRecord) -> Result<EomResidual> {
    let p = s.topology.p;
    if p.abs() != 1.0 || s.topology.mode != CouplingMode::McCed {
        return Err(Error::domain("the delay-equation residual is defined for mc-ced with p = ±1"));
    }
    if tr.particles.len() != s.particles.len() {
        return Err(Error::usage("record and scenario have different particle counts"));
    }
    let bs = bodies(s)?;
    let dt = s.integrator.effective_dt(s)?;
    let app = nbody_applied(s, &bs, dt);
    let paths = tr.worldlines()?;
    let dynm = Dynamics {
        bodies: &bs,
        paths: &paths,
        applied: &app,
        branch: if p > 0.0 { LightConeBranch::Retarded } else { LightConeBranch::Advanced },
        self_sign: p,
        self_model: s.integrator.self_force,
    };
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (k, pr) in tr.particles.iter().enumerate() {
        for r in &pr.rows {
            let f = project_orthogonal(dynm.forces(k, FourVector::from_parts(r.t, r.position), r.velocity, f64::INFINITY, None)?.total(), r.velocity);
            max_abs = max_abs.max((r.acceleration * pr.mass - f).max_abs());
            scale = scale.max(f.max_abs());
        }
    }
    Ok(EomResidual { max_abs, scale, relative: if scale > 0.0 { max_abs / scale } else { max_abs } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{CouplingTopology, Particle};
    use crate::dynamics::IntegratorConfig;
    use std::f64::consts::PI;

    fn pair(p: f64, m: f64, t_end: f64) -> Scenario {
        Scenario::new(
            "pair",
            vec![
                Particle::new(1.0, m, Vec3::new(-0.5, 0.0, 0.0), Vec3::ZERO),
                Particle::new(1.0, m, Vec3::new(0.5, 0.0, 0.0), Vec3::ZERO),
            ],
            CouplingTopology::mc_ced(p),
        )
        .with_integrator(IntegratorConfig::new(if p > 0.0 { Method::NbodyRetarded } else { Method::NbodyAdvanced }, 0.01, t_end))
    }

    #[test]
    fn heavy_pair_starts_with_coulomb_repulsion() {
        let r = integrate_retarded_nbody(&pair(1.0, 100.0, 0.1)).unwrap();
        let a0 = r.particles[1].rows[0].acceleration;
        let expect = 1.0 / (4.0 * PI * 100.0);
        assert!((a0.x - expect).abs() < 1e-12 * expect.max(1.0), "{a0:?}");
        assert!(r.particles[0].rows[0].acceleration.x < 0.0);
    }

    #[test]
    fn wrong_arrow_is_rejected() {
        assert!(integrate_retarded_nbody(&pair(-1.0, 1.0, 0.1)).is_err());
        assert!(integrate_advanced_nbody(&pair(1.0, 1.0, 0.1)).is_err());
    }

    #[test]
    fn advanced_run_ends_on_given_data() {
        let s = pair(-1.0, 100.0, 0.5);
        let r = integrate_advanced_nbody(&s).unwrap();
        let last = r.particles[0].rows.last().unwrap();
        assert_eq!(last.t, 0.0);
        assert!((last.position - Vec3::new(-0.5, 0.0, 0.0)).max_abs() < 1e-15);
        assert!(r.particles[0].rows[0].t < -0.49);
    }
}
