//! Integro-differential Lorentz–Dirac form
//! `m a(τ) = ∫₀^∞ K(τ + ατ₀) e^{−α} dα`, solved by waveform iteration on a
//! coordinate-time grid that contains every switch time of the applied field.
//!
//! Each sweep evaluates `M(τ) = ∫ K e^{−α}` on the previous iterate by a
//! backward exponential recursion and re-integrates the orbit with
//! `m a = K(current state) + (M − K)(previous iterate)`, so only the small
//! radiation-reaction correction lags one sweep behind.

use super::local::{landau_lifshitz_rows, put3, rk4, v3};
use super::{
    applied_field, build_grid, larmor_power, project_orthogonal, single_particle, tau0, Applied, ForceBreakdown,
    IterationReport, Method, ParticleRecord, RecordRow, TrajectoryRecord,
};
use crate::coupling::Scenario;
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;
use crate::spacetime::{FourVector, Vec3};

/// Consecutive residual increases after which the iteration is declared divergent.
const MAX_NON_MONOTONE: usize = 3;

const SEGMENT_QUADRATURE: usize = 8;

/// Grid with smooth pieces separated by switch nodes.
struct Pieces {
    grid: Vec<f64>,
    /// First and last node of the piece containing segment `i`.
    piece: Vec<(usize, usize)>,
}

impl Pieces {
    fn new(grid: Vec<f64>, breaks: &[f64]) -> Self {
        let n = grid.len();
        let is_break: Vec<bool> = grid.iter().enumerate().map(|(i, t)| i == 0 || i + 1 == n || breaks.contains(t)).collect();
        let mut piece = Vec::with_capacity(n.saturating_sub(1));
        let mut start = 0;
        for i in 0..n.saturating_sub(1) {
            if is_break[i] {
                start = i;
            }
            let end = (i + 1..n).find(|&j| is_break[j]).unwrap_or(n - 1);
            piece.push((start, end));
        }
        Pieces { grid, piece }
    }

    fn len(&self) -> usize {
        self.grid.len()
    }

    /// Up to four interpolation nodes for segment `i`, inside its piece.
    fn stencil(&self, i: usize) -> (usize, usize) {
        let (ps, pe) = self.piece[i];
        if pe - ps < 3 {
            return (ps, pe);
        }
        let lo = (i.saturating_sub(1)).clamp(ps, pe - 3);
        (lo, lo + 3)
    }

    /// Cubic Lagrange interpolation of nodal values on segment `i`; the
    /// piece's last node contributes its left limit.
    fn interpolate(&self, i: usize, t: f64, left: &[FourVector], right: &[FourVector]) -> FourVector {
        let (lo, hi) = self.stencil(i);
        let (_, pe) = self.piece[i];
        let mut acc = FourVector::ZERO;
        for j in lo..=hi {
            let mut w = 1.0;
            for m in lo..=hi {
                if m != j {
                    w *= (t - self.grid[m]) / (self.grid[j] - self.grid[m]);
                }
            }
            let v = if j == pe { left[j] } else { right[j] };
            acc += v * w;
        }
        acc
    }
}

struct Iterate {
    x: Vec<Vec3>,
    u: Vec<FourVector>,
    a: Vec<FourVector>,
}

fn hermite_tau(s: f64, h: f64, t0: f64, f0: f64, t1: f64, f1: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let v = t0 * (2.0 * s3 - 3.0 * s2 + 1.0) + h * f0 * (s3 - 2.0 * s2 + s) + t1 * (-2.0 * s3 + 3.0 * s2) + h * f1 * (s3 - s2);
    let d = (t0 * (6.0 * s2 - 6.0 * s) + h * f0 * (3.0 * s2 - 4.0 * s + 1.0) + t1 * (-6.0 * s2 + 6.0 * s) + h * f1 * (3.0 * s2 - 2.0 * s)) / h;
    (v, d)
}

/// Proper time at the nodes: trapezoid with the endpoint-derivative correction.
fn proper_times(g: &[f64], it: &Iterate) -> (Vec<f64>, Vec<f64>) {
    let f: Vec<f64> = it.u.iter().map(|u| 1.0 / u.t).collect();
    let df: Vec<f64> = it.u.iter().zip(&it.a).map(|(u, a)| -u.spatial().dot(a.spatial()) / u.t.powi(4)).collect();
    let mut tau = vec![0.0; g.len()];
    for i in 1..g.len() {
        let h = g[i] - g[i - 1];
        tau[i] = tau[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
    }
    (tau, f)
}

pub fn integrate_ld_integro(s: &Scenario) -> Result<TrajectoryRecord> {
    s.validate()?;
    let p = single_particle(s)?;
    let cfg = &s.integrator;
    let t0 = tau0(p.charge, p.mass)?;
    if t0 <= 0.0 {
        return Err(Error::domain("the integro-differential form needs a charged particle (τ₀ > 0)"));
    }
    let (e, m) = (p.charge, p.mass);
    let dt = cfg.effective_dt(s)?;
    let app = applied_field(s);
    let breaks = app.breakpoints();
    let smooth = app.smoothed(cfg.ramp.unwrap_or(t0 / 10.0));
    let u_init = FourVector::velocity_from_3velocity(p.velocity)?;

    // Landau–Lifshitz initial guess, extended past t_end by the kernel horizon.
    let probe = build_grid(cfg.t_start, cfg.t_end, dt, &breaks);
    let gamma_end = landau_lifshitz_rows(&smooth, e, m, &probe, p.position, u_init.spatial(), usize::MAX)?
        .last()
        .map_or(1.0, |r| r.velocity.t);
    let t_ext = cfg.t_end + cfg.future_horizon * t0 * gamma_end * 1.05;
    let mut piece_breaks = breaks.clone();
    piece_breaks.push(cfg.t_end);
    let pieces = Pieces::new(build_grid(cfg.t_start, t_ext, dt, &piece_breaks), &piece_breaks);
    let n = pieces.len();
    let g = pieces.grid.clone();
    let n_main = g.partition_point(|t| *t <= cfg.t_end);
    let guess = landau_lifshitz_rows(&smooth, e, m, &g, p.position, u_init.spatial(), 1)?;
    let mut it = Iterate {
        x: guess.iter().map(|r| r.position).collect(),
        u: guess.iter().map(|r| r.velocity).collect(),
        a: guess.iter().map(|r| r.acceleration).collect(),
    };

    let (gl_x, gl_w) = gauss_legendre(SEGMENT_QUADRATURE);
    let mut residuals: Vec<f64> = Vec::new();
    let mut increases = 0;
    for sweep in 1..=cfg.waveform_iterations {
        let (tau, f) = proper_times(&g, &it);
        let kernel = |i: usize, seg_end: f64| -> FourVector {
            let x = FourVector::from_parts(g[i], it.x[i]);
            app.field_in(x, seg_end).force(e, it.u[i]) - it.u[i] * larmor_power(it.u[i], it.a[i], e)
        };
        let k_right: Vec<FourVector> = (0..n).map(|i| kernel(i, f64::INFINITY)).collect();
        let k_left: Vec<FourVector> = (0..n).map(|i| kernel(i, g[i])).collect();

        // Backward recursion M_i = e^{−Δτ/τ₀} M_{i+1} + ∫ segment.
        let mut big_m = vec![FourVector::ZERO; n];
        for i in (0..n - 1).rev() {
            let h = g[i + 1] - g[i];
            let mut seg = FourVector::ZERO;
            for (xq, wq) in gl_x.iter().zip(&gl_w) {
                let sq = 0.5 * (xq + 1.0);
                let tq = g[i] + h * sq;
                let (tau_q, dtau_q) = hermite_tau(sq, h, tau[i], f[i], tau[i + 1], f[i + 1]);
                let k = pieces.interpolate(i, tq, &k_left, &k_right);
                seg += k * (0.5 * h * wq * (-(tau_q - tau[i]) / t0).exp() * dtau_q / t0);
            }
            big_m[i] = big_m[i + 1] * (-(tau[i + 1] - tau[i]) / t0).exp() + seg;
        }
        let c_right: Vec<FourVector> = (0..n).map(|i| big_m[i] - k_right[i]).collect();
        let c_left: Vec<FourVector> = (0..n).map(|i| big_m[i] - k_left[i]).collect();

        let accel = |seg: usize, t: f64, x: Vec3, u: FourVector, seg_end: f64| -> FourVector {
            let k = app.field_in(FourVector::from_parts(t, x), seg_end).force(e, u);
            let c = pieces.interpolate(seg, t, &c_left, &c_right);
            project_orthogonal((k + c) / m, u)
        };

        let mut next = Iterate { x: Vec::with_capacity(n), u: Vec::with_capacity(n), a: Vec::with_capacity(n) };
        let mut y = [0.0; 6];
        put3(&mut y, 0, p.position);
        put3(&mut y, 3, u_init.spatial());
        for i in 0..n {
            if i > 0 {
                let seg = i - 1;
                let rhs = |t: f64, y: &[f64; 6], seg_end: f64| -> Result<[f64; 6]> {
                    let u = FourVector::velocity_from_spatial(v3(y, 3));
                    let a = accel(seg, t, v3(y, 0), u, seg_end);
                    let mut d = [0.0; 6];
                    put3(&mut d, 0, u.spatial() / u.t);
                    put3(&mut d, 3, a.spatial() / u.t);
                    Ok(d)
                };
                y = rk4(g[i - 1], g[i] - g[i - 1], &y, &rhs)?;
                if !y.iter().all(|v| v.is_finite()) {
                    return Err(Error::NumericalLimit { estimates: vec![g[i]] });
                }
            }
            let u = FourVector::velocity_from_spatial(v3(&y, 3));
            let (seg, seg_end) = if i + 1 < n { (i, g[i + 1]) } else { (i - 1, g[i]) };
            next.x.push(v3(&y, 0));
            next.u.push(u);
            next.a.push(accel(seg, g[i], v3(&y, 0), u, seg_end));
        }

        let scale = next.x[..n_main].iter().fold(0.0f64, |acc, x| acc.max(x.max_abs()));
        let residual = next.x[..n_main]
            .iter()
            .zip(&it.x[..n_main])
            .fold(0.0f64, |acc, (a, b)| acc.max((*a - *b).max_abs()));
        if let Some(&prev) = residuals.last() {
            increases = if residual > prev { increases + 1 } else { 0 };
        }
        residuals.push(residual);
        it = next;
        if residual <= cfg.tolerance * (1.0 + scale) {
            let (tau, _) = proper_times(&g, &it);
            return Ok(finish(s, &app, &g, n_main, &it, &tau, IterationReport { iterations: sweep, residuals }));
        }
        if increases >= MAX_NON_MONOTONE || !residual.is_finite() {
            return Err(Error::Convergence { iterations: sweep, residuals });
        }
    }
    Err(Error::Convergence { iterations: cfg.waveform_iterations, residuals })
}

fn finish(s: &Scenario, app: &Applied, g: &[f64], n_main: usize, it: &Iterate, tau: &[f64], report: IterationReport) -> TrajectoryRecord {
    let p = &s.particles[0];
    let every = s.integrator.record_every;
    let rows: Vec<RecordRow> = (0..n_main)
        .filter(|&i| i % every == 0 || i + 1 == n_main)
        .map(|i| {
            let external = app.field_at(FourVector::from_parts(g[i], it.x[i])).force(p.charge, it.u[i]);
            let force = ForceBreakdown {
                external,
                interaction: FourVector::ZERO,
                self_force: it.a[i] * p.mass - external,
            };
            RecordRow {
                t: g[i],
                tau: tau[i],
                position: it.x[i],
                velocity: it.u[i],
                acceleration: it.a[i],
                larmor: larmor_power(it.u[i], it.a[i], p.charge),
                force,
            }
        })
        .collect();
    TrajectoryRecord {
        method: Method::LdIntegro,
        p: s.topology.p,
        particles: vec![ParticleRecord { charge: p.charge, mass: p.mass, rows }],
        runaway: None,
        iteration: Some(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{CouplingTopology, Particle};
    use crate::dynamics::IntegratorConfig;
    use crate::spacetime::{Envelope, ExternalField};

    fn scenario(external: ExternalField, t_end: f64) -> Scenario {
        let t0 = tau0(1.0, 1.0).unwrap();
        Scenario::new("one", vec![Particle::new(1.0, 1.0, Vec3::ZERO, Vec3::ZERO)], CouplingTopology::ced(1.0, ExternalField::None))
            .with_external(external)
            .with_integrator(IntegratorConfig::new(Method::LdIntegro, t0 / 50.0, t_end))
    }

    #[test]
    fn free_particle_has_zero_acceleration() {
        let r = integrate_ld_integro(&scenario(ExternalField::None, 1.0)).unwrap();
        assert!(r.particles[0].rows.iter().all(|r| r.acceleration.max_abs() == 0.0));
    }

    #[test]
    fn no_acceleration_after_force_ends() {
        let t0 = tau0(1.0, 1.0).unwrap();
        let env = Envelope { switch_on: None, switch_off: Some(0.5), ramp: 0.0 };
        let s = scenario(ExternalField::UniformElectric { field: Vec3::new(1e-3, 0.0, 0.0), envelope: env }, 0.5 + 10.0 * t0);
        let r = integrate_ld_integro(&s).unwrap();
        for row in r.particles[0].rows.iter().filter(|r| r.t >= 0.5) {
            assert!(row.proper_acceleration() < 1e-15, "{} {}", row.t, row.proper_acceleration());
        }
    }

    #[test]
    fn stencil_stays_inside_piece() {
        let grid = build_grid(0.0, 1.0, 0.1, &[0.35]);
        let pieces = Pieces::new(grid.clone(), &[0.35]);
        for i in 0..grid.len() - 1 {
            let (lo, hi) = pieces.stencil(i);
            let (ps, pe) = pieces.piece[i];
            assert!(lo >= ps && hi <= pe && lo <= i && hi > i);
        }
    }
}
