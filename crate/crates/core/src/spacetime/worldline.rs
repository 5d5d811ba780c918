use serde::{Deserialize, Serialize};

use super::{minkowski_dot, FourVector, Vec3};
use crate::error::{Error, Result};

/// Kinematic state of a point charge at one coordinate time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub position: FourVector,
    pub velocity: FourVector,
    pub acceleration: FourVector,
}

impl State {
    /// Builds the four-vector state from a 3-position, 3-velocity and
    /// 3-acceleration (`d²r/dt²`) at coordinate time `t`.
    pub fn from_coordinate(t: f64, r: Vec3, v: Vec3, dv: Vec3) -> Result<State> {
        let v2 = v.norm_sq();
        if !(v2 < 1.0) {
            return Err(Error::domain(format!("worldline speed {} is not below c", v2.sqrt())));
        }
        let g2 = 1.0 / (1.0 - v2);
        let gamma = g2.sqrt();
        let vdv = v.dot(dv);
        let g4 = g2 * g2;
        Ok(State {
            position: FourVector::from_parts(t, r),
            velocity: FourVector::from_parts(gamma, v * gamma),
            acceleration: FourVector::from_parts(g4 * vdv, v * (g4 * vdv) + dv * g2),
        })
    }

    pub fn time(&self) -> f64 {
        self.position.t
    }

    /// Ordinary 3-velocity `dr/dt`.
    pub fn three_velocity(&self) -> Vec3 {
        self.velocity.spatial() / self.velocity.t
    }

    /// Magnitude of the proper acceleration, `sqrt(-a·a)`.
    pub fn proper_acceleration(&self) -> f64 {
        (-minkowski_dot(self.acceleration, self.acceleration)).max(0.0).sqrt()
    }

    /// Inertial continuation of this state to coordinate time `t`.
    pub fn inertial_at(&self, t: f64) -> State {
        let v = self.three_velocity();
        State {
            position: FourVector::from_parts(t, self.position.spatial() + v * (t - self.position.t)),
            velocity: self.velocity,
            acceleration: FourVector::ZERO,
        }
    }
}

/// Anything that can report a charge's kinematic state at a coordinate time.
pub trait Trajectory {
    fn state_at(&self, t: f64) -> Result<State>;

    /// Proper time elapsed along the worldline, on the trajectory's own clock.
    fn proper_time_at(&self, t: f64) -> Result<f64>;

    /// Inverse of [`Trajectory::proper_time_at`].
    fn coordinate_time_at(&self, tau: f64) -> Result<f64> {
        // dτ/dt = 1/γ, so Newton converges from any start for bounded γ.
        let mut t = tau;
        for _ in 0..100 {
            let f = self.proper_time_at(t)? - tau;
            let gamma = self.state_at(t)?.velocity.t;
            let step = f * gamma;
            t -= step;
            if step.abs() <= 1e-14 * (1.0 + t.abs()) {
                return Ok(t);
            }
        }
        Err(Error::NumericalLimit { estimates: vec![t] })
    }
}

impl<T: Trajectory + ?Sized> Trajectory for &T {
    fn state_at(&self, t: f64) -> Result<State> {
        (**self).state_at(t)
    }
    fn proper_time_at(&self, t: f64) -> Result<f64> {
        (**self).proper_time_at(t)
    }
}

impl<T: Trajectory + ?Sized> Trajectory for Box<T> {
    fn state_at(&self, t: f64) -> Result<State> {
        (**self).state_at(t)
    }
    fn proper_time_at(&self, t: f64) -> Result<f64> {
        (**self).proper_time_at(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldlineSample {
    pub tau: f64,
    pub position: FourVector,
    pub velocity: FourVector,
    pub acceleration: FourVector,
}

impl WorldlineSample {
    pub fn from_state(tau: f64, s: &State) -> Self {
        WorldlineSample {
            tau,
            position: s.position,
            velocity: s.velocity,
            acceleration: s.acceleration,
        }
    }

    pub fn state(&self) -> State {
        State {
            position: self.position,
            velocity: self.velocity,
            acceleration: self.acceleration,
        }
    }
}

/// Sampled worldline with cubic Hermite interpolation in coordinate time and
/// inertial extension before the first and after the last sample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Worldline {
    samples: Vec<WorldlineSample>,
}

impl Worldline {
    pub fn new() -> Self {
        Worldline::default()
    }

    pub fn from_samples(samples: Vec<WorldlineSample>) -> Result<Self> {
        let mut w = Worldline::new();
        for s in samples {
            w.push(s)?;
        }
        Ok(w)
    }

    /// Appends a sample; coordinate times must be strictly increasing.
    pub fn push(&mut self, s: WorldlineSample) -> Result<()> {
        if !(s.position.is_finite() && s.velocity.is_finite() && s.acceleration.is_finite() && s.tau.is_finite()) {
            return Err(Error::domain("non-finite worldline sample"));
        }
        if let Some(last) = self.samples.last() {
            if !(s.position.t > last.position.t) {
                return Err(Error::domain(format!(
                    "worldline sample at t={} does not follow t={}",
                    s.position.t, last.position.t
                )));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub fn samples(&self) -> &[WorldlineSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_time(&self) -> Option<f64> {
        self.samples.first().map(|s| s.position.t)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.samples.last().map(|s| s.position.t)
    }

    /// Drops every sample after coordinate time `t`.
    pub fn truncate_after(&mut self, t: f64) {
        let n = self.samples.partition_point(|s| s.position.t <= t);
        self.samples.truncate(n);
    }

    fn interval(&self, t: f64) -> Result<Lookup> {
        let n = self.samples.len();
        if n == 0 {
            return Err(Error::usage("empty worldline"));
        }
        if !t.is_finite() {
            return Err(Error::domain("non-finite query time"));
        }
        let first = &self.samples[0];
        let last = &self.samples[n - 1];
        if t <= first.position.t {
            return Ok(Lookup::Before);
        }
        if t >= last.position.t {
            return Ok(Lookup::After);
        }
        let i = self.samples.partition_point(|s| s.position.t <= t);
        Ok(Lookup::Inside(i - 1))
    }
}

enum Lookup {
    Before,
    After,
    Inside(usize),
}

fn hermite(s: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h = [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2];
    let dh = [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s];
    let ddh = [12.0 * s - 6.0, 6.0 * s - 4.0, -12.0 * s + 6.0, 6.0 * s - 2.0];
    (h, dh, ddh)
}

impl Trajectory for Worldline {
    fn state_at(&self, t: f64) -> Result<State> {
        match self.interval(t)? {
            Lookup::Before => Ok(self.samples[0].state().inertial_at(t)),
            Lookup::After => Ok(self.samples[self.samples.len() - 1].state().inertial_at(t)),
            Lookup::Inside(i) => {
                let a = &self.samples[i];
                let b = &self.samples[i + 1];
                let h = b.position.t - a.position.t;
                let s = (t - a.position.t) / h;
                let (w, dw, ddw) = hermite(s);
                let (ra, rb) = (a.position.spatial(), b.position.spatial());
                let (va, vb) = (a.velocity.spatial() / a.velocity.t, b.velocity.spatial() / b.velocity.t);
                let r = ra * w[0] + va * (h * w[1]) + rb * w[2] + vb * (h * w[3]);
                let v = (ra * dw[0] + va * (h * dw[1]) + rb * dw[2] + vb * (h * dw[3])) / h;
                let dv = (ra * ddw[0] + va * (h * ddw[1]) + rb * ddw[2] + vb * (h * ddw[3])) / (h * h);
                State::from_coordinate(t, r, v, dv)
            }
        }
    }

    fn proper_time_at(&self, t: f64) -> Result<f64> {
        match self.interval(t)? {
            Lookup::Before => {
                let f = &self.samples[0];
                Ok(f.tau + (t - f.position.t) / f.velocity.t)
            }
            Lookup::After => {
                let l = &self.samples[self.samples.len() - 1];
                Ok(l.tau + (t - l.position.t) / l.velocity.t)
            }
            Lookup::Inside(i) => {
                let a = &self.samples[i];
                let b = &self.samples[i + 1];
                let h = b.position.t - a.position.t;
                let (w, _, _) = hermite((t - a.position.t) / h);
                Ok(a.tau * w[0] + h * w[1] / a.velocity.t + b.tau * w[2] + h * w[3] / b.velocity.t)
            }
        }
    }
}

/// Source worldline: analytic motion, a sampled history, or a discrete
/// transformation (time reversal and/or spatial reflection) of another path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Path {
    /// Uniform motion through `origin` at `t = 0`. Zero velocity is a static charge.
    Inertial { origin: Vec3, velocity: Vec3 },
    /// Uniform circular motion in the plane orthogonal to `axis` (right-handed sense).
    Circular {
        center: Vec3,
        radius: f64,
        speed: f64,
        phase: f64,
        #[serde(default = "default_axis")]
        axis: Vec3,
    },
    /// Constant proper acceleration along `direction`, momentarily at rest at
    /// `start` when `t = 0`.
    Hyperbolic { start: Vec3, direction: Vec3, acceleration: f64 },
    Sampled(Worldline),
    Transformed {
        inner: Box<Path>,
        reverse_time: bool,
        reflect_space: bool,
    },
}

fn default_axis() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

impl Path {
    pub fn fixed(at: Vec3) -> Path {
        Path::Inertial { origin: at, velocity: Vec3::ZERO }
    }

    /// Composes a time reversal and/or a spatial reflection with this path.
    /// Applying the same transformation twice restores the original value.
    pub fn transformed(&self, reverse_time: bool, reflect_space: bool) -> Path {
        if !reverse_time && !reflect_space {
            return self.clone();
        }
        match self {
            Path::Transformed { inner, reverse_time: rt, reflect_space: rs } => {
                let rt = *rt ^ reverse_time;
                let rs = *rs ^ reflect_space;
                if !rt && !rs {
                    (**inner).clone()
                } else {
                    Path::Transformed { inner: inner.clone(), reverse_time: rt, reflect_space: rs }
                }
            }
            other => Path::Transformed {
                inner: Box::new(other.clone()),
                reverse_time,
                reflect_space,
            },
        }
    }

    pub fn time_reversed(&self) -> Path {
        self.transformed(true, false)
    }

    pub fn space_reflected(&self) -> Path {
        self.transformed(false, true)
    }
}

fn circle_basis(axis: Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let n = axis.normalized().ok_or_else(|| Error::domain("circular path axis is zero"))?;
    let trial = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
    let e1 = (trial - n * trial.dot(n)).normalized().expect("non-parallel trial vector");
    let e2 = n.cross(e1);
    Ok((e1, e2, n))
}

impl Trajectory for Path {
    fn state_at(&self, t: f64) -> Result<State> {
        if !t.is_finite() {
            return Err(Error::domain("non-finite query time"));
        }
        match self {
            Path::Inertial { origin, velocity } => State::from_coordinate(t, *origin + *velocity * t, *velocity, Vec3::ZERO),
            Path::Circular { center, radius, speed, phase, axis } => {
                let (e1, e2, _) = circle_basis(*axis)?;
                let omega = speed / radius;
                let th = omega * t + phase;
                let (s, c) = th.sin_cos();
                let r = *center + (e1 * c + e2 * s) * *radius;
                let v = (e2 * c - e1 * s) * *speed;
                let dv = (e1 * c + e2 * s) * (-speed * omega);
                State::from_coordinate(t, r, v, dv)
            }
            Path::Hyperbolic { start, direction, acceleration } => {
                let d = direction.normalized().ok_or_else(|| Error::domain("hyperbolic direction is zero"))?;
                let g = *acceleration;
                if g == 0.0 {
                    return State::from_coordinate(t, *start, Vec3::ZERO, Vec3::ZERO);
                }
                let l = 1.0 / g.abs();
                let q = (l * l + t * t).sqrt();
                let sign = g.signum();
                let r = *start + d * (sign * (q - l));
                let v = d * (sign * t / q);
                let dv = d * (sign * l * l / (q * q * q));
                State::from_coordinate(t, r, v, dv)
            }
            Path::Sampled(w) => w.state_at(t),
            Path::Transformed { inner, reverse_time, reflect_space } => {
                let tin = if *reverse_time { -t } else { t };
                let s = inner.state_at(tin)?;
                let time_sign = if *reverse_time { -1.0 } else { 1.0 };
                let space_sign = if *reflect_space { -1.0 } else { 1.0 };
                let r = s.position.spatial() * space_sign;
                let u = s.velocity.spatial() * (time_sign * space_sign);
                let a = s.acceleration.spatial() * space_sign;
                Ok(State {
                    position: FourVector::from_parts(t, r),
                    velocity: FourVector::from_parts(s.velocity.t, u),
                    acceleration: FourVector::from_parts(s.acceleration.t * time_sign, a),
                })
            }
        }
    }

    fn proper_time_at(&self, t: f64) -> Result<f64> {
        match self {
            Path::Inertial { velocity, .. } => {
                let v2 = velocity.norm_sq();
                if !(v2 < 1.0) {
                    return Err(Error::domain("inertial path speed is not below c"));
                }
                Ok(t * (1.0 - v2).sqrt())
            }
            Path::Circular { speed, .. } => Ok(t * (1.0 - speed * speed).sqrt()),
            Path::Hyperbolic { acceleration, .. } => {
                let g = acceleration.abs();
                if g == 0.0 {
                    Ok(t)
                } else {
                    Ok((g * t).asinh() / g)
                }
            }
            Path::Sampled(w) => w.proper_time_at(t),
            Path::Transformed { inner, reverse_time, .. } => {
                if *reverse_time {
                    Ok(-inner.proper_time_at(-t)?)
                } else {
                    inner.proper_time_at(t)
                }
            }
        }
    }
}
