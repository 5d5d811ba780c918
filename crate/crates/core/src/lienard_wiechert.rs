//! Retarded and advanced Liénard–Wiechert potentials and fields of a point
//! charge, the half-sum and half-difference ("minus") fields, and the
//! point-split minus field on the source worldline.
//!
//! Heaviside–Lorentz units: a static charge `e` has `E = e r̂ / (4π r²)`.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{minkowski_dot, FourVector, State, Trajectory, Vec3};

/// Search limit for light-cone roots, in coordinate time.
pub const DEFAULT_HORIZON: f64 = 1e9;

/// Antisymmetric field tensor stored as `E^i = F^{i0}` and `B` with
/// `F^{ij} = −ε^{ijk} B^k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldTensor {
    pub e: Vec3,
    pub b: Vec3,
}

impl FieldTensor {
    pub const ZERO: FieldTensor = FieldTensor { e: Vec3::ZERO, b: Vec3::ZERO };

    pub const fn new(e: Vec3, b: Vec3) -> Self {
        FieldTensor { e, b }
    }

    /// `F^{μν} = X^μ Y^ν − X^ν Y^μ`.
    pub fn wedge(x: FourVector, y: FourVector) -> Self {
        let (xs, ys) = (x.spatial(), y.spatial());
        FieldTensor::new(xs * y.t - ys * x.t, -xs.cross(ys))
    }

    /// `F^{μν} v_ν` for a contravariant `v`.
    pub fn contract(&self, v: FourVector) -> FourVector {
        let vs = v.spatial();
        FourVector::from_parts(self.e.dot(vs), self.e * v.t + vs.cross(self.b))
    }

    /// Lorentz force `e F^{μν} u_ν` on a charge moving with four-velocity `u`.
    pub fn force(&self, charge: f64, u: FourVector) -> FourVector {
        self.contract(u) * charge
    }

    /// Components in the order `E_x, E_y, E_z, B_x, B_y, B_z`.
    pub fn components(&self) -> [f64; 6] {
        [self.e.x, self.e.y, self.e.z, self.b.x, self.b.y, self.b.z]
    }

    pub fn max_abs(&self) -> f64 {
        self.e.max_abs().max(self.b.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.b.is_finite()
    }

    /// Image of a field value under `t → −t`.
    pub fn time_reversed(&self) -> Self {
        FieldTensor::new(self.e, -self.b)
    }

    /// Image of a field value under `x → −x`.
    pub fn space_reflected(&self) -> Self {
        FieldTensor::new(-self.e, self.b)
    }
}

impl Add for FieldTensor {
    type Output = FieldTensor;
    fn add(self, o: FieldTensor) -> FieldTensor {
        FieldTensor::new(self.e + o.e, self.b + o.b)
    }
}

impl AddAssign for FieldTensor {
    fn add_assign(&mut self, o: FieldTensor) {
        *self = *self + o;
    }
}

impl Sub for FieldTensor {
    type Output = FieldTensor;
    fn sub(self, o: FieldTensor) -> FieldTensor {
        FieldTensor::new(self.e - o.e, self.b - o.b)
    }
}

impl Mul<f64> for FieldTensor {
    type Output = FieldTensor;
    fn mul(self, s: f64) -> FieldTensor {
        FieldTensor::new(self.e * s, self.b * s)
    }
}

impl Neg for FieldTensor {
    type Output = FieldTensor;
    fn neg(self) -> FieldTensor {
        FieldTensor::new(-self.e, -self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightConeBranch {
    Retarded,
    Advanced,
}

impl LightConeBranch {
    fn sign(self) -> f64 {
        match self {
            LightConeBranch::Retarded => 1.0,
            LightConeBranch::Advanced => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            LightConeBranch::Retarded => LightConeBranch::Advanced,
            LightConeBranch::Advanced => LightConeBranch::Retarded,
        }
    }
}

fn separation_scale(x: FourVector) -> f64 {
    1e-14 * (1.0 + x.spatial().max_abs())
}

/// Coordinate time `t*` where the worldline crosses the past (retarded) or
/// future (advanced) light cone of `x`.
pub fn light_cone_time<T: Trajectory + ?Sized>(w: &T, x: FourVector, branch: LightConeBranch) -> Result<f64> {
    light_cone_time_within(w, x, branch, DEFAULT_HORIZON)
}

/// [`light_cone_time`] with an explicit bound on `|x⁰ − t*|`.
pub fn light_cone_time_within<T: Trajectory + ?Sized>(w: &T, x: FourVector, branch: LightConeBranch, horizon: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("non-finite field point"));
    }
    let s = branch.sign();
    let xs = x.spatial();
    // g(t) = s(x⁰ − t) − |x − r(t)| is strictly monotone in t (decreasing for
    // s = +1, increasing for s = −1) and vanishes only at the root.
    let eval = |t: f64| -> Result<(f64, f64, f64)> {
        let st = w.state_at(t)?;
        let d = xs - st.position.spatial();
        let dist = d.norm();
        let v = st.three_velocity();
        let slope = if dist > 0.0 { -s + d.dot(v) / dist } else { -s };
        Ok((s * (x.t - t) - dist, slope, dist))
    };

    let (g0, _, d0) = eval(x.t)?;
    if d0 <= separation_scale(x) {
        return Err(Error::Singularity { separation: d0 });
    }
    let mut near = x.t;
    let mut reach = d0.max(1e-300);
    let far = loop {
        if reach > horizon {
            return Err(Error::Horizon { horizon, field_time: x.t });
        }
        let t = x.t - s * reach;
        let (g, _, _) = eval(t)?;
        if g * (-g0).signum() >= 0.0 || g == 0.0 {
            break t;
        }
        near = t;
        reach *= 2.0;
    };

    // Bracket [lo, hi] with g(lo) and g(hi) of opposite sign.
    let (mut lo, mut hi) = if near < far { (near, far) } else { (far, near) };
    let glo_sign = eval(lo)?.0.signum();
    let mut t = 0.5 * (lo + hi);
    let tol = 1e-12 * (1.0 + x.t.abs());
    let mut converged = false;
    for _ in 0..200 {
        let (g, slope, dist) = eval(t)?;
        if g == 0.0 {
            converged = true;
            if dist <= separation_scale(x) {
                return Err(Error::Singularity { separation: dist });
            }
            break;
        }
        if g.signum() == glo_sign {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - g / slope;
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = next - t;
        t = next;
        if step.abs() <= 2.0 * f64::EPSILON * (1.0 + t.abs()) || hi - lo <= 2.0 * f64::EPSILON * (1.0 + t.abs()) {
            converged = g.abs() <= tol || eval(t)?.0.abs() <= tol;
            break;
        }
    }
    let (g, _, dist) = eval(t)?;
    if dist <= separation_scale(x) {
        return Err(Error::Singularity { separation: dist });
    }
    if !converged && g.abs() > tol {
        return Err(Error::NumericalLimit { estimates: vec![t, g] });
    }
    Ok(t)
}

struct Branch {
    state: State,
    sep: FourVector,
    rho: f64,
    sign: f64,
}

fn resolve<T: Trajectory + ?Sized>(w: &T, x: FourVector, branch: LightConeBranch) -> Result<Branch> {
    let t = light_cone_time(w, x, branch)?;
    let state = w.state_at(t)?;
    // Impose the null condition exactly; the root leaves only roundoff in X⁰.
    let d = x.spatial() - state.position.spatial();
    let sep = FourVector::from_parts(branch.sign() * d.norm(), d);
    let rho = minkowski_dot(state.velocity, sep);
    Ok(Branch { state, sep, rho, sign: branch.sign() })
}

/// Lorenz-gauge potential `A^μ = e u^μ / (4π |u·(x − r)|)` at the branch point.
pub fn lw_potential<T: Trajectory + ?Sized>(w: &T, charge: f64, x: FourVector, branch: LightConeBranch) -> Result<FourVector> {
    let b = resolve(w, x, branch)?;
    Ok(b.state.velocity * (b.sign * charge / (4.0 * PI * b.rho)))
}

/// Velocity (Coulombic, `∝ 1/R²`) and acceleration (radiative, `∝ 1/R`)
/// parts of the Liénard–Wiechert field.
pub fn lw_field_parts<T: Trajectory + ?Sized>(
    w: &T,
    charge: f64,
    x: FourVector,
    branch: LightConeBranch,
) -> Result<(FieldTensor, FieldTensor)> {
    let b = resolve(w, x, branch)?;
    Ok(field_parts_from(&b, charge))
}

fn field_parts_from(b: &Branch, charge: f64) -> (FieldTensor, FieldTensor) {
    let (u, a, xs, rho) = (b.state.velocity, b.state.acceleration, b.sep, b.rho);
    let k = b.sign * charge / (4.0 * PI * rho * rho);
    let xu = FieldTensor::wedge(xs, u);
    let velocity = xu * (k / rho);
    let accel = (FieldTensor::wedge(xs, a) - xu * (minkowski_dot(a, xs) / rho)) * k;
    (velocity, accel)
}

/// Full Liénard–Wiechert field of the charge on the chosen branch.
pub fn lw_field<T: Trajectory + ?Sized>(w: &T, charge: f64, x: FourVector, branch: LightConeBranch) -> Result<FieldTensor> {
    let (v, a) = lw_field_parts(w, charge, x, branch)?;
    Ok(v + a)
}

/// `(F_ret + F_adv) / 2`.
pub fn field_half_sum<T: Trajectory + ?Sized>(w: &T, charge: f64, x: FourVector) -> Result<FieldTensor> {
    let r = lw_field(w, charge, x, LightConeBranch::Retarded)?;
    let a = lw_field(w, charge, x, LightConeBranch::Advanced)?;
    Ok((r + a) * 0.5)
}

/// `(F_ret − F_adv) / 2`, the minus field.
pub fn field_half_difference<T: Trajectory + ?Sized>(w: &T, charge: f64, x: FourVector) -> Result<FieldTensor> {
    let r = lw_field(w, charge, x, LightConeBranch::Retarded)?;
    let a = lw_field(w, charge, x, LightConeBranch::Advanced)?;
    Ok((r - a) * 0.5)
}

/// Spacelike unit vectors orthogonal to `u`: the rest-frame axes boosted
/// into the lab frame.
pub fn orthonormal_frame(u: FourVector) -> [FourVector; 3] {
    let us = u.spatial();
    let axes = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)];
    axes.map(|n| {
        let un = us.dot(n);
        FourVector::from_parts(un, n + us * (un / (1.0 + u.t)))
    })
}

/// Options for the point-split limit of the minus field on the worldline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointSplit {
    /// Largest splitting distance; `None` uses `1e−3` times the local
    /// curvature radius `1/sqrt(−a·a)`, capped at 1.
    pub epsilon: Option<f64>,
}

fn split_average<T: Trajectory + ?Sized>(w: &T, charge: f64, st: &State, frame: &[FourVector; 3], eps: f64) -> Result<FieldTensor> {
    let mut acc = FieldTensor::ZERO;
    for e in frame {
        for sgn in [1.0, -1.0] {
            acc += field_half_difference(w, charge, st.position + *e * (sgn * eps))?;
        }
    }
    Ok(acc * (1.0 / 6.0))
}

/// Minus field of the charge evaluated on its own worldline at coordinate
/// time `t`, as the limit of point-split evaluations at distances
/// `ε, ε/2, ε/4` extrapolated to `ε → 0`.
pub fn minus_field_on_worldline<T: Trajectory + ?Sized>(w: &T, charge: f64, t: f64, opts: PointSplit) -> Result<FieldTensor> {
    let st = w.state_at(t)?;
    let accel = st.proper_acceleration();
    let eps = match opts.epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(Error::domain(format!("point-split distance {e} must be positive"))),
        None => 1e-3 * if accel > 1e-3 { 1.0 / accel } else { 1e3 },
    };
    let frame = orthonormal_frame(st.velocity);
    let f1 = split_average(w, charge, &st, &frame, eps)?;
    let f2 = split_average(w, charge, &st, &frame, eps / 2.0)?;
    let f4 = split_average(w, charge, &st, &frame, eps / 4.0)?;

    // Point-averaged values are even in ε; eliminate ε² then ε⁴.
    let r12 = (f2 * 4.0 - f1) * (1.0 / 3.0);
    let r24 = (f4 * 4.0 - f2) * (1.0 / 3.0);
    let limit = (r24 * 16.0 - r12) * (1.0 / 15.0);

    let d1 = (f2 - f1).max_abs();
    let d2 = (f4 - f2).max_abs();
    // Roundoff floor from cancelling two Coulomb fields of size e/(4π(ε/4)²).
    let noise = 1e-10 * charge.abs() / (4.0 * PI * (eps / 4.0).powi(2));
    if d2 > noise && d2 > 0.5 * d1 {
        return Err(Error::NumericalLimit {
            estimates: vec![f1.max_abs(), f2.max_abs(), f4.max_abs(), limit.max_abs()],
        });
    }
    Ok(limit)
}

/// Self force `e F⁽⁻⁾^{μν} u_ν` on the charge at proper time `tau`, from the
/// point-split minus field. On smooth motion this equals the
/// Abraham–Lorentz–Dirac vector `(e²/6π)(ȧ^μ + (a·a) u^μ)`.
pub fn self_minus_force<T: Trajectory + ?Sized>(w: &T, charge: f64, tau: f64) -> Result<FourVector> {
    self_minus_force_with(w, charge, tau, PointSplit::default())
}

pub fn self_minus_force_with<T: Trajectory + ?Sized>(w: &T, charge: f64, tau: f64, opts: PointSplit) -> Result<FourVector> {
    let t = w.coordinate_time_at(tau)?;
    let st = w.state_at(t)?;
    let f = minus_field_on_worldline(w, charge, t, opts)?;
    Ok(f.force(charge, st.velocity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{boost, Path, Worldline, WorldlineSample};

    fn static_at_origin() -> Path {
        Path::fixed(Vec3::ZERO)
    }

    #[test]
    fn static_light_cone_times() {
        let p = static_at_origin();
        let x = FourVector::new(10.0, 5.0, 0.0, 0.0);
        assert!((light_cone_time(&p, x, LightConeBranch::Retarded).unwrap() - 5.0).abs() < 1e-12);
        assert!((light_cone_time(&p, x, LightConeBranch::Advanced).unwrap() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn moving_light_cone_time() {
        let p = Path::Inertial { origin: Vec3::ZERO, velocity: Vec3::new(0.5, 0.0, 0.0) };
        let x = FourVector::new(10.0, 8.0, 0.0, 0.0);
        // 10 − t = 8 − 0.5 t has the single root t = 4.
        let t = light_cone_time(&p, x, LightConeBranch::Retarded).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
    }

    #[test]
    fn on_worldline_is_singular() {
        let p = static_at_origin();
        let err = light_cone_time(&p, FourVector::new(3.0, 0.0, 0.0, 0.0), LightConeBranch::Retarded).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn horizon_is_enforced() {
        let p = static_at_origin();
        let x = FourVector::new(0.0, 50.0, 0.0, 0.0);
        let err = light_cone_time_within(&p, x, LightConeBranch::Retarded, 10.0).unwrap_err();
        assert!(matches!(err, Error::Horizon { .. }));
    }

    #[test]
    fn static_potential_and_field() {
        let p = static_at_origin();
        let x = FourVector::new(2.0, 0.0, 3.0, 4.0);
        for br in [LightConeBranch::Retarded, LightConeBranch::Advanced] {
            let a = lw_potential(&p, 1.0, x, br).unwrap();
            assert!((a.t - 1.0 / (4.0 * PI * 5.0)).abs() < 1e-15);
            assert_eq!(a.spatial(), Vec3::ZERO);
            let f = lw_field(&p, 1.0, x, br).unwrap();
            let expect = Vec3::new(0.0, 3.0, 4.0) / (4.0 * PI * 125.0);
            assert!((f.e - expect).max_abs() < 1e-15);
            assert_eq!(f.b, Vec3::ZERO);
        }
        let neg = lw_potential(&p, -1.0, x, LightConeBranch::Retarded).unwrap();
        assert_eq!(neg, -lw_potential(&p, 1.0, x, LightConeBranch::Retarded).unwrap());
    }

    #[test]
    fn uniform_motion_potential_is_boosted_coulomb() {
        let v = Vec3::new(0.4, -0.2, 0.1);
        let p = Path::Inertial { origin: Vec3::ZERO, velocity: v };
        let x = FourVector::new(1.5, 2.0, -1.0, 0.5);
        let xr = boost(v, x).unwrap();
        let phi_rest = 1.0 / (4.0 * PI * xr.spatial().norm());
        // A^μ = φ_rest · u^μ.
        let u = FourVector::velocity_from_3velocity(v).unwrap();
        let a = lw_potential(&p, 1.0, x, LightConeBranch::Retarded).unwrap();
        assert!((a - u * phi_rest).max_abs() < 1e-14);
    }

    fn fd_field(p: &Path, x: FourVector, br: LightConeBranch) -> FieldTensor {
        // F^{μν} = ∂^μ A^ν − ∂^ν A^μ with ∂^0 = ∂_t, ∂^i = −∂_i.
        let h = 1e-4;
        let dir = [FourVector::new(1.0, 0.0, 0.0, 0.0), FourVector::new(0.0, 1.0, 0.0, 0.0), FourVector::new(0.0, 0.0, 1.0, 0.0), FourVector::new(0.0, 0.0, 0.0, 1.0)];
        let mut d = [[0.0; 4]; 4];
        for (m, e) in dir.iter().enumerate() {
            let f = |s: f64| lw_potential(p, 1.0, x + *e * s, br).unwrap();
            let der = (f(-2.0 * h) - f(-h) * 8.0 + f(h) * 8.0 - f(2.0 * h)) / (12.0 * h);
            let sign = if m == 0 { 1.0 } else { -1.0 };
            for n in 0..4 {
                d[m][n] = sign * der.component(n);
            }
        }
        let f = |m: usize, n: usize| d[m][n] - d[n][m];
        FieldTensor::new(Vec3::new(f(1, 0), f(2, 0), f(3, 0)), Vec3::new(-f(2, 3), -f(3, 1), -f(1, 2)))
    }

    #[test]
    fn field_is_curl_of_potential() {
        let p = Path::Circular { center: Vec3::ZERO, radius: 1.0, speed: 0.6, phase: 0.2, axis: Vec3::new(0.0, 0.0, 1.0) };
        for x in [FourVector::new(0.3, 2.0, 1.0, -0.5), FourVector::new(-1.0, -1.5, 0.3, 2.0)] {
            for br in [LightConeBranch::Retarded, LightConeBranch::Advanced] {
                let exact = lw_field(&p, 1.0, x, br).unwrap();
                let fd = fd_field(&p, x, br);
                assert!((exact - fd).max_abs() < 1e-8 * (1.0 + exact.max_abs()), "{exact:?} vs {fd:?}");
            }
        }
    }

    #[test]
    fn half_sum_and_difference_recompose() {
        let p = Path::Hyperbolic { start: Vec3::ZERO, direction: Vec3::new(1.0, 0.0, 0.0), acceleration: 0.3 };
        let x = FourVector::new(0.5, 1.0, 2.0, 0.0);
        let s = field_half_sum(&p, 1.0, x).unwrap();
        let d = field_half_difference(&p, 1.0, x).unwrap();
        let r = lw_field(&p, 1.0, x, LightConeBranch::Retarded).unwrap();
        assert!((s + d - r).max_abs() < 1e-12);
        let fs = field_half_difference(&static_at_origin(), 1.0, x).unwrap();
        assert_eq!(fs, FieldTensor::ZERO);
    }

    #[test]
    fn charge_linearity_is_exact() {
        let p = Path::Circular { center: Vec3::ZERO, radius: 2.0, speed: 0.5, phase: 0.0, axis: Vec3::new(0.0, 0.0, 1.0) };
        let x = FourVector::new(1.0, 3.0, -2.0, 1.0);
        let f1 = lw_field(&p, 1.5, x, LightConeBranch::Retarded).unwrap();
        let f2 = lw_field(&p, 3.0, x, LightConeBranch::Retarded).unwrap();
        assert_eq!(f1 * 2.0, f2);
    }

    #[test]
    fn frame_is_orthonormal() {
        let u = FourVector::velocity_from_3velocity(Vec3::new(0.5, -0.3, 0.6)).unwrap();
        let f = orthonormal_frame(u);
        for i in 0..3 {
            assert!(minkowski_dot(u, f[i]).abs() < 1e-14);
            for j in 0..3 {
                let expect = if i == j { -1.0 } else { 0.0 };
                assert!((minkowski_dot(f[i], f[j]) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inertial_self_force_vanishes() {
        let p = Path::Inertial { origin: Vec3::ZERO, velocity: Vec3::new(0.3, 0.2, 0.0) };
        let f = self_minus_force(&p, 1.0, 2.0).unwrap();
        assert!(f.max_abs() < 1e-12);
    }

    #[test]
    fn sampled_inertial_self_force_vanishes() {
        let p = Path::Inertial { origin: Vec3::ZERO, velocity: Vec3::new(0.0, 0.5, 0.0) };
        let mut w = Worldline::new();
        for i in -10..=10 {
            let t = i as f64;
            w.push(WorldlineSample::from_state(p.proper_time_at(t).unwrap(), &p.state_at(t).unwrap())).unwrap();
        }
        assert!(self_minus_force(&w, 1.0, 0.3).unwrap().max_abs() < 1e-12);
    }
}
