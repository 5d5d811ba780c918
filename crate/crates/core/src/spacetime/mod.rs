//! Minkowski-space primitives shared by the field and dynamics layers.
//!
//! Natural units with c = 1 and metric signature (+, -, -, -). Four-vectors
//! are stored with contravariant (upper-index) components.

mod external;
mod worldline;

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use external::{Envelope, ExternalField};
pub use worldline::{Path, State, Trajectory, Worldline, WorldlineSample};

/// Euclidean 3-vector, serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::from_array(a)
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Contravariant four-vector `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const ZERO: FourVector = FourVector { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { t, x, y, z }
    }

    pub fn from_parts(t: f64, s: Vec3) -> Self {
        FourVector::new(t, s.x, s.y, s.z)
    }

    pub fn spatial(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Four-velocity of a body moving with 3-velocity `v`.
    pub fn velocity_from_3velocity(v: Vec3) -> Result<Self> {
        let v2 = v.norm_sq();
        if !(v2 < 1.0) {
            return Err(Error::domain(format!("speed {} is not below c", v2.sqrt())));
        }
        let gamma = 1.0 / (1.0 - v2).sqrt();
        Ok(FourVector::from_parts(gamma, v * gamma))
    }

    /// Four-velocity from its spatial part, fixing `u^0` by normalization.
    pub fn velocity_from_spatial(u: Vec3) -> Self {
        FourVector::from_parts((1.0 + u.norm_sq()).sqrt(), u)
    }

    pub fn dot(self, o: FourVector) -> f64 {
        minkowski_dot(self, o)
    }

    pub fn is_finite(self) -> bool {
        self.t.is_finite() && self.spatial().is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.t.abs().max(self.spatial().max_abs())
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn component(self, mu: usize) -> f64 {
        match mu {
            0 => self.t,
            1 => self.x,
            2 => self.y,
            3 => self.z,
            _ => panic!("four-vector index {mu} out of range"),
        }
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, o: FourVector) {
        *self = *self + o;
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl Div<f64> for FourVector {
    type Output = FourVector;
    fn div(self, s: f64) -> FourVector {
        FourVector::new(self.t / s, self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self * -1.0
    }
}

/// `a⁰b⁰ − a¹b¹ − a²b² − a³b³`.
pub fn minkowski_dot(a: FourVector, b: FourVector) -> f64 {
    a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z
}

/// Lorentz boost into the frame moving with 3-velocity `v`.
pub fn boost(v: Vec3, x: FourVector) -> Result<FourVector> {
    let v2 = v.norm_sq();
    if !(v2 < 1.0) {
        return Err(Error::domain(format!("boost speed {} is not below c", v2.sqrt())));
    }
    if v2 == 0.0 {
        return Ok(x);
    }
    let gamma = 1.0 / (1.0 - v2).sqrt();
    let r = x.spatial();
    let vr = v.dot(r);
    let t = gamma * (x.t - vr);
    let s = r + v * ((gamma - 1.0) * vr / v2 - gamma * x.t);
    Ok(FourVector::from_parts(t, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    use proptest::prelude::*;

    #[test]
    fn dot_signature() {
        let e0 = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let e1 = FourVector::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(minkowski_dot(e0, e0), 1.0);
        assert_eq!(minkowski_dot(e1, e1), -1.0);
        let u = FourVector::new(1.25, 0.75, 0.0, 0.0);
        assert_eq!(minkowski_dot(u, u), 1.0);
    }

    #[test]
    fn boost_examples() {
        let x = FourVector::new(3.0, -1.0, 2.0, 0.5);
        assert_eq!(boost(Vec3::ZERO, x).unwrap(), x);

        let b = boost(Vec3::new(0.6, 0.0, 0.0), FourVector::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((b.t - 1.25).abs() < 1e-15);
        assert!((b.x + 0.75).abs() < 1e-15);
        assert_eq!((b.y, b.z), (0.0, 0.0));
    }

    #[test]
    fn boost_rejects_superluminal() {
        assert!(boost(Vec3::new(1.0, 0.0, 0.0), FourVector::ZERO).is_err());
        assert!(boost(Vec3::new(0.8, 0.7, 0.0), FourVector::ZERO).is_err());
    }

    fn sub_luminal() -> impl Strategy<Value = Vec3> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..0.99).prop_filter_map(
            "non-zero direction",
            |(x, y, z, s)| Vec3::new(x, y, z).normalized().map(|d| d * s),
        )
    }

    fn event() -> impl Strategy<Value = FourVector> {
        (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0)
            .prop_map(|(t, x, y, z)| FourVector::new(t, x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn boost_preserves_interval(v in sub_luminal(), x in event(), y in event()) {
            let bx = boost(v, x).unwrap();
            let by = boost(v, y).unwrap();
            let scale = 1.0 + x.max_abs() * y.max_abs();
            let gamma2 = 1.0 / (1.0 - v.norm_sq());
            prop_assert!((minkowski_dot(bx, by) - minkowski_dot(x, y)).abs() <= 1e-12 * scale * gamma2);
            prop_assert!((minkowski_dot(bx, bx) - minkowski_dot(x, x)).abs() <= 1e-12 * (1.0 + x.max_abs().powi(2)) * gamma2);
        }
    }
}
