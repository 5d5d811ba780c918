use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FourVector, Vec3};
use crate::error::{Error, Result};
use crate::lienard_wiechert::FieldTensor;

/// Switch-on/switch-off envelope for uniform fields. A zero `ramp` is an
/// exact step with declared switch times; a positive ramp blends with a
/// quintic smoothstep over `[switch, switch + ramp]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    #[serde(default)]
    pub switch_on: Option<f64>,
    #[serde(default)]
    pub switch_off: Option<f64>,
    #[serde(default)]
    pub ramp: f64,
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

impl Envelope {
    pub fn is_constant(&self) -> bool {
        self.switch_on.is_none() && self.switch_off.is_none()
    }

    fn rise(&self, t: f64, at: f64) -> f64 {
        if self.ramp > 0.0 {
            smoothstep((t - at) / self.ramp)
        } else if t >= at {
            1.0
        } else {
            0.0
        }
    }

    /// Envelope value; right-continuous at exact switch times.
    pub fn factor(&self, t: f64) -> f64 {
        let on = self.switch_on.map_or(1.0, |t1| self.rise(t, t1));
        let off = self.switch_off.map_or(0.0, |t2| self.rise(t, t2));
        (on - off).max(0.0)
    }

    /// Left limit of the envelope at `t`.
    pub fn factor_left(&self, t: f64) -> f64 {
        if self.ramp > 0.0 {
            return self.factor(t);
        }
        let on: f64 = self.switch_on.map_or(1.0, |t1| if t > t1 { 1.0 } else { 0.0 });
        let off = self.switch_off.map_or(0.0, |t2| if t > t2 { 1.0 } else { 0.0 });
        (on - off).max(0.0)
    }

    /// Times where the envelope is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for t in [self.switch_on, self.switch_off].into_iter().flatten() {
            v.push(t);
            if self.ramp > 0.0 {
                v.push(t + self.ramp);
            }
        }
        v
    }

    fn time_reversed(&self) -> Envelope {
        Envelope {
            switch_on: self.switch_off.map(|t| -(t + self.ramp)),
            switch_off: self.switch_on.map(|t| -(t + self.ramp)),
            ramp: self.ramp,
        }
    }

    /// Same envelope with exact steps replaced by a ramp of width `ramp`.
    pub fn smoothed(&self, ramp: f64) -> Envelope {
        if self.ramp > 0.0 || self.is_constant() {
            *self
        } else {
            Envelope { ramp, ..*self }
        }
    }
}

/// Applied classical field. Also carries a free radiation field when used
/// as a plane wave.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExternalField {
    #[default]
    None,
    UniformElectric {
        field: Vec3,
        #[serde(default)]
        envelope: Envelope,
    },
    UniformMagnetic {
        field: Vec3,
        #[serde(default)]
        envelope: Envelope,
    },
    /// Field of a fixed point charge, Heaviside–Lorentz normalization.
    CoulombCenter { charge: f64, center: Vec3 },
    /// `E = amplitude · polarization · cos(ω(t − k̂·x) + phase)`, `B = k̂ × E`.
    PlaneWave {
        amplitude: f64,
        polarization: Vec3,
        direction: Vec3,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl ExternalField {
    pub fn is_none(&self) -> bool {
        matches!(self, ExternalField::None)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ExternalField::None => "none",
            ExternalField::UniformElectric { .. } => "uniform-electric",
            ExternalField::UniformMagnetic { .. } => "uniform-magnetic",
            ExternalField::CoulombCenter { .. } => "coulomb-center",
            ExternalField::PlaneWave { .. } => "plane-wave",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: Vec3, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{what} is not finite")))
            }
        };
        let unit = |v: Vec3, what: &str| {
            if (v.norm() - 1.0).abs() > 1e-12 {
                Err(Error::domain(format!("{what} must be a unit vector (norm {})", v.norm())))
            } else {
                Ok(())
            }
        };
        match self {
            ExternalField::None => Ok(()),
            ExternalField::UniformElectric { field, envelope } | ExternalField::UniformMagnetic { field, envelope } => {
                finite(*field, "field")?;
                if envelope.ramp < 0.0 || !envelope.ramp.is_finite() {
                    return Err(Error::domain("envelope ramp must be finite and non-negative"));
                }
                if let (Some(a), Some(b)) = (envelope.switch_on, envelope.switch_off) {
                    if b < a {
                        return Err(Error::domain("switch_off precedes switch_on"));
                    }
                }
                Ok(())
            }
            ExternalField::CoulombCenter { charge, center } => {
                finite(*center, "center")?;
                if !charge.is_finite() {
                    return Err(Error::domain("source charge is not finite"));
                }
                Ok(())
            }
            ExternalField::PlaneWave { amplitude, polarization, direction, frequency, phase } => {
                unit(*polarization, "polarization")?;
                unit(*direction, "direction")?;
                if polarization.dot(*direction).abs() > 1e-12 {
                    return Err(Error::domain("plane-wave polarization must be transverse to direction"));
                }
                if !(amplitude.is_finite() && frequency.is_finite() && *frequency > 0.0 && phase.is_finite()) {
                    return Err(Error::domain("plane-wave amplitude, frequency and phase must be finite with frequency > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn field_at(&self, x: FourVector) -> FieldTensor {
        match self {
            ExternalField::None => FieldTensor::ZERO,
            ExternalField::UniformElectric { field, envelope } => FieldTensor::new(*field * envelope.factor(x.t), Vec3::ZERO),
            ExternalField::UniformMagnetic { field, envelope } => FieldTensor::new(Vec3::ZERO, *field * envelope.factor(x.t)),
            ExternalField::CoulombCenter { charge, center } => {
                let d = x.spatial() - *center;
                let r = d.norm();
                FieldTensor::new(d * (charge / (4.0 * PI * r * r * r)), Vec3::ZERO)
            }
            ExternalField::PlaneWave { amplitude, polarization, direction, frequency, phase } => {
                let arg = frequency * (x.t - direction.dot(x.spatial())) + phase;
                let e = *polarization * (amplitude * arg.cos());
                FieldTensor::new(e, direction.cross(e))
            }
        }
    }

    /// Left limit in time of the field at `x` (differs from [`field_at`] only
    /// at exact step switch times).
    ///
    /// [`field_at`]: ExternalField::field_at
    pub fn field_left_at(&self, x: FourVector) -> FieldTensor {
        match self {
            ExternalField::UniformElectric { field, envelope } => FieldTensor::new(*field * envelope.factor_left(x.t), Vec3::ZERO),
            ExternalField::UniformMagnetic { field, envelope } => FieldTensor::new(Vec3::ZERO, *field * envelope.factor_left(x.t)),
            other => other.field_at(x),
        }
    }

    /// Coordinate times where the field has a kink or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ExternalField::UniformElectric { envelope, .. } | ExternalField::UniformMagnetic { envelope, .. } => envelope.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// True if the field contains exact (unramped) steps.
    pub fn has_steps(&self) -> bool {
        match self {
            ExternalField::UniformElectric { envelope, .. } | ExternalField::UniformMagnetic { envelope, .. } => {
                envelope.ramp == 0.0 && !envelope.is_constant()
            }
            _ => false,
        }
    }

    /// Replaces exact steps by ramps of width `ramp`.
    pub fn smoothed(&self, ramp: f64) -> ExternalField {
        match self {
            ExternalField::UniformElectric { field, envelope } => ExternalField::UniformElectric { field: *field, envelope: envelope.smoothed(ramp) },
            ExternalField::UniformMagnetic { field, envelope } => ExternalField::UniformMagnetic { field: *field, envelope: envelope.smoothed(ramp) },
            other => other.clone(),
        }
    }

    /// Image under `t → −t`: `E(t,x) → E(−t,x)`, `B(t,x) → −B(−t,x)`.
    pub fn time_reversed(&self) -> ExternalField {
        match self {
            ExternalField::None => ExternalField::None,
            ExternalField::UniformElectric { field, envelope } => ExternalField::UniformElectric { field: *field, envelope: envelope.time_reversed() },
            ExternalField::UniformMagnetic { field, envelope } => ExternalField::UniformMagnetic { field: -*field, envelope: envelope.time_reversed() },
            ExternalField::CoulombCenter { .. } => self.clone(),
            ExternalField::PlaneWave { amplitude, polarization, direction, frequency, phase } => ExternalField::PlaneWave {
                amplitude: *amplitude,
                polarization: *polarization,
                direction: -*direction,
                frequency: *frequency,
                phase: -*phase,
            },
        }
    }

    /// Image under `x → −x`: `E(t,x) → −E(t,−x)`, `B(t,x) → B(t,−x)`.
    pub fn space_reflected(&self) -> ExternalField {
        match self {
            ExternalField::None => ExternalField::None,
            ExternalField::UniformElectric { field, envelope } => ExternalField::UniformElectric { field: -*field, envelope: *envelope },
            ExternalField::UniformMagnetic { .. } => self.clone(),
            ExternalField::CoulombCenter { charge, center } => ExternalField::CoulombCenter { charge: *charge, center: -*center },
            ExternalField::PlaneWave { amplitude, polarization, direction, frequency, phase } => ExternalField::PlaneWave {
                amplitude: *amplitude,
                polarization: -*polarization,
                direction: -*direction,
                frequency: *frequency,
                phase: *phase,
            },
        }
    }

    /// Image under `e → −e` for every source: all field values negate.
    pub fn charge_conjugated(&self) -> ExternalField {
        match self {
            ExternalField::None => ExternalField::None,
            ExternalField::UniformElectric { field, envelope } => ExternalField::UniformElectric { field: -*field, envelope: *envelope },
            ExternalField::UniformMagnetic { field, envelope } => ExternalField::UniformMagnetic { field: -*field, envelope: *envelope },
            ExternalField::CoulombCenter { charge, center } => ExternalField::CoulombCenter { charge: -*charge, center: *center },
            ExternalField::PlaneWave { amplitude, polarization, direction, frequency, phase } => ExternalField::PlaneWave {
                amplitude: -*amplitude,
                polarization: *polarization,
                direction: *direction,
                frequency: *frequency,
                phase: *phase,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave() -> ExternalField {
        ExternalField::PlaneWave {
            amplitude: 0.3,
            polarization: Vec3::new(1.0, 0.0, 0.0),
            direction: Vec3::new(0.0, 0.0, 1.0),
            frequency: 2.0,
            phase: 0.4,
        }
    }

    #[test]
    fn rejects_non_unit_directions() {
        let bad = ExternalField::PlaneWave {
            amplitude: 1.0,
            polarization: Vec3::new(1.0, 0.0, 1e-6),
            direction: Vec3::new(0.0, 0.0, 1.0),
            frequency: 1.0,
            phase: 0.0,
        };
        assert!(bad.validate().is_err());
        assert!(wave().validate().is_ok());
    }

    #[test]
    fn time_reversal_of_fields() {
        let fields = [
            wave(),
            ExternalField::UniformMagnetic { field: Vec3::new(0.0, 0.0, 1.0), envelope: Envelope::default() },
            ExternalField::CoulombCenter { charge: 2.0, center: Vec3::new(1.0, 0.0, 0.0) },
        ];
        let x = FourVector::new(0.7, 0.2, -0.3, 1.1);
        let xr = FourVector::new(-0.7, 0.2, -0.3, 1.1);
        for f in &fields {
            let a = f.field_at(x);
            let b = f.time_reversed().field_at(xr);
            assert!((b.e - a.e).max_abs() < 1e-15);
            assert!((b.b + a.b).max_abs() < 1e-15);
            assert_eq!(f.time_reversed().time_reversed(), *f);
        }
    }

    #[test]
    fn space_reflection_of_fields() {
        let f = wave();
        let x = FourVector::new(0.7, 0.2, -0.3, 1.1);
        let xr = FourVector::new(0.7, -0.2, 0.3, -1.1);
        let a = f.field_at(x);
        let b = f.space_reflected().field_at(xr);
        assert!((b.e + a.e).max_abs() < 1e-15);
        assert!((b.b - a.b).max_abs() < 1e-15);
    }

    #[test]
    fn step_envelope_limits() {
        let env = Envelope { switch_on: Some(1.0), switch_off: None, ramp: 0.0 };
        assert_eq!(env.factor(0.999), 0.0);
        assert_eq!(env.factor(1.0), 1.0);
        assert_eq!(env.factor_left(1.0), 0.0);
        let smooth = env.smoothed(0.1);
        assert!((smooth.factor(1.05) - 0.5).abs() < 1e-12);
        assert_eq!(smooth.factor(1.2), 1.0);
    }

    #[test]
    fn envelope_time_reversal_is_mirror() {
        let env = Envelope { switch_on: Some(1.0), switch_off: Some(3.0), ramp: 0.2 };
        let r = env.time_reversed();
        for k in 0..50 {
            let t = -1.0 + k as f64 * 0.1;
            assert!((r.factor(-t) - env.factor(t)).abs() < 1e-12);
        }
    }
}
