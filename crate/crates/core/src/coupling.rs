//! Field observed by each charge under measurement-color (MC-CED) or
//! standard (CED) coupling, split into retarded, advanced and radiation
//! parts according to the arrow parameter `p`.

use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::lienard_wiechert::{field_half_difference, lw_field, minus_field_on_worldline, FieldTensor, LightConeBranch, PointSplit};
use crate::spacetime::{ExternalField, FourVector, Path, Trajectory, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMode {
    /// Each charge couples only to fields sourced by the other charges.
    McCed,
    /// One field sourced by all charges plus a free radiation field.
    Ced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingTopology {
    pub mode: CouplingMode,
    pub p: f64,
    #[serde(default)]
    pub free_field: ExternalField,
}

impl CouplingTopology {
    pub fn mc_ced(p: f64) -> Self {
        CouplingTopology { mode: CouplingMode::McCed, p, free_field: ExternalField::None }
    }

    pub fn ced(p: f64, free_field: ExternalField) -> Self {
        CouplingTopology { mode: CouplingMode::Ced, p, free_field }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() || self.p == 0.0 {
            return Err(Error::domain("arrow parameter p must be a finite non-zero number (p ≠ 0)"));
        }
        match (&self.mode, &self.free_field) {
            (CouplingMode::McCed, ExternalField::None) => Ok(()),
            (CouplingMode::McCed, _) => Err(Error::domain(
                "mc-ced topology admits no free radiation field: free fields are not measurement-color charge-fields",
            )),
            (CouplingMode::Ced, ExternalField::None | ExternalField::PlaneWave { .. }) => self.free_field.validate(),
            (CouplingMode::Ced, other) => Err(Error::domain(format!(
                "free field must be a plane wave or none, got {}",
                other.kind_name()
            ))),
        }
    }
}

/// Point charge with initial data at `t = 0` and a source worldline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub charge: f64,
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Initial coordinate acceleration `d²r/dt²`; only the third-order local
    /// form takes it as data.
    #[serde(default)]
    pub acceleration: Vec3,
    pub path: Path,
}

impl Particle {
    /// Charge moving inertially from its initial data.
    pub fn new(charge: f64, mass: f64, position: Vec3, velocity: Vec3) -> Self {
        Particle {
            charge,
            mass,
            position,
            velocity,
            acceleration: Vec3::ZERO,
            path: Path::Inertial { origin: position, velocity },
        }
    }

    /// Charge following a prescribed worldline; initial data is read off at `t = 0`.
    pub fn on_path(charge: f64, mass: f64, path: Path) -> Result<Self> {
        let s = path.state_at(0.0)?;
        let v = s.three_velocity();
        let g2 = s.velocity.t * s.velocity.t;
        // d²r/dt² = (a⃗ − v⃗ a⁰)/γ².
        let acceleration = (s.acceleration.spatial() - v * s.acceleration.t) / g2;
        Ok(Particle { charge, mass, position: s.position.spatial(), velocity: v, acceleration, path })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::domain(format!("mass must be positive, got {}", self.mass)));
        }
        if !self.charge.is_finite() {
            return Err(Error::domain("charge must be finite"));
        }
        if !(self.position.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()) {
            return Err(Error::domain("initial data must be finite"));
        }
        if !(self.velocity.norm() < 1.0) {
            return Err(Error::domain(format!("initial speed {} is not below c", self.velocity.norm())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub particles: Vec<Particle>,
    pub topology: CouplingTopology,
    #[serde(default)]
    pub external: ExternalField,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl Scenario {
    pub fn new(name: impl Into<String>, particles: Vec<Particle>, topology: CouplingTopology) -> Self {
        Scenario {
            name: name.into(),
            particles,
            topology,
            external: ExternalField::None,
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn with_external(mut self, external: ExternalField) -> Self {
        self.external = external;
        self
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        if self.topology.mode == CouplingMode::McCed && self.particles.len() < 2 {
            return Err(Error::domain(format!(
                "mc-ced requires N ≥ 2 charges, got {}",
                self.particles.len()
            )));
        }
        if self.particles.is_empty() {
            return Err(Error::domain("scenario has no particles"));
        }
        for p in &self.particles {
            p.validate()?;
        }
        self.external.validate()?;
        self.integrator.validate()
    }

    fn particle(&self, k: usize) -> Result<&Particle> {
        self.particles
            .get(k)
            .ok_or_else(|| Error::usage(format!("particle index {k} out of range (N = {})", self.particles.len())))
    }
}

/// Observed field split by origin. `total = ret_part + adv_part + rad_part`;
/// the applied external field is reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedFieldDecomposition {
    pub ret_part: FieldTensor,
    pub adv_part: FieldTensor,
    pub rad_part: FieldTensor,
    pub total: FieldTensor,
    pub external: FieldTensor,
}

impl ObservedFieldDecomposition {
    /// Charge-sourced total plus the external field.
    pub fn observed(&self) -> FieldTensor {
        self.total + self.external
    }
}

fn on_worldline(path: &Path, x: FourVector) -> Result<bool> {
    let r = path.state_at(x.t)?.position.spatial();
    Ok((x.spatial() - r).norm() <= 1e-12 * (1.0 + x.spatial().max_abs()))
}

/// Minus field of particle `k` at `x`; on its own worldline the point-split
/// limit is used.
pub fn minus_field_of(p: &Particle, x: FourVector) -> Result<FieldTensor> {
    if on_worldline(&p.path, x)? {
        minus_field_on_worldline(&p.path, p.charge, x.t, PointSplit::default())
    } else {
        field_half_difference(&p.path, p.charge, x)
    }
}

/// Sum of the retarded (or advanced) fields of every particle except `skip`.
fn branch_sum(s: &Scenario, skip: Option<usize>, x: FourVector, branch: LightConeBranch) -> Result<FieldTensor> {
    let mut acc = FieldTensor::ZERO;
    for (j, p) in s.particles.iter().enumerate() {
        if Some(j) != skip {
            acc += lw_field(&p.path, p.charge, x, branch)?;
        }
    }
    Ok(acc)
}

/// Retarded, advanced and minus sums over the other charges and the
/// treatment of charge `k` itself, at `x`.
pub fn decompose_observed(s: &Scenario, k: usize, x: FourVector) -> Result<ObservedFieldDecomposition> {
    let pk = s.particle(k)?;
    s.topology.validate()?;
    let p = s.topology.p;
    let cp = 0.5 * (1.0 + p);
    let cm = 0.5 * (1.0 - p);
    let ret_others = branch_sum(s, Some(k), x, LightConeBranch::Retarded)?;
    let adv_others = branch_sum(s, Some(k), x, LightConeBranch::Advanced)?;
    let minus_k = minus_field_of(pk, x)?;
    let external = s.external.field_at(x);

    let (ret_part, adv_part, rad_part) = match s.topology.mode {
        CouplingMode::McCed => {
            if s.particles.len() < 2 {
                return Err(Error::domain("mc-ced requires N ≥ 2 charges"));
            }
            // p·F_TCRF − p·Σ_{j≠k} F⁽ʲ⁾⁽⁻⁾ = p·F⁽ᵏ⁾⁽⁻⁾.
            (ret_others * cp, adv_others * cm, minus_k * p)
        }
        CouplingMode::Ced => {
            let minus_others = (ret_others - adv_others) * 0.5;
            // At the charge's own position the divergent half-sum self field is
            // absorbed into the mass; its retarded and advanced fields reduce to
            // ±F⁽ᵏ⁾⁽⁻⁾.
            let (ret_k, adv_k) = if on_worldline(&pk.path, x)? {
                (minus_k, -minus_k)
            } else {
                (
                    lw_field(&pk.path, pk.charge, x, LightConeBranch::Retarded)?,
                    lw_field(&pk.path, pk.charge, x, LightConeBranch::Advanced)?,
                )
            };
            let free = s.topology.free_field.field_at(x);
            (
                (ret_others + ret_k) * cp,
                (adv_others + adv_k) * cm,
                free - (minus_others + minus_k) * p,
            )
        }
    };
    Ok(ObservedFieldDecomposition {
        ret_part,
        adv_part,
        rad_part,
        total: ret_part + adv_part + rad_part,
        external,
    })
}

/// Field observed by charge `k` at `x`, external field included.
pub fn observed_field(s: &Scenario, k: usize, x: FourVector) -> Result<FieldTensor> {
    Ok(decompose_observed(s, k, x)?.observed())
}

/// Total coupled radiation field `Σ_k F⁽ᵏ⁾⁽⁻⁾`.
pub fn tcrf_field(s: &Scenario, x: FourVector) -> Result<FieldTensor> {
    if s.particles.len() < 2 {
        return Err(Error::domain(format!(
            "the coupled radiation field needs N ≥ 2 charges, got {}",
            s.particles.len()
        )));
    }
    let mut acc = FieldTensor::ZERO;
    for p in &s.particles {
        acc += minus_field_of(p, x)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn static_pair(p: f64) -> Scenario {
        Scenario::new(
            "pair",
            vec![
                Particle::new(1.0, 1.0, Vec3::new(-0.5, 0.0, 0.0), Vec3::ZERO),
                Particle::new(1.0, 1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::ZERO),
            ],
            CouplingTopology::mc_ced(p),
        )
    }

    #[test]
    fn static_pair_sees_partner_coulomb_only() {
        let s = static_pair(1.0);
        let x = FourVector::new(3.0, -0.5, 0.0, 0.0);
        let f = observed_field(&s, 0, x).unwrap();
        assert!((f.e - Vec3::new(-1.0 / (4.0 * PI), 0.0, 0.0)).max_abs() < 1e-15);
        assert_eq!(f.b, Vec3::ZERO);
    }

    #[test]
    fn static_half_arrow_splits_coulomb_evenly() {
        let s = static_pair(0.5);
        let x = FourVector::new(1.0, 0.0, 2.0, 0.0);
        let d = decompose_observed(&s, 0, x).unwrap();
        assert_eq!(d.rad_part, FieldTensor::ZERO);
        let coulomb = lw_field(&s.particles[1].path, 1.0, x, LightConeBranch::Retarded).unwrap();
        assert!((d.ret_part - coulomb * 0.75).max_abs() < 1e-15);
        assert!((d.adv_part - coulomb * 0.25).max_abs() < 1e-15);
    }

    #[test]
    fn p_one_has_no_advanced_part() {
        let mut s = static_pair(1.0);
        s.particles[1] = Particle::on_path(
            1.0,
            1.0,
            Path::Circular { center: Vec3::ZERO, radius: 1.0, speed: 0.4, phase: 0.0, axis: Vec3::new(0.0, 0.0, 1.0) },
        )
        .unwrap();
        let d = decompose_observed(&s, 0, FourVector::new(0.0, 2.0, 2.0, 0.0)).unwrap();
        assert_eq!(d.adv_part, FieldTensor::ZERO);
    }

    #[test]
    fn rejects_bad_topologies() {
        assert!(CouplingTopology::mc_ced(0.0).validate().is_err());
        let wave = ExternalField::PlaneWave {
            amplitude: 1.0,
            polarization: Vec3::new(1.0, 0.0, 0.0),
            direction: Vec3::new(0.0, 0.0, 1.0),
            frequency: 1.0,
            phase: 0.0,
        };
        let bad = CouplingTopology { mode: CouplingMode::McCed, p: 1.0, free_field: wave.clone() };
        assert!(bad.validate().is_err());
        assert!(CouplingTopology::ced(1.0, wave).validate().is_ok());
        let mut one = static_pair(1.0);
        one.particles.truncate(1);
        assert!(one.validate().is_err());
        assert!(tcrf_field(&one, FourVector::new(0.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn index_out_of_range_is_usage_error() {
        let s = static_pair(1.0);
        assert!(matches!(observed_field(&s, 2, FourVector::ZERO), Err(Error::Usage(_))));
    }
}
