//! Discrete symmetries: field-motion reversal `T_t`, arrow reversal `T_p`
//! (`p → −p`), their product `T`, charge conjugation `C`, parity `P` and
//! `CPT`, acting on scenarios, records, points and fields; parity
//! measurements of the observed-field parts.

use serde::{Deserialize, Serialize};

use crate::coupling::{decompose_observed, tcrf_field, Scenario};
use crate::dynamics::{Method, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::lienard_wiechert::FieldTensor;
use crate::spacetime::FourVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryOp {
    /// Motion reversal of charges and fields, `t → −t`.
    Tt,
    /// Arrow reversal, `p → −p`.
    Tp,
    /// `T_t ∘ T_p`.
    T,
    C,
    P,
    Cpt,
}

#[derive(Clone, Copy)]
enum Basic {
    Tt,
    Tp,
    C,
    P,
}

impl SymmetryOp {
    pub const ALL: [SymmetryOp; 6] = [SymmetryOp::Tt, SymmetryOp::Tp, SymmetryOp::T, SymmetryOp::C, SymmetryOp::P, SymmetryOp::Cpt];

    pub fn name(self) -> &'static str {
        match self {
            SymmetryOp::Tt => "Tt",
            SymmetryOp::Tp => "Tp",
            SymmetryOp::T => "T",
            SymmetryOp::C => "C",
            SymmetryOp::P => "P",
            SymmetryOp::Cpt => "CPT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        SymmetryOp::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::usage(format!("unknown symmetry operation {s:?} (expected Tt, Tp, T, C, P or CPT)")))
    }

    fn basics(self) -> &'static [Basic] {
        match self {
            SymmetryOp::Tt => &[Basic::Tt],
            SymmetryOp::Tp => &[Basic::Tp],
            SymmetryOp::T => &[Basic::Tt, Basic::Tp],
            SymmetryOp::C => &[Basic::C],
            SymmetryOp::P => &[Basic::P],
            SymmetryOp::Cpt => &[Basic::Tt, Basic::Tp, Basic::P, Basic::C],
        }
    }
}

fn basic_scenario(b: Basic, s: &Scenario) -> Scenario {
    let mut o = s.clone();
    match b {
        Basic::Tt => {
            for p in &mut o.particles {
                p.velocity = -p.velocity;
                p.path = p.path.time_reversed();
            }
            o.external = s.external.time_reversed();
            o.topology.free_field = s.topology.free_field.time_reversed();
        }
        Basic::Tp => {
            o.topology.p = -s.topology.p;
            o.integrator.method = match s.integrator.method {
                Method::NbodyRetarded => Method::NbodyAdvanced,
                Method::NbodyAdvanced => Method::NbodyRetarded,
                m => m,
            };
        }
        Basic::C => {
            for p in &mut o.particles {
                p.charge = -p.charge;
            }
            o.external = s.external.charge_conjugated();
            o.topology.free_field = s.topology.free_field.charge_conjugated();
        }
        Basic::P => {
            for p in &mut o.particles {
                p.position = -p.position;
                p.velocity = -p.velocity;
                p.acceleration = -p.acceleration;
                p.path = p.path.space_reflected();
            }
            o.external = s.external.space_reflected();
            o.topology.free_field = s.topology.free_field.space_reflected();
        }
    }
    o
}

/// Image scenario.
pub fn apply_symmetry(op: SymmetryOp, s: &Scenario) -> Scenario {
    op.basics().iter().fold(s.clone(), |acc, b| basic_scenario(*b, &acc))
}

/// Image of a trajectory record.
pub fn apply_symmetry_record(op: SymmetryOp, tr: &TrajectoryRecord) -> TrajectoryRecord {
    op.basics().iter().fold(tr.clone(), |acc, b| match b {
        Basic::Tt => acc.time_reversed(),
        Basic::Tp => TrajectoryRecord { p: -acc.p, ..acc },
        Basic::C => acc.charge_conjugated(),
        Basic::P => acc.space_reflected(),
    })
}

/// Image of a spacetime point.
pub fn map_point(op: SymmetryOp, x: FourVector) -> FourVector {
    op.basics().iter().fold(x, |x, b| match b {
        Basic::Tt => FourVector::from_parts(-x.t, x.spatial()),
        Basic::P => FourVector::from_parts(x.t, -x.spatial()),
        Basic::Tp | Basic::C => x,
    })
}

/// Kinematic image of a field value: `B → −B` under `T_t`, `E → −E` under `P`.
pub fn map_field(op: SymmetryOp, f: FieldTensor) -> FieldTensor {
    op.basics().iter().fold(f, |f, b| match b {
        Basic::Tt => f.time_reversed(),
        Basic::P => f.space_reflected(),
        Basic::Tp | Basic::C => f,
    })
}

/// Field quantities whose parities are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Total coupled radiation field `Σ_k F⁽ᵏ⁾⁽⁻⁾`.
    Tcrf,
    Ret,
    Adv,
    Rad,
    /// Charge-sourced observed field.
    Total,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [Quantity::Tcrf, Quantity::Ret, Quantity::Adv, Quantity::Rad, Quantity::Total];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Tcrf => "tcrf",
            Quantity::Ret => "ret",
            Quantity::Adv => "adv",
            Quantity::Rad => "rad",
            Quantity::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown quantity {s:?} (expected tcrf, ret, adv, rad or total)")))
    }
}

/// Value of a quantity seen by charge `k` at `x`.
pub fn evaluate(q: Quantity, s: &Scenario, k: usize, x: FourVector) -> Result<FieldTensor> {
    if q == Quantity::Tcrf {
        return tcrf_field(s, x);
    }
    let d = decompose_observed(s, k, x)?;
    Ok(match q {
        Quantity::Ret => d.ret_part,
        Quantity::Adv => d.adv_part,
        Quantity::Rad => d.rad_part,
        Quantity::Total | Quantity::Tcrf => d.total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
    /// The quantity vanishes, so both signs fit.
    Vanishing,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "+1",
            Parity::Odd => "-1",
            Parity::Mixed => "mixed",
            Parity::Vanishing => "0",
        }
    }

    pub fn sign(self) -> Option<i32> {
        match self {
            Parity::Even => Some(1),
            Parity::Odd => Some(-1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityMeasurement {
    pub op: SymmetryOp,
    pub quantity: Quantity,
    pub parity: Parity,
    /// Quantity in the original scenario.
    pub value: FieldTensor,
    /// Quantity in the image scenario at the image point.
    pub image: FieldTensor,
    /// `max|image − map(value)|`.
    pub even_residual: f64,
    /// `max|image + map(value)|`.
    pub odd_residual: f64,
}

/// Compares the quantity in the image scenario at the image point with the
/// kinematic image of its original value.
pub fn measure_parity(op: SymmetryOp, q: Quantity, s: &Scenario, k: usize, x: FourVector) -> Result<ParityMeasurement> {
    let value = evaluate(q, s, k, x)?;
    let image = evaluate(q, &apply_symmetry(op, s), k, map_point(op, x))?;
    let mapped = map_field(op, value);
    let even_residual = (image - mapped).max_abs();
    let odd_residual = (image + mapped).max_abs();
    let tol = 1e-9 * (1.0 + value.max_abs());
    let parity = match (even_residual <= tol, odd_residual <= tol) {
        (true, true) => Parity::Vanishing,
        (true, false) => Parity::Even,
        (false, true) => Parity::Odd,
        (false, false) => Parity::Mixed,
    };
    Ok(ParityMeasurement { op, quantity: q, parity, value, image, even_residual, odd_residual })
}

/// Every operation against every quantity.
pub fn parity_table(s: &Scenario, k: usize, x: FourVector) -> Result<Vec<ParityMeasurement>> {
    let mut out = Vec::new();
    for op in SymmetryOp::ALL {
        for q in Quantity::ALL {
            out.push(measure_parity(op, q, s, k, x)?);
        }
    }
    Ok(out)
}

/// Deviation between the `T_t` image of a quantity at arrow `p` and the
/// kinematic image of the same quantity at arrow `−p`; zero when `T_t`
/// acts on it as `p → −p`.
pub fn tt_arrow_deviation(q: Quantity, s: &Scenario, k: usize, x: FourVector) -> Result<f64> {
    let image = evaluate(q, &apply_symmetry(SymmetryOp::Tt, s), k, map_point(SymmetryOp::Tt, x))?;
    let flipped = evaluate(q, &apply_symmetry(SymmetryOp::Tp, s), k, x)?;
    Ok((image - map_field(SymmetryOp::Tt, flipped)).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{CouplingTopology, Particle};
    use crate::spacetime::{ExternalField, Path, Vec3};

    fn moving_triple(p: f64) -> Scenario {
        let circ = |c: Vec3, phase: f64| Path::Circular { center: c, radius: 1.0, speed: 0.4, phase, axis: Vec3::new(0.0, 0.0, 1.0) };
        Scenario::new(
            "triple",
            vec![
                Particle::on_path(1.0, 1.0, circ(Vec3::new(0.0, 0.0, 0.0), 0.0)).unwrap(),
                Particle::on_path(-0.5, 2.0, circ(Vec3::new(5.0, 1.0, 0.0), 1.0)).unwrap(),
                Particle::on_path(2.0, 1.0, Path::Inertial { origin: Vec3::new(-4.0, 2.0, 1.0), velocity: Vec3::new(0.1, -0.2, 0.3) }).unwrap(),
            ],
            CouplingTopology::mc_ced(p),
        )
    }

    #[test]
    fn point_and_field_maps_are_involutions() {
        let x = FourVector::new(1.0, 2.0, 3.0, 4.0);
        let f = FieldTensor::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0));
        for op in SymmetryOp::ALL {
            assert_eq!(map_point(op, map_point(op, x)), x);
            assert_eq!(map_field(op, map_field(op, f)), f);
        }
    }

    #[test]
    fn expected_parities() {
        let s = moving_triple(0.7);
        let x = FourVector::new(0.3, 2.0, -1.5, 0.5);
        let par = |op, q| measure_parity(op, q, &s, 0, x).unwrap().parity;
        assert_eq!(par(SymmetryOp::Tt, Quantity::Tcrf), Parity::Odd);
        assert_eq!(par(SymmetryOp::Tp, Quantity::Rad), Parity::Odd);
        assert_eq!(par(SymmetryOp::T, Quantity::Rad), Parity::Even);
        assert_eq!(par(SymmetryOp::C, Quantity::Total), Parity::Odd);
        assert_eq!(par(SymmetryOp::P, Quantity::Total), Parity::Even);
        assert_eq!(par(SymmetryOp::Tt, Quantity::Total), Parity::Mixed);
    }

    #[test]
    fn ced_radiation_part_reverses_arrow_under_motion_reversal() {
        let mut s = moving_triple(0.6);
        s.topology = CouplingTopology::ced(0.6, ExternalField::None);
        let x = FourVector::new(0.3, 2.0, -1.5, 0.5);
        assert!(tt_arrow_deviation(Quantity::Rad, &s, 0, x).unwrap() < 1e-12);
    }

    #[test]
    fn parse_names() {
        assert_eq!(SymmetryOp::parse("cpt").unwrap(), SymmetryOp::Cpt);
        assert_eq!(Quantity::parse("rad").unwrap(), Quantity::Rad);
        assert!(SymmetryOp::parse("Q").is_err());
    }
}
