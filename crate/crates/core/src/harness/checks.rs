//! Acceptance criteria runnable from the CLI, grouped into suites, and the
//! exact photon-algebra check list shared with the algebra-suite run.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{AlgebraSpec, Experiment};
use super::registry::{load_builtin, BUILTINS};
use super::run::{run, CheckOutcome};
use crate::coupling::{minus_field_of, observed_field, CouplingTopology, Particle, Scenario};
use crate::dynamics::{
    asymptotic_check, classical_threshold, energy_ledger, eom_residual, integrate_ld_integro, integrate_ld_local,
    integrate_retarded_nbody, tau0, IntegratorConfig, Method, Regime, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::lienard_wiechert::{lw_field, self_minus_force, LightConeBranch};
use crate::numeric::fmt_f64;
use crate::photon::{
    apply, apply_to_vacuum, build_a_rad, build_alpha, build_h_ph, commutator, eta, inner_product, positivity_sweep, rational,
    run_script, subsidiary_check, time_parity, FockState, Generator, OperatorPolynomial, Rational, TimeParity,
};
use crate::spacetime::{boost, Envelope, ExternalField, FourVector, Path, Trajectory, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fields,
    Dynamics,
    Symmetry,
    Algebra,
    All,
}

pub struct Criterion {
    pub id: u32,
    pub suite: Suite,
    pub title: &'static str,
    pub check: fn() -> Result<(bool, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [Criterion; 13] = [
    Criterion { id: 1, suite: Suite::Fields, title: "Coulomb limit", check: coulomb_limit },
    Criterion { id: 2, suite: Suite::Fields, title: "boosted Coulomb", check: boosted_coulomb },
    Criterion { id: 3, suite: Suite::Fields, title: "static minus field", check: static_minus_field },
    Criterion { id: 4, suite: Suite::Fields, title: "point-split self force", check: self_force_oracle },
    Criterion { id: 5, suite: Suite::Dynamics, title: "kernel normalization", check: kernel_normalization },
    Criterion { id: 6, suite: Suite::Dynamics, title: "preacceleration", check: preacceleration },
    Criterion { id: 7, suite: Suite::Dynamics, title: "runaway", check: runaway },
    Criterion { id: 8, suite: Suite::Dynamics, title: "arrow-of-time stability contrast", check: stability_contrast },
    Criterion { id: 9, suite: Suite::Dynamics, title: "generalized T invariance", check: t_invariance },
    Criterion { id: 10, suite: Suite::Symmetry, title: "parity table", check: parity_table_check },
    Criterion { id: 11, suite: Suite::Algebra, title: "photon algebra", check: photon_algebra },
    Criterion { id: 12, suite: Suite::Dynamics, title: "threshold diagnostic", check: threshold },
    Criterion { id: 13, suite: Suite::All, title: "determinism", check: determinism },
];

pub fn run_criterion(c: &Criterion) -> CriterionResult {
    let start = Instant::now();
    let (pass, detail) = (c.check)().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult { id: c.id, title: c.title.to_string(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn suite_criteria(suite: Suite) -> Vec<&'static Criterion> {
    CRITERIA.iter().filter(|c| suite == Suite::All || c.suite == suite).collect()
}

fn coulomb(e: f64, r: Vec3) -> Vec3 {
    r * (e / (4.0 * PI * r.norm().powi(3)))
}

fn coulomb_limit() -> Result<(bool, String)> {
    let src = Vec3::new(0.5, -1.0, 2.0);
    let s = Scenario::new(
        "pair",
        vec![Particle::new(1.0, 1.0, Vec3::new(-300.0, 0.0, 0.0), Vec3::ZERO), Particle::new(2.0, 1.0, src, Vec3::ZERO)],
        CouplingTopology::mc_ced(1.0),
    );
    let dir = Vec3::new(2.0, -1.0, 2.0) / 3.0;
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let r = 10f64.powf(2.0 * i as f64 / 60.0);
        let f = observed_field(&s, 0, FourVector::from_parts(1.0, src + dir * r))?;
        let expect = coulomb(2.0, dir * r);
        worst = worst.max(((f.e - expect).norm() + f.b.norm()) / expect.norm());
    }
    Ok((worst <= 1e-10, format!("max relative deviation {}", fmt_f64(worst))))
}

fn boosted_coulomb() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for v in [0.3, 0.6, 0.9] {
        let vel = Vec3::new(0.0, v, 0.0);
        let p = Path::Inertial { origin: Vec3::ZERO, velocity: vel };
        let g = 1.0 / (1.0 - v * v).sqrt();
        for x in [FourVector::new(0.0, 3.0, 1.0, 2.0), FourVector::new(4.0, -2.0, 4.0, 0.5)] {
            let er = coulomb(1.0, boost(vel, x)?.spatial());
            let e = Vec3::new(er.x * g, er.y, er.z * g);
            let b = vel.cross(e);
            let f = lw_field(&p, 1.0, x, LightConeBranch::Retarded)?;
            worst = worst.max(((f.e - e).norm() + (f.b - b).norm()) / e.norm());
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {}", fmt_f64(worst))))
}

fn static_minus_field() -> Result<(bool, String)> {
    let p = Particle::new(1.0, 1.0, Vec3::new(1.0, 2.0, 3.0), Vec3::ZERO);
    let mut worst: f64 = 0.0;
    for x in [FourVector::new(0.0, 4.0, 2.0, 3.0), FourVector::new(-7.0, 1.0, -1.0, 1.0), FourVector::new(3.0, 30.0, 2.0, -9.0)] {
        worst = worst.max(minus_field_of(&p, x)?.max_abs());
    }
    Ok((worst <= 1e-12, format!("max |F⁻| {}", fmt_f64(worst))))
}

fn self_force_oracle() -> Result<(bool, String)> {
    let (r, v, e) = (10.0, 0.3, 1.0);
    let path = Path::Circular { center: Vec3::ZERO, radius: r, speed: v, phase: 0.0, axis: Vec3::new(0.0, 0.0, 1.0) };
    let g = 1.0 / (1.0 - v * v).sqrt();
    let w = v / r;
    let mut worst: f64 = 0.0;
    for t in [0.0, 5.0, 12.0] {
        let ph = w * t;
        let vel = Vec3::new(-v * ph.sin(), v * ph.cos(), 0.0);
        let u = FourVector::from_parts(g, vel * g);
        let adot = FourVector::from_parts(0.0, vel * (-g.powi(3) * w * w));
        let aa = -g.powi(4) * v.powi(4) / (r * r);
        let expect = (adot + u * aa) * (e * e / (6.0 * PI));
        let f = self_minus_force(&path, e, path.proper_time_at(t)?)?;
        worst = worst.max((f - expect).max_abs() / expect.max_abs());
    }
    Ok((worst <= 1e-3, format!("max relative deviation {}", fmt_f64(worst))))
}

fn single(method: Method, t_end: f64, external: ExternalField) -> Scenario {
    let t0 = 1.0 / (6.0 * PI);
    Scenario::new("single", vec![Particle::new(1.0, 1.0, Vec3::ZERO, Vec3::ZERO)], CouplingTopology::ced(1.0, ExternalField::None))
        .with_external(external)
        .with_integrator(IntegratorConfig::new(method, t0 / 50.0, t_end))
}

fn kernel_normalization() -> Result<(bool, String)> {
    let f = 1e-3;
    let s = single(Method::LdIntegro, 1.0, ExternalField::UniformElectric { field: Vec3::new(f, 0.0, 0.0), envelope: Envelope::default() });
    let r = integrate_ld_integro(&s)?;
    let worst = r.particles[0].rows.iter().map(|r| (r.proper_acceleration() - f).abs() / f).fold(0.0, f64::max);
    Ok((worst <= 1e-9, format!("max |a − F/m|/(F/m) {}", fmt_f64(worst))))
}

fn preacceleration() -> Result<(bool, String)> {
    let (f, t1) = (1e-4, 1.0);
    let t0 = tau0(1.0, 1.0)?;
    let env = Envelope { switch_on: Some(t1), switch_off: None, ramp: 0.0 };
    let s = single(Method::LdIntegro, 2.0, ExternalField::UniformElectric { field: Vec3::new(f, 0.0, 0.0), envelope: env });
    let r = integrate_ld_integro(&s)?;
    let mut worst: f64 = 0.0;
    for row in r.particles[0].rows.iter().filter(|r| r.t >= t1 - 5.0 * t0 && r.t < t1) {
        let expect = f * ((row.t - t1) / t0).exp();
        worst = worst.max((row.acceleration.x - expect).abs() / expect);
    }
    Ok((worst <= 1e-4, format!("max relative error {}", fmt_f64(worst))))
}

fn runaway() -> Result<(bool, String)> {
    let t0 = tau0(1.0, 1.0)?;
    let mut s = single(Method::LdLocal, 40.0 * t0, ExternalField::None);
    let a0 = 1e-3;
    s.particles[0].acceleration = Vec3::new(a0, 0.0, 0.0);
    let local = integrate_ld_local(&s)?;
    let rate = local.runaway.as_ref().map_or(f64::NAN, |r| r.rate_times_tau0);
    let asym = asymptotic_check(&local, 5.0 * t0)?;
    s.integrator.method = Method::LdIntegro;
    let integro = integrate_ld_integro(&s)?;
    let late = integro.particles[0].rows.iter().filter(|r| r.t > 30.0 * t0).map(|r| r.proper_acceleration()).fold(0.0, f64::max);
    let pass = (rate - 1.0).abs() <= 0.01 && !asym.pass && late <= a0 * 1e-6;
    Ok((pass, format!("rate·τ₀ {} asymptotic pass {} integro late max|a| {}", fmt_f64(rate), asym.pass, fmt_f64(late))))
}

fn scatter_scenario(p: f64) -> Scenario {
    Scenario::new(
        "scatter",
        vec![
            Particle::new(1.0, 1.0, Vec3::new(-100.0, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0)),
            Particle::new(1.0, 1000.0, Vec3::ZERO, Vec3::ZERO),
        ],
        CouplingTopology::mc_ced(p),
    )
    .with_integrator(IntegratorConfig::new(if p > 0.0 { Method::NbodyRetarded } else { Method::NbodyAdvanced }, 0.01, 400.0))
}

fn scatter_record() -> Result<&'static TrajectoryRecord> {
    static CACHE: OnceLock<std::result::Result<TrajectoryRecord, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| integrate_retarded_nbody(&scatter_scenario(1.0)).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|m| Error::domain(format!("scatter run failed: {m}")))
}

fn stability_contrast() -> Result<(bool, String)> {
    let r = scatter_record()?;
    let l = energy_ledger(r);
    let mut mapped = r.time_reversed();
    mapped.p = -1.0;
    let lm = energy_ledger(&mapped);
    let pass = l.delta_kinetic() < 0.0 && l.relative_closure() <= 0.05 && lm.delta_kinetic() > 0.0;
    Ok((
        pass,
        format!(
            "p=+1 ΔKE {} closure {} of E_rad; mapped p=-1 ΔKE {}",
            fmt_f64(l.delta_kinetic()),
            fmt_f64(l.relative_closure()),
            fmt_f64(lm.delta_kinetic())
        ),
    ))
}

fn t_invariance() -> Result<(bool, String)> {
    let r = scatter_record()?;
    let mut mapped = r.time_reversed();
    mapped.p = -1.0;
    let adv = scatter_scenario(-1.0);
    let res = eom_residual(&adv, &mapped)?;
    let limit = 10.0 * adv.integrator.tolerance;
    Ok((res.relative <= limit, format!("relative residual {} (limit {})", fmt_f64(res.relative), fmt_f64(limit))))
}

fn outcome_summary(checks: &[CheckOutcome]) -> (bool, String) {
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if failed.is_empty() {
        (true, format!("{} checks pass", checks.len()))
    } else {
        (false, failed.join("; "))
    }
}

fn run_builtin_in_temp(name: &str, tag: &str) -> Result<(Experiment, PathBuf, super::run::RunManifest)> {
    let exp = load_builtin(name)?;
    let dir = std::env::temp_dir().join(format!("mcced-{}-{}-{}", std::process::id(), name, tag));
    let m = run(&exp, &dir, 0)?;
    Ok((exp, dir, m))
}

fn parity_table_check() -> Result<(bool, String)> {
    let (_, dir, m) = run_builtin_in_temp("symmetry-suite", "criterion")?;
    let _ = std::fs::remove_dir_all(dir);
    if let Some(e) = &m.error {
        return Ok((false, e.message.clone()));
    }
    Ok(outcome_summary(&m.checks))
}

fn photon_algebra() -> Result<(bool, String)> {
    Ok(outcome_summary(&algebra_checks(&AlgebraSpec::default(), 0)?))
}

fn threshold() -> Result<(bool, String)> {
    let a = classical_threshold(1e-3, 1e-5)?;
    let b = classical_threshold(1e-6, 1e-5)?;
    Ok((
        a == Regime::PointerBasisClassical && b == Regime::QuantumSuperposition,
        format!("(1e-3, 1e-5) → {}; (1e-6, 1e-5) → {}", a.label(), b.label()),
    ))
}

fn determinism() -> Result<(bool, String)> {
    let mut differing = Vec::new();
    for b in &BUILTINS {
        let (_, d1, m1) = run_builtin_in_temp(b.name, "a")?;
        let (_, d2, m2) = run_builtin_in_temp(b.name, "b")?;
        let same = m1.outputs == m2.outputs
            && m1.outputs.iter().all(|o| std::fs::read(d1.join(&o.name)).ok() == std::fs::read(d2.join(&o.name)).ok())
            && m1.content_hash == m2.content_hash;
        if !same {
            differing.push(b.name);
        }
        let _ = std::fs::remove_dir_all(d1);
        let _ = std::fs::remove_dir_all(d2);
    }
    Ok((differing.is_empty(), if differing.is_empty() { format!("{} built-ins byte-identical", BUILTINS.len()) } else { format!("differing: {}", differing.join(", ")) }))
}

fn q(n: i64, d: i64) -> Rational {
    rational(n, d)
}

fn gen(k: u32, mu: u8, dagger: bool) -> Result<OperatorPolynomial> {
    Ok(OperatorPolynomial::generator(Generator::new(k, mu, dagger)?))
}

fn random_poly(rng: &mut ChaCha8Rng, colors: u32) -> Result<OperatorPolynomial> {
    let mut p = OperatorPolynomial::zero();
    for _ in 0..rng.gen_range(1..4) {
        let mut m = OperatorPolynomial::one();
        for _ in 0..rng.gen_range(0..3) {
            m = m.mul(&gen(rng.gen_range(1..=colors), rng.gen_range(0..4), rng.gen_bool(0.5))?);
        }
        p = p.add(&m.scale(&q(rng.gen_range(-3..=3), rng.gen_range(1..=3))));
    }
    Ok(p)
}

/// Every exact statement of the photon algebra, one outcome per family.
pub fn algebra_checks(spec: &AlgebraSpec, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let omega = q(3, 2);
    let lam = [q(1, 1), q(0, 1), q(0, 1), q(1, 1)];
    for &n in &spec.colors {
        let ni = n as i64;
        let mut ok = true;
        for mu in 0..4u8 {
            for nu in 0..4u8 {
                let al = build_alpha(n, mu)?;
                let same = if mu == nu { 1 } else { 0 };
                ok &= commutator(&al, &build_alpha(n, nu)?.adjoint()) == OperatorPolynomial::scalar(q(-eta(mu) * ni * same, ni - 1));
                for k in 1..=n {
                    ok &= commutator(&al, &build_a_rad(n, k, nu)?.adjoint()) == OperatorPolynomial::scalar(q(-eta(mu) * same, ni - 1));
                    ok &= commutator(&gen(k, mu, false)?, &gen(k, nu, true)?).is_zero();
                }
            }
        }
        out.push(CheckOutcome::new(format!("N={n} brackets"), ok, "[α,α†] = −ηN/(N−1), [α,a⁽ᵏ⁾†] = −η/(N−1), same-color bracket 0"));

        let h = build_h_ph(n, &omega)?;
        let mut ok = h == h.adjoint() && apply(&h, &FockState::vacuum()).is_zero();
        for mu in 0..4u8 {
            let one = apply_to_vacuum(&build_alpha(n, mu)?.adjoint());
            ok &= apply(&h, &one) == one.scale(&omega);
        }
        out.push(CheckOutcome::new(format!("N={n} hamiltonian"), ok, "H = H†, H|0⟩ = 0, H α†|0⟩ = ω α†|0⟩"));

        let r = q(ni, ni - 1);
        let mut ok = true;
        for mu in 0..4u8 {
            let s = apply_to_vacuum(&build_alpha(n, mu)?.adjoint());
            let expect = if mu == 0 { -r.clone() } else { r.clone() };
            ok &= inner_product(&s, &s) == expect;
        }
        out.push(CheckOutcome::new(format!("N={n} norms"), ok, format!("spatial +{r}, timelike −{r}")));

        let mut ok = time_parity(&FockState::vacuum()) == TimeParity::Even;
        let mut layer = vec![OperatorPolynomial::one()];
        for photons in 1..=spec.max_photons {
            let mut next = Vec::new();
            for p in &layer {
                for mu in 0..4u8 {
                    next.push(p.mul(&build_alpha(n, mu)?.adjoint()));
                }
            }
            let expect = if photons % 2 == 1 { TimeParity::Odd } else { TimeParity::Even };
            ok &= next.iter().all(|p| time_parity(&apply_to_vacuum(p)) == expect);
            layer = next;
        }
        out.push(CheckOutcome::new(format!("N={n} time parity"), ok, format!("(−1)^n up to {} photons", spec.max_photons)));

        let all = |s: &FockState| -> Result<bool> { Ok(subsidiary_check(n, s, &lam)?.into_iter().all(|b| b)) };
        let mut ok = all(&FockState::vacuum())?;
        for i in [1u8, 2] {
            ok &= all(&apply_to_vacuum(&build_alpha(n, i)?.adjoint()))?;
        }
        ok &= !all(&apply_to_vacuum(&build_alpha(n, 0)?.adjoint()))?;
        ok &= all(&apply_to_vacuum(&build_alpha(n, 0)?.adjoint().add(&build_alpha(n, 3)?.adjoint())))?;
        out.push(CheckOutcome::new(format!("N={n} subsidiary"), ok, "vacuum and transverse pass, timelike fails, timelike+longitudinal pass"));

        if n <= 3 {
            let rep = positivity_sweep(n, spec.max_photons)?;
            let min = rep.min_norm.clone().unwrap_or_else(|| q(0, 1));
            out.push(CheckOutcome::new(
                format!("N={n} positivity"),
                rep.positive() && !min.is_negative(),
                format!(
                    "{} of {} transverse α† states physical, min norm {}; {} color-antisymmetric transverse states of negative norm",
                    rep.physical, rep.states_checked, min, rep.negative_color_states
                ),
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors = spec.colors.iter().copied().max().unwrap_or(3).min(3);
    let mut ok = true;
    for _ in 0..spec.random_triples {
        let (a, b, c) = (random_poly(&mut rng, colors)?, random_poly(&mut rng, colors)?, random_poly(&mut rng, colors)?);
        let j = commutator(&a, &commutator(&b, &c)).add(&commutator(&b, &commutator(&c, &a))).add(&commutator(&c, &commutator(&a, &b)));
        ok &= j.is_zero() && commutator(&a, &a).is_zero();
    }
    out.push(CheckOutcome::new("jacobi", ok, format!("{} random triples, seed {seed}", spec.random_triples)));

    if !spec.script.trim().is_empty() {
        let outcome = run_script(&spec.script)?;
        for l in outcome.lines.iter().filter(|l| l.pass.is_some()) {
            out.push(CheckOutcome::new(
                format!("script line {}", l.line),
                l.pass == Some(true),
                format!("{} {} → {} (expected {})", l.command, l.input, l.result, l.expected.as_deref().unwrap_or("")),
            ));
        }
    }
    Ok(out)
}
