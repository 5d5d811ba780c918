//! Whitespace-delimited plot data derived from a finished run.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use super::config::Check;
use super::run::{write_atomic, RunManifest, PARITY_FILE, TRAJECTORY_COLUMNS, TRAJECTORY_FILE};
use crate::error::{Error, Result};
use crate::numeric::fmt_f64;
use crate::spacetime::{FourVector, Vec3};

pub const PLOT_QUANTITIES: [&str; 10] =
    ["trajectory", "speed", "accel", "larmor", "radiated", "kinetic", "ledger", "separation", "asymptotic", "parity"];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Row {
    t: f64,
    particle: usize,
    x: Vec3,
    u: Vec3,
    a: Vec3,
    larmor: f64,
}

impl Row {
    fn gamma(&self) -> f64 {
        (1.0 + self.u.norm_sq()).sqrt()
    }

    fn proper_acceleration(&self) -> f64 {
        let g = self.gamma();
        let a = FourVector::from_parts(self.u.dot(self.a) / g, self.a);
        (-a.dot(a)).max(0.0).sqrt()
    }
}

fn read_trajectory(path: &FsPath) -> Result<Vec<Row>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse { path: Some(path.to_path_buf()), line: Some(line), message: msg };
    match lines.next() {
        Some((_, h)) if h == TRAJECTORY_COLUMNS.join(",") => {}
        _ => return Err(parse_err(1, "unexpected trajectory header".into())),
    }
    let mut rows = Vec::new();
    for (i, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != TRAJECTORY_COLUMNS.len() {
            return Err(parse_err(i + 1, format!("expected {} columns, got {}", TRAJECTORY_COLUMNS.len(), f.len())));
        }
        let num = |j: usize| f[j].parse::<f64>().map_err(|e| parse_err(i + 1, format!("column {}: {e}", TRAJECTORY_COLUMNS[j])));
        let v = |j: usize| -> Result<Vec3> { Ok(Vec3::new(num(j)?, num(j + 1)?, num(j + 2)?)) };
        rows.push(Row {
            t: num(0)?,
            particle: f[1].parse().map_err(|e| parse_err(i + 1, format!("particle: {e}")))?,
            x: v(2)?,
            u: v(5)?,
            a: v(8)?,
            larmor: num(11)?,
        });
    }
    Ok(rows)
}

/// Rows grouped by time, in file order.
fn by_time(rows: &[Row]) -> Vec<(f64, Vec<Row>)> {
    let mut out: Vec<(f64, Vec<Row>)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((t, g)) if *t == r.t => g.push(*r),
            _ => out.push((r.t, vec![*r])),
        }
    }
    out
}

fn line(out: &mut String, vals: &[f64]) {
    let s: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
    let _ = writeln!(out, "{}", s.join(" "));
}

/// Writes `<quantity>.dat` next to the manifest and returns its path.
pub fn emit_plotdata(manifest_path: &FsPath, quantity: &str) -> Result<PathBuf> {
    if !PLOT_QUANTITIES.contains(&quantity) {
        return Err(Error::usage(format!("unknown quantity {quantity:?}; available: {}", PLOT_QUANTITIES.join(", "))));
    }
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(manifest_path)?)?;
    let dir = manifest_path.parent().unwrap_or(FsPath::new("."));
    let target = dir.join(format!("{quantity}.dat"));
    if quantity == "parity" {
        if !manifest.outputs.iter().any(|o| o.name == PARITY_FILE) {
            return Err(Error::usage("parity data exists only for symmetry-suite runs"));
        }
        let text = fs::read_to_string(dir.join(PARITY_FILE))?;
        write_atomic(&target, format!("# {text}").as_bytes())?;
        return Ok(target);
    }
    let scenario = manifest
        .config
        .scenario
        .as_ref()
        .filter(|_| manifest.outputs.iter().any(|o| o.name == TRAJECTORY_FILE))
        .ok_or_else(|| Error::usage(format!("run {} has no trajectory", manifest.scenario)))?;
    let rows = read_trajectory(&dir.join(TRAJECTORY_FILE))?;
    let groups = by_time(&rows);
    let mass = |k: usize| scenario.particles.get(k).map_or(1.0, |p| p.mass);
    let charge = |k: usize| scenario.particles.get(k).map_or(0.0, |p| p.charge);
    let kinetic = |g: &[Row]| g.iter().map(|r| mass(r.particle) * r.u.norm_sq() / (r.gamma() + 1.0)).sum::<f64>();
    let potential = |g: &[Row]| {
        let mut pe = 0.0;
        for (i, a) in g.iter().enumerate() {
            for b in &g[i + 1..] {
                pe += charge(a.particle) * charge(b.particle) / (4.0 * PI * (a.x - b.x).norm());
            }
        }
        pe
    };
    let larmor = |g: &[Row]| g.iter().map(|r| r.larmor).sum::<f64>();
    let p = scenario.topology.p;
    let radiated: Vec<f64> = {
        let mut acc = 0.0;
        let mut v = Vec::with_capacity(groups.len());
        for (i, (t, g)) in groups.iter().enumerate() {
            if i > 0 {
                let (t0, g0) = &groups[i - 1];
                acc += 0.5 * (t - t0) * (larmor(g0) + larmor(g));
            }
            v.push(p * acc);
        }
        v
    };

    let mut out = String::new();
    match quantity {
        "trajectory" => {
            out.push_str("# t particle x y z\n");
            for r in &rows {
                line(&mut out, &[r.t, r.particle as f64, r.x.x, r.x.y, r.x.z]);
            }
        }
        "speed" => {
            out.push_str("# t particle speed\n");
            for r in &rows {
                line(&mut out, &[r.t, r.particle as f64, r.u.norm() / r.gamma()]);
            }
        }
        "accel" => {
            out.push_str("# t particle proper_acceleration\n");
            for r in &rows {
                line(&mut out, &[r.t, r.particle as f64, r.proper_acceleration()]);
            }
        }
        "larmor" => {
            out.push_str("# t total_larmor_power\n");
            for (t, g) in &groups {
                line(&mut out, &[*t, larmor(g)]);
            }
        }
        "radiated" => {
            out.push_str("# t radiated_energy\n");
            for ((t, _), e) in groups.iter().zip(&radiated) {
                line(&mut out, &[*t, *e]);
            }
        }
        "kinetic" => {
            out.push_str("# t kinetic_energy\n");
            for (t, g) in &groups {
                line(&mut out, &[*t, kinetic(g)]);
            }
        }
        "ledger" => {
            out.push_str("# t delta_kinetic radiated delta_potential closure\n");
            if let Some((_, g0)) = groups.first() {
                let (k0, p0) = (kinetic(g0), potential(g0));
                for ((t, g), e) in groups.iter().zip(&radiated) {
                    let (dk, dp) = (kinetic(g) - k0, potential(g) - p0);
                    line(&mut out, &[*t, dk, *e, dp, dk + e + dp]);
                }
            }
        }
        "separation" => {
            if scenario.particles.len() < 2 {
                return Err(Error::usage("separation needs at least two particles"));
            }
            out.push_str("# t separation_01\n");
            for (t, g) in &groups {
                let a = g.iter().find(|r| r.particle == 0);
                let b = g.iter().find(|r| r.particle == 1);
                if let (Some(a), Some(b)) = (a, b) {
                    line(&mut out, &[*t, (a.x - b.x).norm()]);
                }
            }
        }
        "asymptotic" => {
            let duration = groups.last().map_or(0.0, |g| g.0) - groups.first().map_or(0.0, |g| g.0);
            let window = manifest
                .config
                .output
                .checks
                .iter()
                .find_map(|c| if let Check::Asymptotic { window, .. } = c { Some(*window) } else { None })
                .unwrap_or(0.1 * duration);
            let _ = writeln!(out, "# t trailing_window_max_proper_acceleration (window {})", fmt_f64(window));
            let peaks: Vec<f64> = groups.iter().map(|(_, g)| g.iter().map(Row::proper_acceleration).fold(0.0, f64::max)).collect();
            let mut start = 0;
            for (i, (t, _)) in groups.iter().enumerate() {
                while groups[start].0 < t - window {
                    start += 1;
                }
                let m = peaks[start..=i].iter().copied().fold(0.0, f64::max);
                line(&mut out, &[*t, m]);
            }
        }
        _ => unreachable!("quantity list checked above"),
    }
    write_atomic(&target, out.as_bytes())?;
    Ok(target)
}
