use std::fs;
use std::path::Path as FsPath;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

use mcced_core::harness::{emit_plotdata, load_builtin, parse_scenario_str, run, RunManifest, BUILTINS, PLOT_QUANTITIES};
use mcced_core::Error;

const PAIR: &str = r#"[scenario]
name = "pair"

[[particles]]
charge = 1.0
mass = 1.0
position = [-3.0, 0.0, 0.0]

[[particles]]
charge = 1.0
mass = 1.0
position = [3.0, 0.0, 0.0]

[topology]
mode = "mc-ced"
p = 1.0

[integrator]
method = "nbody-retarded"
dt = 0.1
t_end = 5.0
"#;

fn parse_line(src: &str) -> (Option<usize>, String) {
    match parse_scenario_str(src, None) {
        Err(Error::Parse { line, message, .. }) => (line, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

fn line_of(src: &str, needle: &str) -> usize {
    src.lines().position(|l| l.contains(needle)).expect("needle present") + 1
}

#[test]
fn valid_pair_parses() {
    let e = parse_scenario_str(PAIR, None).unwrap();
    assert_eq!(e.name, "pair");
    assert_eq!(e.scenario.unwrap().particles.len(), 2);
}

#[test]
fn zero_arrow_parameter_is_rejected_at_its_line() {
    let src = PAIR.replace("p = 1.0", "p = 0.0");
    let (line, msg) = parse_line(&src);
    assert_eq!(line, Some(line_of(&src, "[topology]")), "{msg}");
}

#[test]
fn mc_ced_with_free_field_is_rejected() {
    let src = PAIR.replace(
        "p = 1.0",
        "p = 1.0\nfree_field = { kind = \"plane-wave\", amplitude = 1.0, polarization = [0.0, 1.0, 0.0], direction = [1.0, 0.0, 0.0], frequency = 1.0 }",
    );
    let (line, msg) = parse_line(&src);
    assert_eq!(line, Some(line_of(&src, "[topology]")), "{msg}");
    assert!(msg.contains("free"), "{msg}");
}

#[test]
fn unknown_key_is_reported_with_line() {
    let src = PAIR.replace("dt = 0.1", "dt = 0.1\nstepsize = 2.0");
    let (line, msg) = parse_line(&src);
    assert_eq!(line, Some(line_of(&src, "stepsize")), "{msg}");
}

#[test]
fn single_charge_mc_ced_is_rejected() {
    let second = PAIR.rfind("[[particles]]").unwrap();
    let topo = PAIR.find("[topology]").unwrap();
    let src = format!("{}{}", &PAIR[..second], &PAIR[topo..]);
    let (line, msg) = parse_line(&src);
    assert!(line.is_some(), "{msg}");
    assert!(msg.contains("N ≥ 2") || msg.contains("two"), "{msg}");
}

#[test]
fn malformed_toml_reports_line() {
    let src = PAIR.replace("mass = 1.0\nposition = [3.0", "mass = = 1.0\nposition = [3.0");
    let (line, _) = parse_line(&src);
    assert_eq!(line, Some(line_of(&src, "mass = = 1.0")));
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn manifest_hashes_match_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let exp = parse_scenario_str(PAIR, None).unwrap();
    let m = run(&exp, dir.path(), 3).unwrap();
    assert!(m.success());
    assert_eq!(m.seed, 3);
    let on_disk: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk.content_hash, m.content_hash);
    assert!(!m.outputs.is_empty());
    for o in &m.outputs {
        assert_eq!(sha256_hex(&fs::read(dir.path().join(&o.name)).unwrap()), o.sha256, "{}", o.name);
    }
}

#[test]
fn every_builtin_parses_with_a_description() {
    for b in &BUILTINS {
        let e = load_builtin(b.name).unwrap();
        assert_eq!(e.name, b.name);
        assert!(!e.description.is_empty(), "{}", b.name);
    }
}

#[test]
fn plot_quantities_for_a_pair_run() {
    let dir = tempfile::tempdir().unwrap();
    let exp = parse_scenario_str(PAIR, None).unwrap();
    run(&exp, dir.path(), 0).unwrap();
    let manifest = dir.path().join("manifest.json");
    for q in PLOT_QUANTITIES.iter().filter(|q| **q != "parity") {
        let p = emit_plotdata(&manifest, q).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('#'), "{q}");
        let first: Vec<f64> = lines.next().unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
        assert!(first.len() >= 2, "{q}");
    }
    let ledger = fs::read_to_string(dir.path().join("ledger.dat")).unwrap();
    let last: Vec<f64> = ledger.lines().last().unwrap().split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!(last[1] > 0.0 && last[3] < 0.0);
    assert!(matches!(emit_plotdata(&manifest, "parity"), Err(Error::Usage(_))));
    assert!(matches!(emit_plotdata(&manifest, "nonsense"), Err(Error::Usage(_))));
}

fn mcced(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcced")).args(args).output().unwrap()
}

fn write(dir: &FsPath, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let good = write(dir.path(), "pair.toml", PAIR);
    let o = mcced(&["run", &good, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trajectory.csv").exists());

    let bad = write(dir.path(), "bad.toml", &PAIR.replace("p = 1.0", "p = 0.0"));
    let o = mcced(&["run", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(65));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(&format!("bad.toml:{}", line_of(PAIR, "[topology]"))), "{err}");

    let o = mcced(&["run", "no-such-scenario", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());

    let o = mcced(&["plot", out.join("manifest.json").to_str().unwrap(), "--quantity", "bogus"]);
    assert_eq!(o.status.code(), Some(64));

    let o = mcced(&["list-scenarios"]);
    let listing = String::from_utf8_lossy(&o.stdout);
    for b in &BUILTINS {
        assert!(listing.contains(b.name));
    }
}

#[test]
fn cli_algebra_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.alg", "N 3\nCOMM alpha(1) ; alphad(1) => 3/2\nNORM alphad(0) => -3/2\n");
    let o = mcced(&["algebra", &ok]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout).matches("[PASS]").count(), 2);

    let wrong = write(dir.path(), "wrong.alg", "COMM a(1,1) ; ad(2,1) => -1\n");
    assert_eq!(mcced(&["algebra", &wrong]).status.code(), Some(1));

    let broken = write(dir.path(), "broken.alg", "N 2\nCOMM a(1, ; b\n");
    let o = mcced(&["algebra", &broken]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.alg:2"));
}
