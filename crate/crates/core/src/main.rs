use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcced_core::harness::{emit_plotdata, load_builtin, resolve, run, run_criterion, suite_criteria, Suite, BUILTINS};
use mcced_core::photon::run_script;
use mcced_core::Error;

#[derive(Parser)]
#[command(name = "mcced", version, about = "Point-charge electrodynamics experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or built-in scenario.
    Run {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Write plot data for a finished run.
    Plot {
        manifest: PathBuf,
        #[arg(long)]
        quantity: String,
    },
    /// Evaluate a photon-algebra expression script.
    Algebra { file: PathBuf },
    /// Run acceptance criteria.
    Check {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    exit(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, seed } => {
            let exp = match resolve(&scenario) {
                Ok(e) => e,
                Err(e) => return fail(&e),
            };
            let m = match run(&exp, &out, seed) {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            for o in &m.outputs {
                println!("wrote {} ({} rows, sha256 {})", out.join(&o.name).display(), o.rows, o.sha256);
            }
            for c in &m.checks {
                println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(e) = &m.error {
                eprintln!("error ({}): {}", e.code, e.message);
            }
            exit(m.exit_code())
        }
        Command::ListScenarios => {
            for b in &BUILTINS {
                let desc = load_builtin(b.name).map(|e| e.description).unwrap_or_else(|e| format!("invalid: {e}"));
                println!("{:<20} {}", b.name, desc);
            }
            ExitCode::SUCCESS
        }
        Command::Plot { manifest, quantity } => match emit_plotdata(&manifest, &quantity) {
            Ok(p) => {
                println!("{}", p.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Algebra { file } => {
            let src = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => return fail(&Error::Io(e)),
            };
            let outcome = match run_script(&src) {
                Ok(o) => o,
                Err(Error::Parse { line, message, .. }) => return fail(&Error::Parse { path: Some(file), line, message }),
                Err(e) => return fail(&e),
            };
            for l in &outcome.lines {
                let verdict = match l.pass {
                    Some(true) => " [PASS]",
                    Some(false) => " [FAIL]",
                    None => "",
                };
                println!("{:>4}: {} {} => {}{}", l.line, l.command, l.input, l.result, verdict);
            }
            if outcome.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Check { suite } => {
            let mut ok = true;
            for c in suite_criteria(suite) {
                let r = run_criterion(c);
                println!("{}", r.line());
                ok &= r.pass;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
