//! Named built-in experiments, embedded from `scenarios/*.toml`.

use std::path::Path as FsPath;

use super::config::{parse_scenario, parse_scenario_str, Experiment};
use crate::error::{Error, Result};

pub struct Builtin {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! builtin {
    ($name:literal) => {
        Builtin { name: $name, source: include_str!(concat!("../../scenarios/", $name, ".toml")) }
    };
}

pub const BUILTINS: [Builtin; 10] = [
    builtin!("static-pair"),
    builtin!("coulomb-scatter"),
    builtin!("circular-B"),
    builtin!("step-force"),
    builtin!("inspiral-pair"),
    builtin!("outspiral-advanced"),
    builtin!("runaway-demo"),
    builtin!("preacceleration"),
    builtin!("symmetry-suite"),
    builtin!("algebra-suite"),
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

pub fn load_builtin(name: &str) -> Result<Experiment> {
    let b = builtin(name).ok_or_else(|| {
        let names: Vec<&str> = BUILTINS.iter().map(|b| b.name).collect();
        Error::usage(format!("unknown scenario {name:?}; built-ins are {}", names.join(", ")))
    })?;
    parse_scenario_str(b.source, Some(FsPath::new(&format!("builtin:{}", b.name))))
}

/// A path to an existing file, otherwise a built-in name.
pub fn resolve(arg: &str) -> Result<Experiment> {
    let p = FsPath::new(arg);
    if p.is_file() {
        parse_scenario(p)
    } else {
        load_builtin(arg)
    }
}
