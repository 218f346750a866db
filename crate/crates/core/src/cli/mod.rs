//! The `harvestkit` command line: sweeps, plot scripts and the self-check.

pub mod config;
pub mod selfcheck;
pub mod sweep;

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Arg, ArgAction, Command};

use config::{build_spec, known_keys, parse_config_text, ConfigError, Kind, KINDS};
use selfcheck::{run_selfcheck, SelfcheckOptions};
use sweep::{plot_script, run_sweep, SweepError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_SELFCHECK: i32 = 4;

fn kebab(key: &str) -> &'static str {
    Box::leak(key.replace('_', "-").into_boxed_str())
}

fn command() -> Command {
    let kinds: Vec<&'static str> = KINDS.iter().map(|k| k.name()).collect();
    let mut cmd = Command::new("harvestkit")
        .version(sweep::VERSION)
        .about("Second-order detector-pair density matrices and sweeps")
        .arg(
            Arg::new("kind")
                .required(true)
                .value_parser(clap::builder::PossibleValuesParser::new(kinds)),
        )
        .arg(Arg::new("config").long("config").value_name("PATH").help("key = value file"))
        .arg(
            Arg::new("plot-script")
                .long("plot-script")
                .value_name("PATH")
                .help("also write a matplotlib script for the CSV"),
        )
        .arg(
            Arg::new("bose-perturbation")
                .long("bose-perturbation")
                .value_name("EPS")
                .allow_hyphen_values(true)
                .value_parser(clap::value_parser!(f64))
                .help("selfcheck only: relative error injected into the Bose factor"),
        );
    for (key, help) in known_keys() {
        cmd = cmd.arg(
            Arg::new(key)
                .long(kebab(key))
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .action(ArgAction::Set)
                .help(help),
        );
    }
    cmd
}

fn config_failure(e: &ConfigError) -> i32 {
    eprintln!("harvestkit: configuration error: {e}");
    EXIT_CONFIG
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let kind = Kind::parse(m.get_one::<String>("kind").expect("required")).expect("checked by clap");

    if kind == Kind::Selfcheck {
        let opts = SelfcheckOptions {
            bose_perturbation: m.get_one::<f64>("bose-perturbation").copied().unwrap_or(0.0),
        };
        let reports = run_selfcheck(opts);
        for r in &reports {
            println!("{r}");
        }
        let failed = reports.iter().filter(|r| !r.passed).count();
        println!("{} suites, {} failed", reports.len(), failed);
        return if failed == 0 { EXIT_OK } else { EXIT_SELFCHECK };
    }

    let file = match m.get_one::<String>("config") {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config_text(&text) {
                Ok(f) => f,
                Err(e) => return config_failure(&e),
            },
            Err(e) => {
                eprintln!("harvestkit: cannot read {path}: {e}");
                return EXIT_CONFIG;
            }
        },
        None => BTreeMap::new(),
    };
    let flags: BTreeMap<String, String> = known_keys()
        .filter_map(|(key, _)| m.get_one::<String>(key).map(|v| (key.to_string(), v.clone())))
        .collect();
    let spec = match build_spec(kind, &file, &flags) {
        Ok(s) => s,
        Err(e) => return config_failure(&e),
    };

    match run_sweep(&spec) {
        Ok(table) => log::info!("{} rows written to {}", table.rows.len(), spec.output_path),
        Err(SweepError::Config(e)) => return config_failure(&e),
        Err(e @ SweepError::Compute { .. }) => {
            eprintln!("harvestkit: {e}");
            return EXIT_COMPUTE;
        }
        Err(e @ SweepError::Io(_)) => {
            eprintln!("harvestkit: {e}");
            return EXIT_COMPUTE;
        }
    }
    if let Some(path) = m.get_one::<String>("plot-script") {
        if let Err(e) = std::fs::write(path, plot_script(&spec, &spec.output_path)) {
            eprintln!("harvestkit: cannot write {path}: {e}");
            return EXIT_COMPUTE;
        }
    }
    EXIT_OK
}
