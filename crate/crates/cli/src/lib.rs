//! Command-line front end for the `primeseries` experiments.
//!
//! Every subcommand resolves a flat settings map (defaults, then an optional
//! `--config` file, then flags), runs one experiment and emits a versioned
//! JSON envelope and/or plot-ready CSV. Exit codes: `0` all checks passed,
//! `1` a check failed, `2` usage or domain error.

mod commands;
pub mod settings;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgMatches, Command};

use settings::{key, KeySpec, Settings};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub struct CliError(pub String);

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl From<primeseries::Error> for CliError {
    fn from(e: primeseries::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self(format!("i/o error: {e}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

const COMMON: [KeySpec; 4] = [
    key("out", "out", None, "Directory for output files (stdout when absent)"),
    key("format", "format", Some("json"), "Output formats: json, csv or json,csv"),
    key("prime.limit", "prime-limit", None, "Sieve limit (defaults to the largest cutoff needed)"),
    key("prime.cache", "prime-cache", None, "Prime cache file, read if present and written otherwise"),
];

pub(crate) const NOISE: [KeySpec; 5] = [
    key("noise.kind", "noise", Some("rademacher"), "rademacher, gaussian, centered_uniform or two_point"),
    key("noise.sigma2", "sigma2", None, "Noise variance (default 1)"),
    key("noise.two_point.a", "two-point-a", None, "Two-point law: first atom"),
    key("noise.two_point.b", "two-point-b", None, "Two-point law: second atom"),
    key("noise.two_point.q", "two-point-q", None, "Two-point law: probability of the first atom"),
];

pub(crate) const SEED: KeySpec = key("seed", "seed", None, "Master seed (required for randomized runs)");

fn subcommand(name: &'static str, about: &'static str, specs: &[KeySpec]) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("Flat key=value settings file; flags take precedence"),
    );
    for spec in specs {
        cmd = cmd.arg(
            Arg::new(spec.key)
                .long(spec.flag)
                .value_name("VALUE")
                .help(spec.help)
                .allow_hyphen_values(true),
        );
    }
    cmd
}

fn all_specs(command: &str) -> Vec<KeySpec> {
    let mut specs = commands::specs(command);
    specs.extend_from_slice(&COMMON);
    specs
}

pub fn command() -> Command {
    let mut cmd = Command::new("primeseries")
        .about("Random Dirichlet series over primes and random multiplicative functions")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in commands::SUBCOMMANDS {
        cmd = cmd.subcommand(subcommand(name, about, &all_specs(name)));
    }
    cmd
}

fn settings_from(name: &str, matches: &ArgMatches) -> Result<Settings, CliError> {
    let specs = all_specs(name);
    let file = match matches.get_one::<String>("config") {
        Some(path) => settings::read_config_file(&PathBuf::from(path))?,
        None => BTreeMap::new(),
    };
    let flags = specs
        .iter()
        .filter_map(|s| matches.get_one::<String>(s.key).map(|v| (s.key.to_string(), v.clone())))
        .collect();
    Settings::merge(&specs, file, flags)
}

/// Selected output formats.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Formats {
    pub json: bool,
    pub csv: bool,
}

pub(crate) fn formats(settings: &Settings) -> Result<Formats, CliError> {
    let mut f = Formats { json: false, csv: false };
    for item in settings.require("format")?.split(',') {
        match item.trim() {
            "json" => f.json = true,
            "csv" => f.csv = true,
            other => return Err(CliError::usage(format!("unknown format `{other}`"))),
        }
    }
    Ok(f)
}

/// Output of one subcommand before it is written anywhere.
pub(crate) struct Output {
    pub name: &'static str,
    pub json: String,
    /// `(file stem, contents)`; the first entry is the one printed to stdout.
    pub csv: Vec<(String, String)>,
    pub pass: bool,
    pub summary: String,
}

fn emit(settings: &Settings, output: &Output, stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = formats(settings)?;
    match settings.get("out") {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir)?;
            if f.json {
                std::fs::write(dir.join(format!("{}.json", output.name)), &output.json)?;
            }
            if f.csv {
                for (stem, body) in &output.csv {
                    std::fs::write(dir.join(format!("{stem}.csv")), body)?;
                }
            }
            writeln!(stdout, "{}", output.summary)?;
        }
        None => {
            if f.json {
                writeln!(stdout, "{}", output.json)?;
            }
            if f.csv {
                if let Some((_, body)) = output.csv.first() {
                    write!(stdout, "{body}")?;
                }
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the selected subcommand
/// and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        let _ = writeln!(stderr, "error: a subcommand is required");
        return EXIT_USAGE;
    };
    let result = settings_from(name, sub).and_then(|settings| {
        let output = commands::dispatch(name, &settings)?;
        emit(&settings, &output, stdout)?;
        Ok(output.pass)
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            let _ = writeln!(stderr, "{name}: check failed");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
