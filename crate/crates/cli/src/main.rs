//! `hessian-blowup`: indices, transforms, barriers and radial blow-up solves
//! from the command line.

mod commands;
mod config;
mod experiment;
mod plot;

use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches};

use config::{flag_name, RawConfig, KEYS};
use experiment::{CliError, Command, Experiment};

const SUBCOMMANDS: [(Command, &str); 7] = [
    (Command::Indices, "Index functions and their limit constants"),
    (Command::Transform, "Closed-form and numeric inverse-integral transforms"),
    (Command::Barrier, "Sub- and supersolution constants with pointwise verification"),
    (Command::Solve, "Radial blow-up solution by the monotone truncated scheme"),
    (Command::Rate, "Boundary rate against its predicted bracket"),
    (Command::Sweep, "Parameter sweep toward a degenerate weight exponent"),
    (Command::Selftest, "Built-in invariant suite"),
];

fn cli() -> clap::Command {
    let shared: Vec<Arg> = std::iter::once(
        Arg::new("config").long("config").value_name("FILE").help("Configuration file with [problem], [solver], [output]"),
    )
    .chain(KEYS.iter().map(|&(section, key, default)| {
        let help = if default.is_empty() { format!("[{section}] {key}") } else { format!("[{section}] {key} (default {default})") };
        Arg::new(format!("{section}.{key}"))
            .long(flag_name(key))
            .value_name("VALUE")
            .allow_hyphen_values(true)
            .action(ArgAction::Set)
            .help(help)
    }))
    .collect();
    clap::Command::new("hessian-blowup")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Boundary blow-up solutions of k-Hessian equations on balls")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommands(
            SUBCOMMANDS.iter().map(|&(cmd, about)| clap::Command::new(cmd.name()).about(about).args(shared.clone())),
        )
}

fn configure(command: Command, m: &ArgMatches) -> Result<Experiment, CliError> {
    let mut raw = RawConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        raw.apply_file(&text)?;
    }
    for &(section, key, _) in KEYS {
        let full = format!("{section}.{key}");
        if let Some(v) = m.get_one::<String>(&full) {
            raw.set_flag(&full, v.clone());
        }
    }
    Experiment::resolve(command, raw)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some((name, sub)) = matches.subcommand() else { return ExitCode::from(1) };
    let command = SUBCOMMANDS.iter().map(|&(c, _)| c).find(|c| c.name() == name).expect("registered subcommand");
    let result = configure(command, sub).and_then(|exp| {
        if exp.csv.as_deref() == Some(Path::new("-")) {
            commands::run(&exp, &mut io::stderr().lock())
        } else {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            commands::run(&exp, &mut out)?;
            out.flush().map_err(CliError::from)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hessian-blowup {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
