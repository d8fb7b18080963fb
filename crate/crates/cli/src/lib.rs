// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

//! `gainloss` command-line tool.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 oracle-check failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, oracle_check, OracleOptions, Output};
pub use config::{RunConfig, RunMode, Settings, SweepSpec, TimeSpec, Verb};
pub use output::{Cell, Format, Provenance, Table};
pub use presets::{Preset, PresetKind, PresetName, PRESETS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] gainloss_core::Error),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Oracle(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gainloss", version, about = "Spectra, exceptional points and Gaussian correlations of a dissipative gain-loss dimer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean-field eigenvalues and regime labels.
    Spectrum(CommonArgs),
    /// Correlation time series from the vacuum.
    Evolve(CommonArgs),
    /// Stationary correlations.
    Steady(CommonArgs),
    /// Long-time discord on the PT line (gamma_l = big_gamma_g - gamma_g).
    AsymptoticDiscord(CommonArgs),
    /// Regenerate a named figure dataset (fig2, fig4, fig6, fig7, fig8).
    Preset {
        #[arg(value_parser = parse_preset)]
        name: PresetName,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cross-check the covariance propagator against a truncated Fock-space integration.
    #[command(hide = true)]
    OracleCheck(OracleArgs),
}

fn parse_preset(s: &str) -> Result<PresetName, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    #[arg(long)]
    g: Option<f64>,
    #[arg(long = "gamma-l")]
    gamma_l: Option<f64>,
    #[arg(long = "gamma-g")]
    gamma_g: Option<f64>,
    #[arg(long = "big-gamma-g")]
    big_gamma_g: Option<f64>,
    /// name:min:max:count[:log]
    #[arg(long)]
    sweep: Option<String>,
    /// Final time, in units of 1/g unless --absolute-time.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of time samples including t = 0.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interpret --t-max and report times in absolute units.
    #[arg(long = "absolute-time")]
    absolute_time: bool,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            g: self.g,
            gamma_l: self.gamma_l,
            gamma_g: self.gamma_g,
            big_gamma_g: self.big_gamma_g,
            sweep: self.sweep.clone(),
            t_max: self.t_max,
            samples: self.samples,
            format: self.format,
            out: self.out.clone(),
            absolute_time: self.absolute_time.then_some(true),
        };
        Ok(file.overlay(flags))
    }
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Fock cutoff per mode.
    #[arg(long, default_value_t = 30)]
    cutoff: usize,
    /// Scale the propagator's diffusion matrix by this factor (fault injection).
    #[arg(long = "corrupt-diffusion")]
    corrupt_diffusion: Option<f64>,
    /// Run only the named check; repeatable.
    #[arg(long = "only")]
    only: Vec<String>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, table: &Table, prov: &Provenance, format: Format) -> Result<(), CliError> {
    let stamp = output::timestamp_now();
    match out {
        Some(path) => {
            let f = File::create(path)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            output::write_table(&mut w, table, prov, format, &stamp)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            output::write_table(&mut w, table, prov, format, &stamp)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (verb, preset, common) = match cli.command {
        Command::Spectrum(c) => (Some(Verb::Spectrum), None, c),
        Command::Evolve(c) => (Some(Verb::Evolve), None, c),
        Command::Steady(c) => (Some(Verb::Steady), None, c),
        Command::AsymptoticDiscord(c) => (Some(Verb::AsymptoticDiscord), None, c),
        Command::Preset { name, common } => (None, Some(name), common),
        Command::OracleCheck(args) => return run_oracle(args),
    };
    let cfg = RunConfig::resolve(verb, preset, common.settings()?)?;
    let out = execute(&cfg)?;
    write_output(cfg.out.as_deref(), &out.table, &out.provenance, cfg.format)
}

fn run_oracle(args: OracleArgs) -> Result<(), CliError> {
    if args.cutoff < 1 {
        return Err(CliError::Config("cutoff must be at least 1".into()));
    }
    let checks = if args.only.is_empty() {
        commands::OracleCheckName::ALL.to_vec()
    } else {
        args.only
            .iter()
            .map(|s| {
                commands::OracleCheckName::parse(s)
                    .ok_or_else(|| CliError::Config(format!("unknown oracle check '{s}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let opts = OracleOptions {
        cutoff: args.cutoff,
        corrupt_diffusion: args.corrupt_diffusion,
        checks,
    };
    let outcomes = oracle_check(&opts);
    let mut prov = Provenance::new();
    prov.add("command", "oracle-check");
    prov.add(
        "method",
        "truncated-Fock Lindblad integration (Dormand-Prince) against the exact covariance propagator",
    );
    prov.add("cutoff", opts.cutoff.to_string());
    if let Some(f) = opts.corrupt_diffusion {
        prov.add("fault-injection", format!("diffusion scaled by {f}"));
    }
    write_output(
        args.out.as_deref(),
        &commands::oracle_table(&outcomes),
        &prov,
        args.format.unwrap_or_default(),
    )?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.check.label()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Oracle(failed.join(", ")))
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gainloss: {e}");
            e.exit_code()
        }
    }
}
