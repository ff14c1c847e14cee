use std::path::PathBuf;
use std::process::ExitCode;

use cburgers_cli::config::OUT_ENV;
use cburgers_cli::{parse_config, run, Overrides};
use clap::Parser;

/// Exact series, spectral runs and bound checks for complex Burgers and
/// KdV-Burgers equations.
#[derive(Parser, Debug)]
#[command(name = "cburgers", version)]
struct Args {
    /// series, simulate, blowup-cert, partitions or bounds.
    command: Option<String>,

    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Working precision in bits.
    #[arg(long)]
    precision: Option<u32>,
    /// Output directory (default: $CBURGERS_OUT, then the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,

    /// Initial data: inline JSON `[{"k":1,"re":"1/2","im":0}]` or a file path.
    #[arg(long)]
    init: Option<String>,
    /// Single-mode shorthand for the initial amplitude a_01.
    #[arg(long)]
    a01: Option<String>,

    #[arg(long)]
    dt: Option<f64>,
    /// Galerkin modes.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    k_max: Option<u32>,
    /// `start:end:points`, or `log:start:end:points`.
    #[arg(long)]
    t_grid: Option<String>,
    /// Comma-separated subset of csv,json.
    #[arg(long)]
    formats: Option<String>,

    /// ifeuler, ifrk4 or ifrk6.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    blowup_cap: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Comma-separated Sobolev orders.
    #[arg(long)]
    hs: Option<String>,
    /// Run the solver in MPFR arithmetic at --precision bits.
    #[arg(long)]
    big_float: bool,

    /// Certificate threshold base.
    #[arg(long = "A")]
    amp: Option<String>,
    /// Number of certified modes (default: k_max).
    #[arg(long = "K")]
    k_cert: Option<u32>,
    /// Certificate time (default: just past the verified T0 bound).
    #[arg(long = "T")]
    t_cert: Option<String>,

    /// geometric, coefficients, envelope or sign.
    #[arg(long)]
    check: Option<String>,
    #[arg(long = "C2")]
    c2: Option<f64>,
    /// `lo:hi` window for the decay fit.
    #[arg(long)]
    fit_window: Option<String>,
}

impl From<Args> for Overrides {
    fn from(a: Args) -> Self {
        Overrides {
            command: a.command,
            config: a.config,
            nu: a.nu,
            alpha: a.alpha,
            gamma: a.gamma,
            precision: a.precision,
            out: a.out,
            threads: a.threads,
            init: a.init,
            a01: a.a01,
            dt: a.dt,
            n: a.n,
            t_end: a.t_end,
            k_max: a.k_max,
            t_grid: a.t_grid,
            formats: a.formats,
            scheme: a.scheme,
            blowup_cap: a.blowup_cap,
            record_every: a.record_every,
            hs: a.hs,
            big_float: a.big_float,
            amp: a.amp,
            k_cert: a.k_cert,
            t_cert: a.t_cert,
            check: a.check,
            c2: a.c2,
            fit_window: a.fit_window,
        }
    }
}

fn main() -> ExitCode {
    let ov: Overrides = Args::parse().into();
    let env_out = std::env::var_os(OUT_ENV).map(PathBuf::from);
    let cfg = match parse_config(&ov, env_out) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
