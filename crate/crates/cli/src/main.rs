use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use hybrid_mac::sweep::{sweep, write_csv};
use hybrid_mac::{
    optimize_with, run_scenario_with, Axis, ConfigFile, CopForm, MacError, OptResult, Protocol, SimStats,
};

/// Optimizer and simulator for a hybrid CSMA/TDMA MAC protocol.
///
/// Durations are in microseconds and rates in bits per microsecond.
#[derive(Debug, Parser)]
#[command(name = "hybrid-mac", version)]
struct Cli {
    /// TOML configuration; the built-in reference profile is used if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Charge NP and AP against the frame budget.
    #[arg(long, global = true)]
    include_overheads: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the admission cap and contention probability.
    Optimize {
        /// Number of contending devices (defaults to the scenario's L).
        #[arg(short = 'L', long = "active")]
        active: Option<u32>,
        /// Expected-COP expression used in the frame budget.
        #[arg(long, value_parser = parse_form)]
        form: Option<CopForm>,
    },
    /// Run one scenario and print aggregate metrics.
    Simulate {
        /// Print one JSON line per frame before the summary.
        #[arg(long)]
        trace: bool,
        /// Override the scenario protocol.
        #[arg(long)]
        protocol: Option<Protocol>,
    },
    /// Run a parameter sweep and write a CSV table.
    Sweep {
        #[arg(long)]
        axis: Option<Axis>,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Comma-separated protocols (hybrid, aloha, tdma).
        #[arg(long, value_delimiter = ',')]
        protocols: Option<Vec<Protocol>>,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_form(s: &str) -> Result<CopForm, String> {
    match s {
        "asymptotic" => Ok(CopForm::Asymptotic),
        "exact" => Ok(CopForm::Exact),
        other => Err(format!("unknown form `{other}` (expected asymptotic or exact)")),
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<MacError>() {
                Some(MacError::Infeasible { .. }) => EXIT_INFEASIBLE,
                Some(_) => EXIT_CONFIG,
                None => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<ConfigFile> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
    }
    if cli.include_overheads {
        cfg.scenario.include_overheads = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    match cli.command {
        Command::Optimize { active, form } => {
            let l_active = match active {
                Some(l) => l,
                None => default_active(&cfg)?,
            };
            let mut opts = cfg.scenario.solver_options();
            if let Some(form) = form {
                opts.form = form;
            }
            let result = optimize_with(l_active, &cfg.timing, &opts)?;
            print_opt(&mut out, &result)?;
        }
        Command::Simulate { trace, protocol } => {
            let mut scenario = cfg.scenario.clone();
            if let Some(p) = protocol {
                scenario.protocol = p;
            }
            let mut io_result = Ok(());
            let stats = run_scenario_with(&scenario, &cfg.timing, |frame| {
                if trace && io_result.is_ok() {
                    io_result = writeln!(out, "{}", frame.trace_line());
                }
            })?;
            io_result?;
            print_stats(&mut out, scenario.protocol, &stats, &cfg)?;
        }
        Command::Sweep {
            axis,
            values,
            protocols,
            out: out_path,
        } => {
            let spec = cfg.sweep.as_ref();
            let axis = axis
                .or(spec.map(|s| s.axis))
                .ok_or_else(|| anyhow!("sweep axis not given (--axis or [sweep].axis)"))?;
            let values = values
                .or_else(|| spec.map(|s| s.values.clone()))
                .ok_or_else(|| anyhow!("sweep values not given (--values or [sweep].values)"))?;
            let protocols = protocols
                .or_else(|| spec.map(|s| s.protocols.clone()))
                .unwrap_or_else(|| Protocol::ALL.to_vec());
            let rows = sweep(axis, &values, &protocols, &cfg.scenario, &cfg.timing)?;
            match out_path {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    write_csv(&rows, BufWriter::new(file)).with_context(|| format!("cannot write {}", path.display()))?;
                }
                None => write_csv(&rows, &mut out)?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn default_active(cfg: &ConfigFile) -> anyhow::Result<u32> {
    use hybrid_mac::ActivityRule;
    let k = f64::from(cfg.scenario.k_total);
    Ok(match cfg.scenario.activity {
        ActivityRule::FixedFraction(f) | ActivityRule::PerDeviceProb(f) => (f * k).round() as u32,
        ActivityRule::FixedCount(n) => n,
    })
}

fn print_opt<W: Write>(out: &mut W, r: &OptResult) -> anyhow::Result<()> {
    writeln!(out, "L         = {}", r.l_active)?;
    writeln!(out, "M_opt     = {}", r.m_opt)?;
    writeln!(out, "p_opt     = {:.6}", r.p_opt)?;
    writeln!(out, "T_COP,opt = {:.3} us", r.t_cop_opt)?;
    writeln!(out, "C_total   = {:.0} bits/frame", r.c_total)?;
    writeln!(out, "{}", serde_json::to_string(r)?)?;
    Ok(())
}

fn print_stats<W: Write>(out: &mut W, protocol: Protocol, s: &SimStats, cfg: &ConfigFile) -> anyhow::Result<()> {
    writeln!(out, "protocol          = {protocol}")?;
    writeln!(out, "frames            = {}", s.frames)?;
    writeln!(out, "mean_throughput   = {:.1} bits/frame", s.mean_throughput)?;
    writeln!(out, "throughput        = {:.1} bit/s", s.throughput_bps(&cfg.timing))?;
    writeln!(out, "utility           = {:.6}", s.utility)?;
    match s.mean_delay {
        Some(d) => writeln!(out, "mean_delay        = {d:.3} us")?,
        None => writeln!(out, "mean_delay        = n/a (nothing delivered)")?,
    }
    writeln!(out, "infeasible_frames = {}", s.infeasible_frames)?;
    writeln!(out, "{}", serde_json::to_string(s)?)?;
    Ok(())
}
