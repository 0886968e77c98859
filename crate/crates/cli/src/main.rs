//! Command-line front end for the simulator.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commsim::algorithms::ParamSchedule;
use commsim::compressors::{min_bits_lower_bound, CompressorKind, CompressorSpec, CompressorState, Randomness};
use commsim::harness::{compute_tcc, run_experiment, tune_grid, ExperimentConfig, GridSpec};
use commsim::lowerbound::{audit_sc_floor, simulate_progress};
use commsim::problems::gen_zero_chain_sc;
use commsim::trace::read_traces_csv;
use commsim::{Error, Trace};

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "commsim", version, about = "Distributed optimization under communication compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write raw and summary CSVs.
    Run {
        config: PathBuf,
        /// Output directory (overrides `[run] output`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid-search algorithm parameters on a truncated horizon.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Share of the configured rounds used per grid point.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Progress simulation under random sparsification, with an optional floor audit.
    Lowerbound {
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-round mean and standard deviation of the chain depth here.
        #[arg(long)]
        traces: Option<PathBuf>,
        /// Run ADIANA on a truncated hard instance and write the floor audit here.
        #[arg(long)]
        audit: Option<PathBuf>,
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long, default_value_t = 200)]
        dim: usize,
        /// Coordinates kept by the audit's random sparsifier.
        #[arg(long, default_value_t = 2)]
        s: usize,
    },
    /// Per-message bit cost of a compressor and the matching lower bound.
    Bits {
        #[arg(long, value_enum)]
        compressor: Kind,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 64)]
        r: u32,
    },
    /// Rounds and bits to reach each accuracy in a raw trace CSV.
    Tcc {
        raw: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        eps: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Identity,
    RandomS,
    UnscaledRandomS,
    Natural,
    Quantize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter(_) | Error::Parse { .. } | Error::Schedule { .. } => {
                    ExitCode::from(EXIT_CONFIG)
                }
                Error::AllDiverged(_) | Error::Diverged { .. } => ExitCode::from(EXIT_DIVERGED),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(command: Command) -> commsim::Result<ExitCode> {
    match command {
        Command::Run { config, output } => run(config, output),
        Command::Sweep { config, grid, budget } => sweep(config, grid, budget),
        Command::Lowerbound {
            omega,
            n,
            rounds,
            trials,
            seed,
            traces,
            audit,
            kappa,
            dim,
            s,
        } => lowerbound(omega, n, rounds, trials, seed, traces, audit.map(|p| (p, kappa, dim, s))),
        Command::Bits {
            compressor,
            d,
            s,
            levels,
            r,
        } => bits(compressor, d, s, levels, r),
        Command::Tcc { raw, eps } => tcc(raw, eps),
    }
}

fn run(config: PathBuf, output: Option<PathBuf>) -> commsim::Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if output.is_some() {
        cfg.run.output = output;
    }
    let result = run_experiment(&cfg)?;
    let mut out = io::stdout().lock();
    writeln!(out, "eps,rounds,bits")?;
    for t in &result.tcc {
        match (t.rounds, t.bits) {
            (Some(k), Some(b)) => writeln!(out, "{},{k},{b}", t.eps)?,
            _ => writeln!(out, "{},unreached,unreached", t.eps)?,
        }
    }
    if result.partial {
        let n = result.traces.iter().filter(|t| t.diverged).count();
        eprintln!("warning: {n} of {} trials diverged", result.traces.len());
        return Ok(ExitCode::from(EXIT_DIVERGED));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(config: PathBuf, grid: PathBuf, budget: Option<f64>) -> commsim::Result<ExitCode> {
    let cfg = ExperimentConfig::load(&config)?;
    let grid = GridSpec::load(&grid)?;
    let result = tune_grid(&cfg, &grid, budget)?;
    let mut out = io::stdout().lock();
    let names: Vec<&str> = grid.axes.keys().map(String::as_str).collect();
    writeln!(out, "{},final_subopt", names.join(","))?;
    for e in &result.evaluations {
        let vals: Vec<String> = e.point.iter().map(|(_, v)| v.to_string()).collect();
        let f = e.final_subopt.map_or("diverged".to_string(), |v| v.to_string());
        writeln!(out, "{},{f}", vals.join(","))?;
    }
    let best: Vec<String> = result.best.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("best over {} rounds: {}", result.rounds, best.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn lowerbound(
    omega: f64,
    n: usize,
    rounds: usize,
    trials: usize,
    seed: u64,
    traces: Option<PathBuf>,
    audit: Option<(PathBuf, f64, usize, usize)>,
) -> commsim::Result<ExitCode> {
    let stats = simulate_progress(omega, n, rounds, trials, seed)?;
    let p = 1.0 / (1.0 + omega);
    let mut out = io::stdout().lock();
    writeln!(out, "omega,n,rounds,trials,p,mean_final,se_final,binomial_mean,bound,frac_below_bound")?;
    writeln!(
        out,
        "{omega},{n},{rounds},{trials},{p},{},{},{},{},{}",
        stats.mean_final,
        stats.se_final,
        rounds as f64 * p,
        std::f64::consts::E * rounds as f64 * p,
        stats.frac_below_bound
    )?;
    if let Some(path) = traces {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "round,depth_mean,depth_std")?;
        for t in 0..=rounds {
            let vals: Vec<f64> = stats.traces.iter().map(|tr| tr.depth[t] as f64).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = if vals.len() > 1 {
                vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
            } else {
                0.0
            };
            writeln!(w, "{t},{m},{}", var.sqrt())?;
        }
        w.flush()?;
    }
    let mut violated = false;
    if let Some((path, kappa, dim, s)) = audit {
        let mu = 1.0;
        let hard = gen_zero_chain_sc(kappa * mu, mu, n, dim, 1.0)?;
        let spec = CompressorSpec::random_s(s, Randomness::Independent);
        let comp = CompressorState::new(spec, dim, seed)?;
        let sched = ParamSchedule::strongly_convex(hard.problem.smoothness, mu, n, comp.omega())?;
        let checks = audit_sc_floor(&hard, &comp, &sched, rounds, 1)?;
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "round,subopt,prog,floor,holds")?;
        for c in &checks {
            let ok = c.holds(1e-6);
            violated |= !ok;
            writeln!(w, "{},{},{},{},{ok}", c.round, c.subopt, c.prog, c.floor)?;
        }
        w.flush()?;
        if violated {
            eprintln!("floor audit: violations found");
        }
    }
    Ok(if violated { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn bits(kind: Kind, d: usize, s: Option<usize>, levels: Option<usize>, r: u32) -> commsim::Result<ExitCode> {
    let need_s = || s.ok_or_else(|| Error::Config("this compressor needs --s".into()));
    let kind = match kind {
        Kind::Identity => CompressorKind::Identity,
        Kind::RandomS => CompressorKind::RandomS { s: need_s()? },
        Kind::UnscaledRandomS => CompressorKind::UnscaledRandomS { s: need_s()? },
        Kind::Natural => CompressorKind::Natural,
        Kind::Quantize => CompressorKind::Quantize { levels },
    };
    let spec = CompressorSpec {
        kind,
        randomness: Randomness::Independent,
        r_bits: r,
    };
    spec.validate(d)?;
    let omega = spec.omega(d);
    let cost = spec.fixed_bits(d).map_or("variable".to_string(), |b| b.to_string());
    let mut out = io::stdout().lock();
    writeln!(out, "compressor,d,omega,bits_per_message,lower_bound")?;
    writeln!(out, "{spec},{d},{omega},{cost},{}", min_bits_lower_bound(d, omega, r))?;
    Ok(ExitCode::SUCCESS)
}

fn tcc(raw: PathBuf, eps: Vec<f64>) -> commsim::Result<ExitCode> {
    let traces = read_traces_csv(BufReader::new(File::open(&raw)?))?;
    let mut groups: Vec<(String, Vec<Trace>)> = Vec::new();
    for t in traces {
        let key = format!("{},{}", t.meta.algorithm, t.meta.compressor);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(t),
            None => groups.push((key, vec![t])),
        }
    }
    let mut out = io::stdout().lock();
    writeln!(out, "algorithm,compressor,eps,rounds,bits")?;
    for (key, group) in &groups {
        for &e in &eps {
            let t = compute_tcc(group, e);
            match (t.rounds, t.bits) {
                (Some(k), Some(b)) => writeln!(out, "{key},{e},{k},{b}")?,
                _ => writeln!(out, "{key},{e},unreached,unreached")?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
