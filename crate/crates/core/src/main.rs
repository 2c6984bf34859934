use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use mlamatch::ga::{optimize, Problem, SearchSpace, PARAM_NAMES};
use mlamatch::io::config::RunConfig;
use mlamatch::io::export::{aperture_csv, history_csv, sweep_csv, touchstone};
use mlamatch::io::{load_config, read_csv, sweep_model};
use mlamatch::waveguide::MatchingConfig;

#[derive(Parser)]
#[command(name = "mlamatch", version, about = "Matching-network design for dielectric-filled open-ended waveguide antennas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection of the bare aperture over the band.
    Aperture {
        #[arg(long)]
        config: PathBuf,
        /// Sweep CSV of Γ_ap; defaults to `output.sweep_csv`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Normalized admittance table; defaults to `output.aperture_csv`.
        #[arg(long)]
        admittance: Option<PathBuf>,
        #[arg(long)]
        touchstone: Option<PathBuf>,
    },
    /// Input reflection of a given matching network (or the bare aperture).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Five section lengths l1..l5 in mm.
        #[arg(long, value_parser = mm_list::<5>, requires = "heights_mm")]
        lengths_mm: Option<[f64; 5]>,
        /// Three section heights b1..b3 in mm.
        #[arg(long, value_parser = mm_list::<3>, requires = "lengths_mm")]
        heights_mm: Option<[f64; 3]>,
        /// CSV output; defaults to `output.sweep_csv`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        touchstone: Option<PathBuf>,
    },
    /// Genetic search for the section lengths and heights.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Sweep CSV of the winning network.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(long)]
        touchstone: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Convert a sweep CSV into a one-port Touchstone file.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Reference impedance in ohms.
        #[arg(long, required_unless_present = "config")]
        z_ref: Option<f64>,
        /// Takes the reference impedance from this configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn mm_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated values, got {}", v.len()))
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn z_ref(cfg: &RunConfig) -> anyhow::Result<f64> {
    match cfg.z_ref {
        Some(z) => Ok(z),
        None => Ok(cfg.feed_impedance()?),
    }
}

fn describe(cfg: &MatchingConfig) -> String {
    PARAM_NAMES
        .iter()
        .zip(cfg.l.iter().chain(&cfg.bh))
        .map(|(n, v)| format!("{n} = {:.4} mm", v * 1e3))
        .collect::<Vec<_>>()
        .join(", ")
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Aperture {
            config,
            out,
            admittance,
            touchstone: ts,
        } => {
            let cfg = load_config(&config)?;
            let model = cfg.aperture_model()?;
            let result = sweep_model(&model, None, &cfg.network)?;
            emit(out.or(cfg.outputs.sweep_csv.clone()).as_deref(), &sweep_csv(&result))?;
            if let Some(p) = admittance.or(cfg.outputs.aperture_csv.clone()) {
                emit(Some(&p), &aperture_csv(&model))?;
            }
            if let Some(p) = ts.or(cfg.outputs.touchstone.clone()) {
                emit(Some(&p), &touchstone(&result, z_ref(&cfg)?, &[])?)?;
            }
        }
        Command::Sweep {
            config,
            lengths_mm,
            heights_mm,
            out,
            touchstone: ts,
        } => {
            let cfg = load_config(&config)?;
            let matching = match (lengths_mm, heights_mm) {
                (Some(l), Some(h)) => Some(MatchingConfig {
                    l: std::array::from_fn(|i| l[i] / 1000.0),
                    bh: std::array::from_fn(|i| h[i] / 1000.0),
                    antenna: cfg.antenna,
                }),
                _ => cfg.matching_config(),
            };
            if let Some(m) = &matching {
                m.validate()?;
            }
            let result = sweep_model(&cfg.aperture_model()?, matching.as_ref(), &cfg.network)?;
            emit(out.or(cfg.outputs.sweep_csv.clone()).as_deref(), &sweep_csv(&result))?;
            if let Some(p) = ts.or(cfg.outputs.touchstone.clone()) {
                emit(Some(&p), &touchstone(&result, z_ref(&cfg)?, &[])?)?;
            }
            eprintln!("max |Γ_in| = {}", result.max_mag());
        }
        Command::Optimize {
            config,
            seed,
            out,
            history,
            touchstone: ts,
            workers,
        } => {
            let cfg = load_config(&config)?;
            let mut params = cfg.ga;
            if let Some(s) = seed {
                params.seed = s;
            }
            if let Some(w) = workers {
                params.workers = w;
            }
            let model = cfg.aperture_model()?;
            let baseline = sweep_model(&model, None, &cfg.network)?;
            let space = SearchSpace::new(cfg.bounds, cfg.antenna)?.with_coding(cfg.coding);
            let mut problem = Problem::new(space, model, cfg.aggregator)?;
            problem.network = cfg.network;
            let outcome = optimize(&problem, &params)?;
            let best = &outcome.best.config;
            let result = sweep_model(&problem.aperture, Some(best), &cfg.network)?;

            println!("seed {}", outcome.seed);
            println!("generations {}", outcome.history.len() - 1);
            println!("baseline max |Γ_ap| = {}", baseline.max_mag());
            println!("best {}", describe(best));
            println!("objective ({}) = {}", cfg.aggregator.as_str(), outcome.best.aggregate);
            println!("best max |Γ_in| = {}", result.max_mag());

            if let Some(p) = history.or(cfg.outputs.history.clone()) {
                emit(Some(&p), &history_csv(&outcome.history))?;
            }
            if let Some(p) = out.or(cfg.outputs.sweep_csv.clone()) {
                emit(Some(&p), &sweep_csv(&result))?;
            }
            if let Some(p) = ts.or(cfg.outputs.touchstone.clone()) {
                let comments = vec![format!("seed {}", outcome.seed), describe(best)];
                emit(Some(&p), &touchstone(&result, z_ref(&cfg)?, &comments)?)?;
            }
        }
        Command::Export {
            input,
            out,
            z_ref: z,
            config,
        } => {
            let result = read_csv(&input)?;
            let z = match (z, config) {
                (Some(z), _) => z,
                (None, Some(c)) => z_ref(&load_config(&c)?)?,
                (None, None) => bail!("--z-ref or --config is required"),
            };
            emit(Some(&out), &touchstone(&result, z, &[format!("from {}", input.display())])?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
