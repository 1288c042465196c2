use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qpar_cli::config::{validate, RunConfig};
use qpar_cli::csv::load_csv;
use qpar_cli::presets::{find, PRESETS};
use qpar_cli::run::{rerun, run, RunOptions};
use qpar_cli::svg::{emit_svg_plot, PlotStyle};
use qpar_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "qpar",
    version,
    about = "Ensemble spin dynamics from random-phase pure states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV, manifest and optional SVG.
    Run(RunArgs),
    /// Check a config and print it with all defaults filled in.
    Validate(Source),
    /// List the built-in configurations, or print one.
    Presets {
        /// Print the config of this preset as JSON.
        #[arg(long)]
        show: Option<String>,
    },
    /// Re-render an SVG plot from a CSV trace table.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Unit in the axis label `t [1/<unit>]`.
        #[arg(long, default_value = "b_x")]
        unit: String,
        /// Factor applied to times before plotting.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

#[derive(Args)]
struct Source {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration name (see `qpar presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Overrides initial.master_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Replay the config recorded in a run manifest.
    #[arg(long, conflicts_with_all = ["config", "preset", "seed"])]
    manifest: Option<PathBuf>,
    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(source: &Source) -> CliResult<(RunConfig, PathBuf)> {
    let (mut cfg, base) = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            (RunConfig::load(path)?, base)
        }
        (None, Some(name)) => {
            let preset = find(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                CliError::config(
                    "--preset",
                    format!("unknown preset '{name}' (have {})", names.join(", ")),
                )
            })?;
            ((preset.build)(), PathBuf::from("."))
        }
        (None, None) => return Err(CliError::config("--config", "give --config or --preset")),
    };
    if let Some(seed) = source.seed {
        cfg.initial.master_seed = Some(seed);
    }
    Ok((cfg, base))
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let opts = RunOptions {
                out_dir: args.out_dir.clone(),
                threads: args.threads,
            };
            if let Some(manifest) = &args.manifest {
                let replay = rerun(manifest, &opts)?;
                println!("wrote {}", replay.outcome.csv_path.display());
                if replay.csv_matches {
                    println!("CSV checksum matches the original run");
                } else {
                    println!("CSV checksum differs from the original run");
                }
                return Ok(());
            }
            let (cfg, base) = load(&args.source)?;
            let plan = validate(&cfg, &base)?;
            let outcome = run(&plan, &opts)?;
            println!("wrote {}", outcome.csv_path.display());
            if let Some(svg) = &outcome.svg_path {
                println!("wrote {}", svg.display());
            }
            println!("wrote {}", outcome.manifest_path.display());
            if let Some(c) = &outcome.manifest.comparison {
                println!(
                    "pure vs ensemble: rms {:.4}, max |dP| {:.4}",
                    c.rms_deviation, c.max_abs_deviation
                );
            }
            Ok(())
        }
        Command::Validate(source) => {
            let (cfg, base) = load(&source)?;
            let plan = validate(&cfg, &base)?;
            println!("{}", plan.config.to_json());
            Ok(())
        }
        Command::Presets { show } => {
            match show {
                Some(name) => {
                    let p = find(&name).ok_or_else(|| {
                        CliError::config("--show", format!("unknown preset '{name}'"))
                    })?;
                    println!("{}", (p.build)().to_json());
                }
                None => {
                    for p in &PRESETS {
                        println!("{:<16} {}", p.name, p.description);
                    }
                }
            }
            Ok(())
        }
        Command::Plot {
            csv,
            out,
            unit,
            scale,
        } => {
            let table = load_csv(&csv)?;
            let style = PlotStyle {
                time_unit: unit,
                time_scale: scale,
                title: None,
            };
            emit_svg_plot(&out, &table.times, &table.columns, &style)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
