use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use swarm_core::{Algorithm, ExperimentConfig};
use swarm_harness::{
    chart, parse_algos, run_config, run_sweep, write_csv, Arm, SweepParam, SweepSpec, Table,
};

#[derive(Parser)]
#[command(name = "swarmsim", version, about = "Swarm task-allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter over several algorithms.
    Sweep(SweepArgs),
    /// Chart one metric of a results CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Named design: fig3, fig5, fig7 or fig9.
    #[arg(long, conflicts_with_all = ["param", "values", "algos"])]
    preset: Option<String>,
    #[arg(long, requires = "values")]
    param: Option<String>,
    /// Comma-separated values of the swept parameter.
    #[arg(long, requires = "param", value_delimiter = ',')]
    values: Vec<f64>,
    /// Comma-separated algorithms among rw, prop, dl, hybrid.
    #[arg(long, default_value = "rw,prop,dl,hybrid")]
    algos: String,
    #[arg(long, default_value_t = 0.6)]
    p_prop: f64,
    #[arg(long, default_value_t = 50)]
    t_rw: u32,
    /// Base configuration file; the built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Omit the per-cell mean rows.
    #[arg(long)]
    no_means: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut base = match &args.config {
        Some(p) => read_config(p)?,
        None => ExperimentConfig::with_algo(Algorithm::Rw),
    };
    if let Some(t) = args.trials {
        base.trials = t;
    }
    if let Some(s) = args.seed {
        base.master_seed = s;
    }
    let spec = match (&args.preset, &args.param) {
        (Some(name), _) => SweepSpec::preset(name, base)?,
        (None, Some(param)) => SweepSpec {
            base,
            param: param.parse::<SweepParam>()?,
            values: args.values.clone(),
            arms: parse_algos(&args.algos, args.p_prop, args.t_rw)?
                .into_iter()
                .map(Arm::new)
                .collect(),
        },
        (None, None) => bail!("sweep needs --preset or --param with --values"),
    };
    let cells = run_sweep(&spec)?;
    let mut out = output(args.out.as_ref())?;
    write_csv(&mut out, &cells, !args.no_means)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = read_config(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let cell = run_config(&cfg)?;
            let mut w = output(out.as_ref())?;
            write_csv(&mut w, std::slice::from_ref(&cell), cfg.trials > 1)?;
            w.flush()?;
        }
        Command::Sweep(args) => sweep(args)?,
        Command::Plot {
            input,
            x,
            metric,
            out,
        } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let table =
                Table::read(file).with_context(|| format!("reading {}", input.display()))?;
            let svg = chart(&table, &x, &metric)?;
            fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("swarmsim: {e:#}");
            ExitCode::FAILURE
        }
    }
}
