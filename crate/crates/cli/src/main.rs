use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use born_core::harness::{self, ExperimentConfig, ExperimentKind, FigureKind, DEFAULT_TRIALS, PAPER_TRIALS};
use born_core::lab::{FamilySpec, MetricSpec, ReferenceOutcome};
use born_core::loss::{mmd_two_sample_test, KernelSpec};
use born_core::SampleSet;

/// Monte Carlo experiments on loss concentration for random output
/// distributions of quantum generative models.
#[derive(Parser)]
#[command(name = "born", version)]
struct Cli {
    /// Log progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment over a family × n grid.
    Run {
        #[arg(long, default_value = "pairwise")]
        experiment: String,
        /// Read the configuration from a JSON config or manifest instead of flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Pairwise loss moments.
    Pairwise {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Tail curves Prob(p(x) >= y / 2^n).
    Tails {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run figure presets, writing <out>/<figure>.csv and .json.
    Figures {
        /// fig2, fig4, fig5, fig6, fig7, fig8, fig9 or all.
        #[arg(long, default_value = "all")]
        kind: String,
        #[arg(long, env = "BORN_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, alias = "trials")]
        pairs: Option<usize>,
        /// Use 10^5 pairs instead of 10^4.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory.
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Kernel two-sample test on two sample files.
    Mmdtest {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Family names, repeated or comma separated (product, iqp-product, dirichlet,
    /// pareto:<alpha>, peaked[:k], iqp, iqp-pairs, peaked-iqp, mps[:chi], uniform).
    #[arg(long, value_delimiter = ',', default_value = "product")]
    family: Vec<String>,
    /// sd, l1, tvd, or mmd2 (bandwidths from --sigma); mmd2:<sigma> also works.
    #[arg(long, value_delimiter = ',', default_value = "sd")]
    metric: Vec<String>,
    /// Kernel bandwidths for mmd2; `n` means the qubit count.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<String>,
    #[arg(long, default_value_t = 2)]
    n_min: u32,
    #[arg(long, default_value_t = 8)]
    n_max: u32,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Use 10^5 trials instead of 10^4.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, env = "BORN_SEED", default_value_t = 0)]
    seed: u64,
    /// Significance level for the two-sample test experiment.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Samples per side for the two-sample test experiment.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Qubits of the diagonal observable, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    observable: Vec<u32>,
    /// Read p(x) at a random outcome per trial instead of 0...0.
    #[arg(long)]
    pooled: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output path; the manifest goes next to it. Prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GridArgs {
    fn config(&self, experiment: ExperimentKind) -> Result<ExperimentConfig> {
        let families = self.family.iter().map(|f| f.parse::<FamilySpec>()).collect::<Result<Vec<_>, _>>()?;
        let mut metrics = Vec::new();
        for name in &self.metric {
            if name == "mmd2" {
                if self.sigma.is_empty() {
                    bail!("metric mmd2 needs --sigma");
                }
                for s in &self.sigma {
                    metrics.push(MetricSpec::from_parts(name, Some(s))?);
                }
            } else {
                metrics.push(MetricSpec::from_parts(name, None)?);
            }
        }
        let mut c = ExperimentConfig::new(experiment, families, self.n_min, self.n_max, self.seed);
        c.metrics = metrics;
        c.trials = self.pairs.or(self.trials).unwrap_or(if self.paper_scale { PAPER_TRIALS } else { DEFAULT_TRIALS });
        c.alpha = self.alpha;
        c.samples = self.samples;
        c.observable = self.observable.clone();
        if let Some(s) = self.sigma.first() {
            if let Ok(v) = s.parse() {
                c.mmd_sigma = v;
            }
        }
        c.reference = if self.pooled { ReferenceOutcome::Pooled } else { ReferenceOutcome::Fixed };
        c.workers = self.workers;
        c.validate()?;
        Ok(c)
    }
}

fn execute(config: &ExperimentConfig, out: Option<&Path>) -> Result<()> {
    let rows = harness::run(config, out, &mut std::io::stdout().lock())?;
    if let Some(path) = out {
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { experiment, config, grid } => {
            let config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let mut c = ExperimentConfig::from_json(&text)?;
                    c.workers = grid.workers;
                    c.validate()?;
                    c
                }
                None => grid.config(experiment.parse()?)?,
            };
            execute(&config, grid.out.as_deref())
        }
        Command::Pairwise { grid } => execute(&grid.config(ExperimentKind::Pairwise)?, grid.out.as_deref()),
        Command::Tails { grid } => execute(&grid.config(ExperimentKind::Tails)?, grid.out.as_deref()),
        Command::Figures { kind, seed, pairs, paper_scale, workers, out } => {
            let kinds = if kind == "all" { FigureKind::ALL.to_vec() } else { vec![kind.parse()?] };
            let trials = pairs.unwrap_or(if paper_scale { PAPER_TRIALS } else { DEFAULT_TRIALS });
            for k in kinds {
                let mut c = k.config(seed, trials);
                c.workers = workers;
                execute(&c, Some(&out.join(format!("{}.csv", k.label()))))?;
            }
            Ok(())
        }
        Command::Mmdtest { x, y, sigma, alpha } => {
            let read = |p: &Path| SampleSet::read_file(p).with_context(|| format!("reading {}", p.display()));
            let (xs, ys) = (read(&x)?, read(&y)?);
            let outcome = mmd_two_sample_test(&xs, &ys, &KernelSpec::new(sigma)?, alpha)?;
            println!("estimate: {:.16e}", outcome.estimate);
            println!("threshold: {:.16e}", outcome.threshold);
            println!("{}", if outcome.accept { "ACCEPT" } else { "REJECT" });
            Ok(())
        }
    }
}
