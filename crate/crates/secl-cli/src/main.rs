use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use secl::eval::{Metrics, NmiNorm};
use secl::graph::{load_graph, read_labels, write_dense_bin, write_labels};
use secl::harness::{self, output, Prepared, SweepGrid, TrainConfig, LAMBDA_GRID};
use secl::losses::Ablation;

#[derive(Parser)]
#[command(name = "secl", version, about = "Structure-enhanced contrastive graph clustering")]
struct Cli {
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config.
    #[arg(long, short)]
    config: PathBuf,
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// full, no-M, no-CL or no-SL.
    #[arg(long)]
    ablation: Option<Ablation>,
    /// Leave wall-clock times out of the reproducible artifacts.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    epochs: Option<usize>,
    /// Overrides the dataset directory from the config.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Root under which experiment directories are created.
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
}

impl Common {
    fn load(&self) -> Result<TrainConfig> {
        let mut config = TrainConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            config.run.seed = s;
        }
        if let Some(r) = self.runs {
            config.run.runs = r;
        }
        if let Some(a) = self.ablation {
            config.loss.ablation = a;
        }
        if let Some(e) = self.epochs {
            config.optim.epochs = e;
        }
        if let Some(d) = &self.data_dir {
            config.dataset.dir = d.clone();
        }
        config.run.deterministic |= self.deterministic;
        config.validate()?;
        Ok(config)
    }

    fn prepare(&self) -> Result<(TrainConfig, Prepared)> {
        let config = self.load()?;
        let graph = config
            .dataset
            .load()
            .with_context(|| format!("loading dataset {:?}", config.dataset.name))?;
        log::info!(
            "{}: {} nodes, {} edges, {} attributes",
            config.dataset.name,
            graph.n(),
            graph.m(),
            graph.attribute_dim()
        );
        let prepared = Prepared::new(&config, graph)?;
        Ok((config, prepared))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train once with the base seed.
    Train(Common),
    /// Train `runs` times and aggregate mean ± std.
    Experiment(Common),
    /// Grid sweep over λ1 × λ2, r or τ.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated λ1 values; with --lambda2 forms a product grid.
        #[arg(long, value_delimiter = ',')]
        lambda1: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda2: Vec<f64>,
        /// Use 0.01,0.1,1,10,100 for both λ axes.
        #[arg(long)]
        lambda_grid: bool,
        /// Comma-separated filter depths.
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        /// Comma-separated temperatures.
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
    },
    /// Full objective and the three single-term ablations.
    Ablate(Common),
    /// Wall-clock seconds of one training run without clustering.
    Time(Common),
    /// Metrics of a precomputed labeling.
    EvalLabels {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Edge list, needed for the modularity score.
        #[arg(long, requires = "attributes")]
        edges: Option<PathBuf>,
        #[arg(long)]
        attributes: Option<PathBuf>,
        #[arg(long)]
        arithmetic_nmi: bool,
    },
    /// Train once and write both embeddings and the labels.
    DumpEmbeddings {
        #[command(flatten)]
        common: Common,
        /// Output file for H⁽²⁾; H⁽¹⁾ goes next to it with a `.h1.bin` suffix.
        #[arg(long)]
        output: PathBuf,
    },
}

fn print_report(report: &secl::eval::MetricsReport) {
    for (name, (m, s)) in Metrics::FIELDS
        .iter()
        .zip(report.mean.values().iter().zip(report.std.values()))
    {
        println!("{name:>13}: {:.2} ± {:.2}", 100.0 * m, 100.0 * s);
    }
}

fn experiment_dir(common: &Common, config: &TrainConfig) -> Result<PathBuf> {
    let dir = output::create_experiment_dir(&common.out_dir, config)?;
    println!("output: {}", dir.display());
    Ok(dir)
}

fn sweep_grid(
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
    lambda_grid: bool,
    r: Vec<usize>,
    tau: Vec<f64>,
) -> Result<SweepGrid> {
    let lambda = lambda_grid || !lambda1.is_empty() || !lambda2.is_empty();
    let kinds = [lambda, !r.is_empty(), !tau.is_empty()];
    if kinds.iter().filter(|&&k| k).count() != 1 {
        bail!("give exactly one of --lambda1/--lambda2/--lambda-grid, --r or --tau");
    }
    Ok(if lambda {
        let pick = |v: Vec<f64>| if lambda_grid && v.is_empty() { LAMBDA_GRID.to_vec() } else { v };
        SweepGrid::Lambda {
            lambda1: pick(lambda1),
            lambda2: pick(lambda2),
        }
    } else if !r.is_empty() {
        SweepGrid::FilterDepth(r)
    } else {
        SweepGrid::Temperature(tau)
    })
}

fn h1_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.h1.bin"))
}

fn run(cli: Cli) -> Result<()> {
    secl::par::set_enabled(!cli.sequential);
    match cli.command {
        Command::Train(common) => {
            let (mut config, prepared) = common.prepare()?;
            config.run.runs = 1;
            let dir = experiment_dir(&common, &config)?;
            let result = harness::run_experiment(&config, &prepared, Some(&dir))?;
            print_report(&result.report);
        }
        Command::Experiment(common) => {
            let (config, prepared) = common.prepare()?;
            let dir = experiment_dir(&common, &config)?;
            let result = harness::run_experiment(&config, &prepared, Some(&dir))?;
            print_report(&result.report);
        }
        Command::Sweep {
            common,
            lambda1,
            lambda2,
            lambda_grid,
            r,
            tau,
        } => {
            let grid = sweep_grid(lambda1, lambda2, lambda_grid, r, tau)?;
            let config = common.load()?;
            let graph = config.dataset.load()?;
            let dir = experiment_dir(&common, &config)?;
            let rows = harness::sweep(&config, &graph, &grid, Some(&dir))?;
            for row in rows {
                println!(
                    "λ1={} λ2={} r={} τ={}: acc {:.2} nmi {:.2}",
                    row.lambda1,
                    row.lambda2,
                    row.r,
                    row.tau,
                    100.0 * row.mean.acc,
                    100.0 * row.mean.nmi
                );
            }
        }
        Command::Ablate(common) => {
            let (config, prepared) = common.prepare()?;
            let dir = experiment_dir(&common, &config)?;
            for (ablation, report) in harness::ablate(&config, &prepared, Some(&dir))? {
                println!(
                    "{ablation:>6}: acc {:.2} ± {:.2}",
                    100.0 * report.mean.acc,
                    100.0 * report.std.acc
                );
            }
        }
        Command::Time(common) => {
            let (config, prepared) = common.prepare()?;
            let secs = harness::time_report(&config, &prepared)?;
            println!("{}: {} epochs in {secs:.3} s", config.dataset.name, config.optim.epochs);
        }
        Command::EvalLabels {
            pred,
            truth,
            edges,
            attributes,
            arithmetic_nmi,
        } => {
            let pred = read_labels(&pred)?;
            let truth = read_labels(&truth)?;
            let norm = if arithmetic_nmi { NmiNorm::Arithmetic } else { NmiNorm::Geometric };
            let graph = match (edges, attributes) {
                (Some(e), Some(a)) => Some(load_graph(&e, &a, None)?),
                _ => None,
            };
            let metrics = match &graph {
                Some(g) => Metrics::compute(&pred, Some(&truth), g, norm)?,
                None => Metrics {
                    acc: secl::eval::accuracy(&pred, &truth)?,
                    nmi: secl::eval::nmi_with(&pred, &truth, norm)?,
                    ari: secl::eval::ari(&pred, &truth)?,
                    f1: secl::eval::f1_macro(&pred, &truth)?,
                    f1_weighted: secl::eval::f1_weighted(&pred, &truth)?,
                    modularity_q: f64::NAN,
                },
            };
            println!("{}", serde_json::to_string_pretty(&metrics)?);
        }
        Command::DumpEmbeddings { common, output } => {
            let (config, prepared) = common.prepare()?;
            let out = harness::train(&config, &prepared, config.run.seed)?;
            write_dense_bin(&output, &out.h2)?;
            write_dense_bin(&h1_path(&output), &out.h1)?;
            if let Some(c) = &out.clustering {
                write_labels(&output.with_extension("labels.txt"), &c.labels)?;
            }
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
