use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use linksched::experiment::{
    compare_traces, median, read_trace_csv, run_experiment, run_sweep, Algorithm,
    ExperimentConfig, GraphSpec,
};
use linksched::topology::{enumerate_independent_sets, max_uniform_rate, max_weight_independent_set};

#[derive(Parser)]
#[command(
    name = "linksched",
    about = "Link-scheduling experiments on interference graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single seeded experiment and print its summary
    Run(RunArgs),
    /// Run the same experiment over a list of seeds
    Sweep(SweepArgs),
    /// Compare two trace CSV files side by side
    Compare {
        trace_a: PathBuf,
        trace_b: PathBuf,
    },
    /// Print exact oracle values for a graph
    Oracle {
        /// Graph spec: star:7, ring:6, path:3, or file:PATH
        #[arg(long)]
        graph: String,
    },
}

/// Experiment settings; flags mirror the config-file keys and override them.
#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph spec: star:7, ring:6, path:3, or file:PATH
    #[arg(long)]
    graph: Option<String>,
    /// Arrival load as a fraction of the max uniform rate
    #[arg(long)]
    load: Option<f64>,
    /// Number of simulated slots
    #[arg(long)]
    horizon: Option<u64>,
    /// dis-sched, csma-baseline, or sim
    #[arg(long)]
    algorithm: Option<String>,
    /// Primal-dual step size
    #[arg(long)]
    epsilon: Option<f64>,
    /// CSMA temperature
    #[arg(long)]
    alpha: Option<f64>,
    /// Decision-schedule proposal probability
    #[arg(long)]
    q: Option<f64>,
    /// Consensus rounds per slot
    #[arg(long)]
    rounds: Option<usize>,
    /// Slots between basis-update attempts
    #[arg(long)]
    update_interval: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for trace.csv and summary.txt
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(graph) = &self.graph {
            config.graph = GraphSpec::parse(graph)?;
        }
        if let Some(load) = self.load {
            config.load = load;
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
        if let Some(algorithm) = &self.algorithm {
            config.algorithm = algorithm.parse::<Algorithm>()?;
        }
        if let Some(epsilon) = self.epsilon {
            config.epsilon = epsilon;
        }
        if let Some(alpha) = self.alpha {
            config.alpha = alpha;
        }
        if let Some(q) = self.q {
            config.q = q;
        }
        if let Some(rounds) = self.rounds {
            config.rounds = rounds;
        }
        if let Some(update_interval) = self.update_interval {
            config.update_interval = update_interval;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(output) = &self.output {
            config.output = Some(output.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated seed list, e.g. --seeds 1,2,3,4,5
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = args.config.build()?;
    let result = run_experiment(&config)?;
    print!("{}", result.summary.to_key_values());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let config = args.config.build()?;
    let results = run_sweep(&config, &args.seeds)?;
    for result in &results {
        println!(
            "seed={} max_queue_final_half={} rate_stability_gap={}",
            result.summary.seed,
            result.summary.max_queue_final_half,
            result.summary.rate_stability_gap
        );
    }
    let gaps: Vec<f64> = results
        .iter()
        .map(|r| r.summary.rate_stability_gap)
        .collect();
    let maxima: Vec<f64> = results
        .iter()
        .map(|r| r.summary.max_queue_final_half as f64)
        .collect();
    let mut aggregate = String::new();
    aggregate.push_str(&format!("seeds={}\n", args.seeds.len()));
    aggregate.push_str(&format!("median_rate_stability_gap={}\n", median(&gaps)));
    aggregate.push_str(&format!(
        "median_max_queue_final_half={}\n",
        median(&maxima)
    ));
    print!("{aggregate}");
    if let Some(dir) = &config.output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep_summary.txt"), aggregate)?;
    }
    Ok(())
}

fn cmd_compare(trace_a: &PathBuf, trace_b: &PathBuf) -> Result<()> {
    let a = read_trace_csv(trace_a)?;
    let b = read_trace_csv(trace_b)?;
    let report = compare_traces(&a, &b)?;
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_oracle(graph: &str) -> Result<()> {
    let spec = GraphSpec::parse(graph)?;
    let g = spec.build()?;
    let sets = enumerate_independent_sets(&g)?;
    let rate = max_uniform_rate(&g)?;
    let mwis = max_weight_independent_set(&g, &vec![1.0; g.n()])?;
    println!("graph={spec}");
    println!("links={}", g.n());
    println!("edges={}", g.edges().len());
    println!("independent_sets={}", sets.len());
    println!("max_uniform_rate={rate}");
    println!("max_independent_set={}", mwis.to_bitstring());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Compare { trace_a, trace_b } => cmd_compare(trace_a, trace_b),
        Command::Oracle { graph } => cmd_oracle(graph),
    }
}
