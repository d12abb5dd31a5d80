//! Reproducible experiment driver: seeded runs of the distributed
//! scheduler, an adaptive CSMA baseline, and a centralized reference arm,
//! with CSV traces and plain-text summaries. Identical config and seed give
//! byte-identical outputs.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csma::{generate_decision_schedule, gibbs_step, CsmaState, DecisionRule};
use crate::dissched::{ConsensusMode, DisSched, DisSchedParams};
use crate::error::{Error, Result};
use crate::queueing::{ArrivalProcess, QueueLedger};
use crate::simplex::{sim_run, write_sim_log_csv};
use crate::topology::{bitstring_to_mask, max_uniform_rate, GraphKind, InterferenceGraph};

/// Default clip range for the baseline's self-tuned fugacities.
pub const BASELINE_FUGACITY_MIN: f64 = -5.0;
pub const BASELINE_FUGACITY_MAX: f64 = 8.0;

/// Pivot budget for the centralized reference arm.
pub const SIM_ITERATION_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Named { kind: GraphKind, size: usize },
    File(PathBuf),
}

impl GraphSpec {
    pub fn parse(s: &str) -> Result<GraphSpec> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::InvalidConfig("empty graph file path".into()));
            }
            return Ok(GraphSpec::File(PathBuf::from(path)));
        }
        let (kind, size) = s.split_once(':').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "graph spec `{s}` is neither `kind:size` nor `file:path`"
            ))
        })?;
        let kind: GraphKind = kind.parse()?;
        let size: usize = size
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad graph size `{size}`")))?;
        Ok(GraphSpec::Named { kind, size })
    }

    pub fn build(&self) -> Result<InterferenceGraph> {
        match self {
            GraphSpec::Named { kind, size } => InterferenceGraph::build_named(*kind, *size),
            GraphSpec::File(path) => InterferenceGraph::from_file(path),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Named { kind, size } => write!(f, "{kind}:{size}"),
            GraphSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    DisSched,
    CsmaBaseline,
    Sim,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::DisSched => write!(f, "dis-sched"),
            Algorithm::CsmaBaseline => write!(f, "csma-baseline"),
            Algorithm::Sim => write!(f, "sim"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dis-sched" => Ok(Algorithm::DisSched),
            "csma-baseline" => Ok(Algorithm::CsmaBaseline),
            "sim" => Ok(Algorithm::Sim),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm `{s}`"))),
        }
    }
}

/// Everything a run needs. Serializes to flat `key=value` lines; flags and
/// file entries share the same key names.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    /// Arrival load as a fraction of the max uniform rate.
    pub load: f64,
    pub horizon: u64,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub alpha: f64,
    /// Decision-schedule proposal probability.
    pub q: f64,
    /// Consensus rounds per slot.
    pub rounds: usize,
    /// Slots between basis-update attempts.
    pub update_interval: u64,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: GraphSpec::Named {
                kind: GraphKind::Star,
                size: 7,
            },
            load: 0.95,
            horizon: 200_000,
            algorithm: Algorithm::DisSched,
            epsilon: 0.01,
            alpha: 10.0,
            q: 0.25,
            rounds: 120,
            update_interval: 2000,
            seed: 1,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.load > 0.0 && self.load <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "load {} outside (0, 1]",
                self.load
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        DecisionRule::new(self.q)?;
        if self.update_interval == 0 {
            return Err(Error::InvalidConfig(
                "update_interval must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad {what} value `{value}`"));
        match key {
            "graph" => self.graph = GraphSpec::parse(value)?,
            "load" => self.load = value.parse().map_err(|_| bad("load"))?,
            "horizon" => self.horizon = value.parse().map_err(|_| bad("horizon"))?,
            "algorithm" => self.algorithm = value.parse()?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "q" => self.q = value.parse().map_err(|_| bad("q"))?,
            "rounds" => self.rounds = value.parse().map_err(|_| bad("rounds"))?,
            "update_interval" => {
                self.update_interval = value.parse().map_err(|_| bad("update_interval"))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidConfig(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses a flat `key=value` config file body over the defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value, got `{line}`", idx + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph={}\n", self.graph));
        out.push_str(&format!("load={}\n", self.load));
        out.push_str(&format!("horizon={}\n", self.horizon));
        out.push_str(&format!("algorithm={}\n", self.algorithm));
        out.push_str(&format!("epsilon={}\n", self.epsilon));
        out.push_str(&format!("alpha={}\n", self.alpha));
        out.push_str(&format!("q={}\n", self.q));
        out.push_str(&format!("rounds={}\n", self.rounds));
        out.push_str(&format!("update_interval={}\n", self.update_interval));
        out.push_str(&format!("seed={}\n", self.seed));
        if let Some(path) = &self.output {
            out.push_str(&format!("output={}\n", path.display()));
        }
        out
    }
}

/// One row of the per-slot trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    /// Queue lengths after this slot's service.
    pub queues: Vec<u64>,
    /// Link 0's gap copy (zero for arms without a gap).
    pub gap: f64,
    /// Realized transmission mask.
    pub schedule_mask: u64,
    pub basis_change: bool,
}

/// Writes rows as `slot,q0..q{n-1},gamma,schedule,basis_change`.
pub fn write_trace_csv(rows: &[TraceRow], n: usize, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "slot")?;
    for i in 0..n {
        write!(out, ",q{i}")?;
    }
    writeln!(out, ",gamma,schedule,basis_change")?;
    for row in rows {
        write!(out, "{}", row.slot)?;
        for &q in &row.queues {
            write!(out, ",{q}")?;
        }
        let bits: String = (0..n)
            .map(|i| {
                if row.schedule_mask & (1 << i) != 0 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        writeln!(
            out,
            ",{},{},{}",
            row.gap,
            bits,
            if row.basis_change { 1 } else { 0 }
        )?;
    }
    Ok(())
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ParseTrace("empty trace".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let n = cols.iter().filter(|c| c.starts_with('q')).count();
    if cols.len() != n + 4 || cols[0] != "slot" {
        return Err(Error::ParseTrace(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 4 {
            return Err(Error::ParseTrace(format!("short row `{line}`")));
        }
        let parse_u64 = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::ParseTrace(format!("bad integer `{s}`")))
        };
        let slot = parse_u64(fields[0])?;
        let queues = fields[1..=n]
            .iter()
            .map(|s| parse_u64(s))
            .collect::<Result<Vec<u64>>>()?;
        let gap = fields[n + 1]
            .parse::<f64>()
            .map_err(|_| Error::ParseTrace(format!("bad gamma `{}`", fields[n + 1])))?;
        let (schedule_mask, _) = bitstring_to_mask(fields[n + 2])?;
        let basis_change = match fields[n + 3] {
            "0" => false,
            "1" => true,
            other => return Err(Error::ParseTrace(format!("bad basis flag `{other}`"))),
        };
        rows.push(TraceRow {
            slot,
            queues,
            gap,
            schedule_mask,
            basis_change,
        });
    }
    Ok(rows)
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    parse_trace_csv(&fs::read_to_string(path)?)
}

/// Adaptive CSMA comparison arm: the sampler of the CSMA chain with a
/// per-link clipped fugacity adaptation toward the empirical arrival rate.
#[derive(Debug, Clone)]
pub struct CsmaBaseline {
    state: CsmaState,
    rule: DecisionRule,
    epsilon: f64,
    fugacity_min: f64,
    fugacity_max: f64,
}

impl CsmaBaseline {
    pub fn new(g: &InterferenceGraph, epsilon: f64, rule: DecisionRule) -> Result<CsmaBaseline> {
        Ok(CsmaBaseline {
            state: CsmaState::new(g, vec![0.0; g.n()])?,
            rule,
            epsilon,
            fugacity_min: BASELINE_FUGACITY_MIN,
            fugacity_max: BASELINE_FUGACITY_MAX,
        })
    }

    pub fn fugacities(&self) -> &[f64] {
        &self.state.fugacities
    }

    /// One slot: sampler step, then
    /// `theta_i <- clip(theta_i + eps * (a_hat_i - sigma_i))`.
    /// A starved link drifts up until it hits the clip ceiling.
    pub fn step(
        &mut self,
        g: &InterferenceGraph,
        a_hat: &[f64],
        rng: &mut impl Rng,
    ) -> crate::topology::Schedule {
        let decision = generate_decision_schedule(g, &self.rule, rng);
        self.state.schedule = gibbs_step(
            g,
            &self.state.schedule,
            &self.state.fugacities,
            &decision,
            rng,
        );
        for i in 0..g.n() {
            let bit = if self.state.schedule.contains(i) {
                1.0
            } else {
                0.0
            };
            let next = self.state.fugacities[i] + self.epsilon * (a_hat[i] - bit);
            self.state.fugacities[i] = next.clamp(self.fugacity_min, self.fugacity_max);
        }
        self.state.schedule
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub algorithm: Algorithm,
    pub n: usize,
    pub horizon: u64,
    pub seed: u64,
    pub max_queue_final_half: u64,
    pub mean_queue_final_half: f64,
    pub rate_stability_gap: f64,
    pub basis_changes: u64,
    pub agreement_rate: Option<f64>,
    pub final_gap: Option<f64>,
    pub sim_iterations: Option<usize>,
}

impl ExperimentSummary {
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("algorithm={}\n", self.algorithm));
        out.push_str(&format!("n={}\n", self.n));
        out.push_str(&format!("horizon={}\n", self.horizon));
        out.push_str(&format!("seed={}\n", self.seed));
        out.push_str(&format!(
            "max_queue_final_half={}\n",
            self.max_queue_final_half
        ));
        out.push_str(&format!(
            "mean_queue_final_half={}\n",
            self.mean_queue_final_half
        ));
        out.push_str(&format!(
            "rate_stability_gap={}\n",
            self.rate_stability_gap
        ));
        out.push_str(&format!("basis_changes={}\n", self.basis_changes));
        if let Some(rate) = self.agreement_rate {
            out.push_str(&format!("agreement_rate={rate}\n"));
        }
        if let Some(gap) = self.final_gap {
            out.push_str(&format!("final_gap={gap}\n"));
        }
        if let Some(iters) = self.sim_iterations {
            out.push_str(&format!("sim_iterations={iters}\n"));
        }
        out
    }
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub trace: Vec<TraceRow>,
    pub rates: Vec<f64>,
}

/// Runs one seeded experiment and, if an output directory is configured,
/// writes `trace.csv` and `summary.txt` there (plus `sim_log.csv` for the
/// centralized arm).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let g = config.graph.build()?;
    let n = g.n();
    let uniform = max_uniform_rate(&g)?;
    let rates = vec![config.load * uniform; n];
    let process = ArrivalProcess::bernoulli(rates.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ledger = QueueLedger::new(n);
    let mut trace = Vec::with_capacity(config.horizon as usize);

    let mut basis_changes = 0u64;
    let mut agreement_rate = None;
    let mut final_gap = None;
    let mut sim_iterations = None;
    let mut sim_log = None;

    match config.algorithm {
        Algorithm::DisSched => {
            let params = DisSchedParams {
                alpha: config.alpha,
                decision_rule: DecisionRule::new(config.q)?,
                consensus: ConsensusMode::Gossip {
                    rounds: config.rounds,
                },
                update_interval: config.update_interval,
                ..DisSchedParams::with_epsilon(config.epsilon)
            };
            let mut sched = DisSched::new(&g, params)?;
            for slot in 1..=config.horizon {
                ledger.record_arrivals(&process.draw(&mut rng));
                let out = sched.slot_step(&ledger, &mut rng);
                ledger.apply_service(&out.decision.success_flags(n));
                trace.push(TraceRow {
                    slot,
                    queues: ledger.queues().to_vec(),
                    gap: sched.gap(),
                    schedule_mask: out.decision.attempted,
                    basis_change: out.basis_changed,
                });
            }
            basis_changes = sched.stats().basis_changes;
            agreement_rate = Some(sched.stats().agreement_rate());
            final_gap = Some(sched.gap());
        }
        Algorithm::CsmaBaseline => {
            let mut baseline = CsmaBaseline::new(&g, config.epsilon, DecisionRule::new(config.q)?)?;
            for slot in 1..=config.horizon {
                ledger.record_arrivals(&process.draw(&mut rng));
                let schedule = baseline.step(&g, &ledger.empirical_rates(), &mut rng);
                let flags: Vec<bool> = (0..n).map(|i| schedule.contains(i)).collect();
                ledger.apply_service(&flags);
                trace.push(TraceRow {
                    slot,
                    queues: ledger.queues().to_vec(),
                    gap: 0.0,
                    schedule_mask: schedule.mask(),
                    basis_change: false,
                });
            }
        }
        Algorithm::Sim => {
            let result = sim_run(&g, &rates, SIM_ITERATION_CAP)?;
            sim_iterations = Some(result.iterations);
            final_gap = Some(result.gap);
            // time-share the support by largest deficit; idle time is an
            // explicit pseudo-schedule so the shares sum to one
            let mut shares: Vec<(u64, f64)> = result
                .support()
                .iter()
                .map(|(s, x)| (s.mask(), *x))
                .collect();
            let used: f64 = shares.iter().map(|(_, x)| x).sum();
            if used < 1.0 - 1e-12 {
                shares.push((0, 1.0 - used));
            }
            let mut served = vec![0u64; shares.len()];
            for slot in 1..=config.horizon {
                ledger.record_arrivals(&process.draw(&mut rng));
                let mut pick = 0usize;
                let mut best = f64::NEG_INFINITY;
                for (j, (_, x)) in shares.iter().enumerate() {
                    let deficit = x * slot as f64 - served[j] as f64;
                    if deficit > best {
                        best = deficit;
                        pick = j;
                    }
                }
                served[pick] += 1;
                let mask = shares[pick].0;
                let flags: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                ledger.apply_service(&flags);
                trace.push(TraceRow {
                    slot,
                    queues: ledger.queues().to_vec(),
                    gap: result.gap,
                    schedule_mask: mask,
                    basis_change: false,
                });
            }
            let mut buf = Vec::new();
            write_sim_log_csv(&result.log, &mut buf)?;
            sim_log = Some(buf);
        }
    }

    let half_start = config.horizon / 2;
    let final_half: Vec<&TraceRow> = trace.iter().filter(|r| r.slot > half_start).collect();
    let max_queue_final_half = final_half
        .iter()
        .flat_map(|r| r.queues.iter().copied())
        .max()
        .unwrap_or(0);
    let mean_queue_final_half = if final_half.is_empty() {
        0.0
    } else {
        final_half
            .iter()
            .map(|r| r.queues.iter().sum::<u64>() as f64 / n as f64)
            .sum::<f64>()
            / final_half.len() as f64
    };

    let summary = ExperimentSummary {
        algorithm: config.algorithm,
        n,
        horizon: config.horizon,
        seed: config.seed,
        max_queue_final_half,
        mean_queue_final_half,
        rate_stability_gap: ledger.rate_stability_gap(&rates)?,
        basis_changes,
        agreement_rate,
        final_gap,
        sim_iterations,
    };

    if let Some(dir) = &config.output {
        let wrap = |source: std::io::Error| Error::OutputPath {
            path: dir.clone(),
            source,
        };
        fs::create_dir_all(dir).map_err(wrap)?;
        let mut trace_file =
            BufWriter::new(fs::File::create(dir.join("trace.csv")).map_err(wrap)?);
        write_trace_csv(&trace, n, &mut trace_file).map_err(wrap)?;
        trace_file.flush().map_err(wrap)?;
        fs::write(dir.join("summary.txt"), summary.to_key_values()).map_err(wrap)?;
        if let Some(log) = &sim_log {
            fs::write(dir.join("sim_log.csv"), log).map_err(wrap)?;
        }
    }

    Ok(ExperimentResult {
        summary,
        trace,
        rates,
    })
}

/// Runs the same configuration over a list of seeds. With an output
/// directory configured, each run writes into a `seed<k>` subdirectory.
pub fn run_sweep(base: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<ExperimentResult>> {
    let mut results = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut config = base.clone();
        config.seed = seed;
        config.output = base.output.as_ref().map(|d| d.join(format!("seed{seed}")));
        results.push(run_experiment(&config)?);
    }
    Ok(results)
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Steady-state statistics of one trace arm, over its final half.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    pub max_queue: u64,
    pub mean_queue: f64,
    /// Mean consecutive slots spent in one schedule before it changes.
    pub mode_residence: f64,
}

fn arm_stats(trace: &[TraceRow]) -> ArmStats {
    let start = trace.len() / 2;
    let tail = &trace[start..];
    let max_queue = tail
        .iter()
        .flat_map(|r| r.queues.iter().copied())
        .max()
        .unwrap_or(0);
    let mean_queue = if tail.is_empty() {
        0.0
    } else {
        let n = tail[0].queues.len().max(1);
        tail.iter()
            .map(|r| r.queues.iter().sum::<u64>() as f64 / n as f64)
            .sum::<f64>()
            / tail.len() as f64
    };
    let mut runs = 0u64;
    let mut total = 0u64;
    let mut current: Option<u64> = None;
    for row in tail {
        if current != Some(row.schedule_mask) {
            runs += 1;
            current = Some(row.schedule_mask);
        }
        total += 1;
    }
    let mode_residence = if runs == 0 {
        0.0
    } else {
        total as f64 / runs as f64
    };
    ArmStats {
        max_queue,
        mean_queue,
        mode_residence,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub horizon: u64,
    pub a: ArmStats,
    pub b: ArmStats,
    /// `a.max_queue / b.max_queue`; exactly 1.0 when the maxima agree.
    pub max_queue_ratio: f64,
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("horizon={}\n", self.horizon));
        out.push_str(&format!("a.max_queue={}\n", self.a.max_queue));
        out.push_str(&format!("a.mean_queue={}\n", self.a.mean_queue));
        out.push_str(&format!("a.mode_residence={}\n", self.a.mode_residence));
        out.push_str(&format!("b.max_queue={}\n", self.b.max_queue));
        out.push_str(&format!("b.mean_queue={}\n", self.b.mean_queue));
        out.push_str(&format!("b.mode_residence={}\n", self.b.mode_residence));
        out.push_str(&format!("max_queue_ratio={}\n", self.max_queue_ratio));
        out
    }
}

/// Side-by-side steady-state comparison of two equal-horizon traces.
pub fn compare_traces(a: &[TraceRow], b: &[TraceRow]) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(Error::MismatchedHorizons(a.len(), b.len()));
    }
    let stats_a = arm_stats(a);
    let stats_b = arm_stats(b);
    let max_queue_ratio = if stats_a.max_queue == stats_b.max_queue {
        1.0
    } else {
        stats_a.max_queue as f64 / stats_b.max_queue as f64
    };
    Ok(ComparisonReport {
        horizon: a.len() as u64,
        a: stats_a,
        b: stats_b,
        max_queue_ratio,
    })
}
