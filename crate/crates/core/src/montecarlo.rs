//! Seeded Monte Carlo estimation of `P(G⃗_n has a Hamiltonian decomposition)`.
//!
//! Trial `t` at node count `n` samples with seed
//! `trial_seed(master_seed, n, t)`, so every trial can be replayed on its
//! own and results do not depend on how trials are scheduled.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::hamdec::{construct_line_decomposition, has_hamiltonian_decomposition, LineOrder, OutcomeTag};
use crate::rational::{q, Rational};
use crate::sampling::{group_counts, sample_graph, trial_seed, SampledGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact decision by perfect matching.
    Matching,
    /// Stage-by-stage line construction only.
    Constructive,
    /// Matching decides; the construction is run and recorded alongside.
    Both,
}

impl Method {
    fn runs_constructive(self) -> bool {
        matches!(self, Method::Constructive | Method::Both)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub graphon: StepGraphon,
    pub n_values: Vec<usize>,
    pub trials_per_n: usize,
    pub master_seed: u64,
    pub method: Method,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_n == 0 {
            return Err(Error::InvalidConfig("trials_per_n must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values is empty".into()));
        }
        if self.n_values[0] == 0 {
            return Err(Error::InvalidConfig("node counts must be positive".into()));
        }
        if self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("n_values must be strictly increasing".into()));
        }
        if self.method.runs_constructive() {
            LineOrder::from_graphon(&self.graphon)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub counts: Vec<usize>,
    pub decision: bool,
    #[serde(serialize_with = "serialize_tag")]
    pub constructive: OutcomeTag,
    pub elapsed_ms: f64,
}

fn serialize_tag<S: serde::Serializer>(tag: &OutcomeTag, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(tag)
}

/// Binomial proportion with a 95% Wilson score interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z_95: f64 = 1.959_963_984_540_054;

impl Estimate {
    pub fn from_counts(n: usize, trials: usize, successes: usize) -> Self {
        assert!(successes <= trials);
        if trials == 0 {
            return Estimate {
                n,
                trials,
                successes,
                estimate: 0.0,
                ci_low: 0.0,
                ci_high: 1.0,
            };
        }
        let t = trials as f64;
        let p = successes as f64 / t;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / t;
        let center = (p + z2 / (2.0 * t)) / denom;
        let half = Z_95 * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
        Estimate {
            n,
            trials,
            successes,
            estimate: p,
            ci_low: (center - half).max(0.0).min(p),
            ci_high: (center + half).min(1.0).max(p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub estimates: Vec<Estimate>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentResult {
    pub fn estimate_for(&self, n: usize) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.n == n)
    }

    pub fn records_for(&self, n: usize) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.n == n)
    }
}

/// Samples and decides one trial.
pub fn run_trial(cfg: &ExperimentConfig, line: Option<&LineOrder>, n: usize, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let seed = trial_seed(cfg.master_seed, n, trial);
    let sg = sample_graph(&cfg.graphon, n, seed);
    let (decision, constructive) = decide(&sg, cfg.method, line);
    TrialRecord {
        n,
        trial,
        seed,
        counts: group_counts(&sg).counts().to_vec(),
        decision,
        constructive,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn decide(sg: &SampledGraph, method: Method, line: Option<&LineOrder>) -> (bool, OutcomeTag) {
    let constructive = match (method.runs_constructive(), line) {
        (true, Some(line)) => construct_line_decomposition(sg, line)
            .expect("line order was validated against the graphon")
            .tag(),
        _ => OutcomeTag::NotRun,
    };
    let decision = match method {
        Method::Constructive => constructive == OutcomeTag::Success,
        Method::Matching | Method::Both => has_hamiltonian_decomposition(sg).0,
    };
    (decision, constructive)
}

/// Runs every trial of `cfg` on a pool of `threads` workers (0 = rayon's
/// default). Records come back ordered by `(n, trial)` whatever the pool
/// size.
pub fn run_trials(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let line = if cfg.method.runs_constructive() {
        Some(LineOrder::from_graphon(&cfg.graphon)?)
    } else {
        None
    };
    let tasks: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials_per_n).map(move |t| (n, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, t)| run_trial(cfg, line.as_ref(), n, t))
            .collect()
    });
    Ok(ExperimentResult {
        estimates: estimates(&records),
        records,
    })
}

/// Per-`n` success counts, ascending in `n`.
pub fn estimates(records: &[TrialRecord]) -> Vec<Estimate> {
    let mut tally: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in records {
        let e = tally.entry(r.n).or_default();
        e.0 += 1;
        e.1 += r.decision as usize;
    }
    tally
        .into_iter()
        .map(|(n, (trials, successes))| Estimate::from_counts(n, trials, successes))
        .collect()
}

/// Success rates of a two-block experiment split by the sign of `n_1 − n_2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalSplit {
    pub n: usize,
    pub first_larger: Estimate,
    pub second_larger: Estimate,
    pub ties: Estimate,
}

/// One split per node count present in `records`, ascending in `n`.
pub fn conditional_split(records: &[TrialRecord]) -> Result<Vec<ConditionalSplit>> {
    if let Some(r) = records.iter().find(|r| r.counts.len() != 2) {
        return Err(Error::NotTwoBlocks { q: r.counts.len() });
    }
    let mut tally: BTreeMap<usize, [(usize, usize); 3]> = BTreeMap::new();
    for r in records {
        let slot = match r.counts[0].cmp(&r.counts[1]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => 2,
        };
        let e = &mut tally.entry(r.n).or_default()[slot];
        e.0 += 1;
        e.1 += r.decision as usize;
    }
    Ok(tally
        .into_iter()
        .map(|(n, [gt, lt, eq])| ConditionalSplit {
            n,
            first_larger: Estimate::from_counts(n, gt.0, gt.1),
            second_larger: Estimate::from_counts(n, lt.0, lt.1),
            ties: Estimate::from_counts(n, eq.0, eq.1),
        })
        .collect())
}

/// Trial stream as CSV. With `with_timing` off the output is a pure
/// function of the configuration; the wall-clock column is omitted.
pub fn trials_csv(records: &[TrialRecord], blocks: usize, with_timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["n".into(), "trial".into(), "seed".into()];
    header.extend((1..=blocks).map(|i| format!("n_{i}")));
    header.push("decision".into());
    header.push("constructive_outcome".into());
    if with_timing {
        header.push("elapsed_ms".into());
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.n.to_string(), r.trial.to_string(), r.seed.to_string()];
        row.extend(r.counts.iter().map(ToString::to_string));
        row.push(r.decision.to_string());
        row.push(r.constructive.to_string());
        if with_timing {
            row.push(format!("{:.3}", r.elapsed_ms));
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

/// One row per `n`: estimate and Wilson bounds (plus mean trial time when
/// `with_timing`).
pub fn convergence_table(result: &ExperimentResult, with_timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "trials", "successes", "estimate", "ci_low", "ci_high"];
    if with_timing {
        header.push("mean_elapsed_ms");
    }
    w.write_record(&header)?;
    for e in &result.estimates {
        let mut row = vec![
            e.n.to_string(),
            e.trials.to_string(),
            e.successes.to_string(),
            format!("{:.6}", e.estimate),
            format!("{:.6}", e.ci_low),
            format!("{:.6}", e.ci_high),
        ];
        if with_timing {
            let times: Vec<f64> = result.records_for(e.n).map(|r| r.elapsed_ms).collect();
            let mean = times.iter().sum::<f64>() / times.len().max(1) as f64;
            row.push(format!("{mean:.3}"));
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

/// Pinned experiments reproducing the three limit regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Zero block on `[0, ½)²`, `½` elsewhere; limit ½.
    Borderline,
    /// Four-block line graphon with widths `(1/5, 3/10, 1/4, 1/4)`; limit 1.
    Line,
    /// Complete bipartite-support graphon sampled at odd `n`; always 0.
    NoOddCycle,
    /// Line graphon with widths `(3/5, 1/5, 1/10, 1/10)`; limit 0.
    OutsidePolytope,
}

pub const PRESET_MASTER_SEED: u64 = 0x6A09_E667_F3BC_C908;

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Borderline, Preset::Line, Preset::NoOddCycle, Preset::OutsidePolytope];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Borderline => "borderline",
            Preset::Line => "line",
            Preset::NoOddCycle => "no-odd-cycle",
            Preset::OutsidePolytope => "outside-polytope",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn graphon(self) -> StepGraphon {
        match self {
            Preset::Borderline => borderline_graphon(q(1, 2)),
            Preset::Line => line_graphon(&[q(1, 5), q(3, 10), q(1, 4), q(1, 4)], q(1, 2)),
            Preset::NoOddCycle => StepGraphon::new(
                vec![q(0, 1), q(1, 2), q(1, 1)],
                vec![vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]],
            )
            .expect("valid preset"),
            Preset::OutsidePolytope => line_graphon(&[q(3, 5), q(1, 5), q(1, 10), q(1, 10)], q(1, 2)),
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let (n_values, trials_per_n, method) = match self {
            Preset::Borderline => (vec![500, 1000, 2000], 2000, Method::Both),
            Preset::Line => (vec![200, 400, 800], 500, Method::Both),
            Preset::NoOddCycle => (vec![51, 101, 201, 401], 200, Method::Matching),
            Preset::OutsidePolytope => (vec![250, 500, 1000], 500, Method::Both),
        };
        ExperimentConfig {
            graphon: self.graphon(),
            n_values,
            trials_per_n,
            master_seed: PRESET_MASTER_SEED,
            method,
        }
    }
}

/// `W = 0` on `[0, ½)²` and `p` elsewhere.
pub fn borderline_graphon(p: Rational) -> StepGraphon {
    StepGraphon::new(
        vec![q(0, 1), q(1, 2), q(1, 1)],
        vec![vec![q(0, 1), p.clone()], vec![p.clone(), p]],
    )
    .expect("valid borderline graphon")
}

/// Line graphon with the given block widths: value `p` on consecutive
/// off-diagonal blocks and on the last diagonal block, zero elsewhere.
pub fn line_graphon(widths: &[Rational], p: Rational) -> StepGraphon {
    let k = widths.len();
    let mut partition = vec![Rational::zero()];
    for w in widths {
        let next = partition.last().unwrap() + w;
        partition.push(next);
    }
    let mut values = vec![vec![Rational::zero(); k]; k];
    for i in 1..k {
        values[i - 1][i] = p.clone();
        values[i][i - 1] = p.clone();
    }
    values[k - 1][k - 1] = p;
    StepGraphon::new(partition, values).expect("valid line graphon")
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    preset: Option<&'a str>,
    master_seed: u64,
    trials_per_n: usize,
    method: Method,
    graphon: &'a StepGraphon,
    estimates: &'a [Estimate],
    constructive_success_rate: Option<Vec<(usize, f64)>>,
    conditional_split: Option<Vec<ConditionalSplit>>,
}

fn constructive_rates(cfg: &ExperimentConfig, result: &ExperimentResult) -> Option<Vec<(usize, f64)>> {
    cfg.method.runs_constructive().then(|| {
        cfg.n_values
            .iter()
            .map(|&n| {
                let (total, ok) = result
                    .records_for(n)
                    .fold((0usize, 0usize), |(t, s), r| (t + 1, s + (r.constructive == OutcomeTag::Success) as usize));
                (n, ok as f64 / total.max(1) as f64)
            })
            .collect()
    })
}

/// Writes `trials.csv`, `convergence.csv`, `summary.json` and `summary.txt`
/// into `dir` (created if missing).
pub fn write_outputs(
    dir: &Path,
    preset: Option<Preset>,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    with_timing: bool,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("trials.csv"), trials_csv(&result.records, cfg.graphon.blocks(), with_timing)?)?;
    fs::write(dir.join("convergence.csv"), convergence_table(result, with_timing)?)?;

    let split = if cfg.graphon.blocks() == 2 {
        Some(conditional_split(&result.records)?)
    } else {
        None
    };
    let summary = Summary {
        preset: preset.map(Preset::name),
        master_seed: cfg.master_seed,
        trials_per_n: cfg.trials_per_n,
        method: cfg.method,
        graphon: &cfg.graphon,
        estimates: &result.estimates,
        constructive_success_rate: constructive_rates(cfg, result),
        conditional_split: split.clone(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    fs::write(dir.join("summary.txt"), summary_text(preset, cfg, result, split.as_deref()))?;
    Ok(())
}

pub fn summary_text(
    preset: Option<Preset>,
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    split: Option<&[ConditionalSplit]>,
) -> String {
    let mut s = String::new();
    let title = preset.map_or("custom experiment", Preset::name);
    let _ = writeln!(s, "{title}: {} trials per n, master seed {:#x}", cfg.trials_per_n, cfg.master_seed);
    let _ = writeln!(s, "{:>8} {:>10} {:>22}", "n", "estimate", "95% Wilson interval");
    for e in &result.estimates {
        let _ = writeln!(s, "{:>8} {:>10.4} [{:>8.4}, {:>8.4}]", e.n, e.estimate, e.ci_low, e.ci_high);
    }
    if let Some(rates) = constructive_rates(cfg, result) {
        let _ = writeln!(s, "constructive success rate:");
        for (n, r) in rates {
            let _ = writeln!(s, "{n:>8} {r:>10.4}");
        }
    }
    if let Some(split) = split {
        let _ = writeln!(s, "split by sign(n_1 - n_2):");
        for c in split {
            let _ = writeln!(
                s,
                "{:>8}  n_1>n_2: {}/{}  n_1<n_2: {}/{}  ties: {}/{}",
                c.n,
                c.first_larger.successes,
                c.first_larger.trials,
                c.second_larger.successes,
                c.second_larger.trials,
                c.ties.successes,
                c.ties.trials
            );
        }
    }
    s
}
