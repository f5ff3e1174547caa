use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hprop::conditions::classify;
use hprop::hamdec::{construct_line_decomposition, has_hamiltonian_decomposition, verify_decomposition, LineOrder};
use hprop::montecarlo::{run_trials, write_outputs, ExperimentConfig, Method, Preset};
use hprop::sampling::{read_dump_str, sample_graph, write_dump};
use hprop::{Error, StepGraphon};

#[derive(Parser)]
#[command(name = "hprop", version, about = "Step-graphon H-property analysis and Hamiltonian decomposition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a step-graphon; prints the condition report as JSON.
    Analyze {
        #[arg(long)]
        graphon: PathBuf,
    },
    /// Sample G_n ~ W and write a graph dump.
    Sample {
        #[arg(long)]
        graphon: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether a dumped graph has a Hamiltonian decomposition.
    Decide {
        #[arg(long)]
        graph: PathBuf,
        /// Use the line construction instead of perfect matching.
        #[arg(long, requires = "graphon")]
        constructive: bool,
        /// Line graphon the graph was sampled from (with --constructive).
        #[arg(long)]
        graphon: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment (a preset, or a custom graphon).
    Mc(McArgs),
    /// Re-run one of the pinned presets.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Borderline,
    Line,
    NoOddCycle,
    OutsidePolytope,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Borderline => Preset::Borderline,
            PresetArg::Line => Preset::Line,
            PresetArg::NoOddCycle => Preset::NoOddCycle,
            PresetArg::OutsidePolytope => Preset::OutsidePolytope,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Matching,
    Constructive,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = one per CPU). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Add wall-clock columns to the CSV outputs (makes them nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, value_enum)]
    preset: PresetArg,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, value_enum, conflicts_with = "graphon")]
    preset: Option<PresetArg>,
    #[arg(long, required_unless_present = "preset")]
    graphon: Option<PathBuf>,
    /// Node counts, comma separated and increasing.
    #[arg(long, value_delimiter = ',', requires = "graphon")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "matching")]
    method: MethodArg,
    #[command(flatten)]
    run: RunArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotALineGraphon(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_graphon(path: &Path) -> Result<StepGraphon, Failure> {
    StepGraphon::from_json_str(&read_text(path)?).map_err(Failure::from)
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::input(e.to_string())),
        _ => Ok(()),
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::input(e.to_string()))?;
    emit(&(text + "\n"))
}

fn analyze(graphon: &Path) -> Result<(), Failure> {
    let report = classify(&load_graphon(graphon)?)?;
    emit(&(report.to_json_string() + "\n"))
}

fn sample(graphon: &Path, n: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let g = load_graphon(graphon)?;
    let sg = sample_graph(&g, n, seed);
    let file = fs::File::create(out).map_err(|e| Failure::input(format!("cannot write {}: {e}", out.display())))?;
    let mut w = io::BufWriter::new(file);
    write_dump(&sg, &mut w)?;
    w.flush().map_err(|e| Failure::input(e.to_string()))
}

fn decide(graph: &Path, constructive: bool, graphon: Option<&Path>) -> Result<(), Failure> {
    let sg = read_dump_str(&read_text(graph)?)?;
    let report = if constructive {
        let g = load_graphon(graphon.expect("clap enforces --graphon"))?;
        let line = LineOrder::from_graphon(&g)?;
        if sg.blocks() != g.blocks() {
            return Err(Failure::input(format!(
                "ShapeMismatch: graph has {} groups but graphon has {} blocks",
                sg.blocks(),
                g.blocks()
            )));
        }
        let outcome = construct_line_decomposition(&sg, &line)?;
        let cycles = outcome.decomposition().cloned();
        if let Some(hd) = &cycles {
            assert!(verify_decomposition(&sg, hd), "construction produced an invalid decomposition");
        }
        json!({
            "decision": outcome.is_success(),
            "method": "constructive",
            "cycles": cycles.map(|hd| hd.cycles),
            "outcome": outcome.tag().to_string(),
        })
    } else {
        let (decision, hd) = has_hamiltonian_decomposition(&sg);
        if let Some(hd) = &hd {
            assert!(verify_decomposition(&sg, hd), "matching produced an invalid decomposition");
        }
        json!({
            "decision": decision,
            "method": "matching",
            "cycles": hd.map(|hd| hd.cycles),
        })
    };
    print_json(&report)
}

fn run(preset: Option<Preset>, cfg: ExperimentConfig, args: &RunArgs) -> Result<(), Failure> {
    cfg.validate()?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::input(format!("cannot create output directory {}: {e}", args.out.display())))?;
    let probe = args.out.join(".write-test");
    fs::write(&probe, b"")
        .map_err(|e| Failure::input(format!("output directory {} is not writable: {e}", args.out.display())))?;
    let _ = fs::remove_file(&probe);

    let result = run_trials(&cfg, args.threads)?;
    write_outputs(&args.out, preset, &cfg, &result, args.timing)
        .map_err(|e| Failure::input(format!("writing outputs to {}: {e}", args.out.display())))?;
    emit(&fs::read_to_string(args.out.join("summary.txt")).unwrap_or_default())
}

fn mc(args: &McArgs) -> Result<(), Failure> {
    if let Some(p) = args.preset {
        let p = Preset::from(p);
        return run(Some(p), p.config(), &args.run);
    }
    let graphon = load_graphon(args.graphon.as_deref().expect("clap enforces --graphon"))?;
    let method = match args.method {
        MethodArg::Matching => Method::Matching,
        MethodArg::Constructive => Method::Constructive,
        MethodArg::Both => Method::Both,
    };
    let cfg = ExperimentConfig {
        graphon,
        n_values: args.n.clone(),
        trials_per_n: args.trials,
        master_seed: args.seed,
        method,
    };
    run(None, cfg, &args.run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Analyze { graphon } => analyze(graphon),
        Command::Sample { graphon, n, seed, out } => sample(graphon, *n, *seed, out),
        Command::Decide {
            graph,
            constructive,
            graphon,
        } => decide(graph, *constructive, graphon.as_deref()),
        Command::Mc(args) => mc(args),
        Command::Reproduce(args) => {
            let p = Preset::from(args.preset);
            run(Some(p), p.config(), &args.run)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
