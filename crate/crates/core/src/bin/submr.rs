use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use submr::harness::{
    generate_instance, run_experiment, Algorithm, ExperimentSpec, HarnessError, InstanceSource,
    OptMode, RunOptions, Seeds,
};
use submr::sim::Enforcement;

#[derive(Parser)]
#[command(name = "submr", version, about = "Distributed threshold algorithms for submodular maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a seeded batch of trials and print a report.
    Run(RunArgs),
    /// Write a generated instance file.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment spec; flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_parser = parse_alg)]
    alg: Option<Algorithm>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Number of seeds, starting at --base-seed.
    #[arg(long, conflicts_with = "seed_list")]
    seeds: Option<u64>,
    /// Explicit comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// bruteforce, none, or a known OPT value.
    #[arg(long, value_parser = parse_opt)]
    opt: Option<OptMode>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, value_parser = parse_enforce)]
    enforce: Option<Enforcement>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Add wall time per trial to the report.
    #[arg(long)]
    timing: bool,
    /// Worker machine count.
    #[arg(long)]
    m: Option<usize>,
    /// Sample probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    c_large: Option<usize>,
    #[arg(long)]
    budget_regular: Option<usize>,
    #[arg(long)]
    budget_central: Option<usize>,
    /// Count PartitionAndSample steps as rounds.
    #[arg(long, value_enum)]
    count_distribution_round: Option<Switch>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// random-coverage, planted-sparse, uniform-additive or adversarial.
    kind: String,
    /// Parameters as key=value, e.g. n=100 universe=500.
    params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_alg(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_opt(s: &str) -> Result<OptMode, String> {
    s.parse()
}

fn parse_enforce(s: &str) -> Result<Enforcement, String> {
    s.parse()
}

fn build_spec(a: &RunArgs) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = match &a.spec {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => {
            let alg = a.alg.ok_or_else(|| HarnessError::Spec("--alg or --spec is required".into()))?;
            let k = a.k.ok_or_else(|| HarnessError::Spec("--k or --spec is required".into()))?;
            ExperimentSpec::new(alg, k, None)
        }
    };
    if let Some(alg) = a.alg {
        spec.algorithm = alg;
    }
    if let Some(k) = a.k {
        spec.k = k;
    }
    if let Some(path) = &a.instance {
        spec.instance = Some(InstanceSource::File { path: path.clone() });
    }
    if let Some(t) = a.t {
        spec.t = t;
    }
    if let Some(eps) = a.eps {
        spec.eps = eps;
    }
    if let Some(c) = a.seeds {
        spec.seeds = Seeds::Count(c);
    }
    if let Some(list) = &a.seed_list {
        spec.seeds = Seeds::List(list.clone());
    }
    if let Some(b) = a.base_seed {
        spec.base_seed = b;
    }
    if let Some(opt) = a.opt {
        spec.opt = opt;
    }
    if let Some(e) = a.enforce {
        spec.cluster.enforcement = e;
    }
    if a.m.is_some() {
        spec.cluster.machines = a.m;
    }
    if a.p.is_some() {
        spec.cluster.sample_prob = a.p;
    }
    if a.budget_regular.is_some() {
        spec.cluster.budget_regular = a.budget_regular;
    }
    if a.budget_central.is_some() {
        spec.cluster.budget_central = a.budget_central;
    }
    if let Some(c) = a.c_large {
        spec.c_large = c;
    }
    if let Some(s) = a.count_distribution_round {
        spec.count_distribution_round = matches!(s, Switch::On);
    }
    spec.apply_seed_env()?;
    spec.validate()?;
    Ok(spec)
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), HarnessError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(a: RunArgs) -> Result<(), HarnessError> {
    let spec = build_spec(&a)?;
    let opts = RunOptions {
        threads: a.threads,
        timing: a.timing,
    };
    let report = run_experiment(&spec, opts)?;
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        log::warn!("seed {}: {}", row.seed, row.error.as_deref().unwrap_or(""));
    }
    let text = match a.format {
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()? + "\n",
    };
    emit(a.output.as_ref(), &text)
}

fn generate(a: GenerateArgs) -> Result<(), HarnessError> {
    let params = a
        .params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| HarnessError::Spec(format!("parameter `{p}` is not key=value")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inst = generate_instance(&a.kind, &params, a.seed)?;
    emit(a.output.as_ref(), &inst.to_text())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
