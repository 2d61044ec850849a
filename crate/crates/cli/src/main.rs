use catind_cli::config::{
    full_grid, large_grid, small_grid, BenchConfig, DiffConfig, PowerConfig, Type1Config,
    DEFAULT_ALPHA, DEFAULT_BAND_WIDEN, DEFAULT_BENCH_REPETITIONS, DEFAULT_COLUMNS,
    DEFAULT_PERMUTATIONS, DEFAULT_REPLICATIONS,
};
use catind_cli::experiments::{run_bench, run_diff, run_power, run_type1};
use catind_cli::ingest::{run_single_test, SingleTestRequest};
use catind_cli::report::{render_bench, render_diff, render_power, render_type1};
use catind_cli::CliError;
use catind_core::{Method, NullDistribution};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "catind",
    version,
    about = "Categorical independence tests (X2, G2, permutation G2) and a Monte Carlo simulation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for pair- and replication-level parallelism
    /// (0 = all cores, 1 = fully serial). Results never depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Test two CSV columns for independence, optionally conditioning on
    /// further columns.
    Test(TestArgs),
    /// Average difference between the G2 and X2 statistics over a grid of
    /// sample sizes and cardinalities.
    SimDiff(SimDiffArgs),
    /// Type I error study: rejection rates over all column pairs of a
    /// null matrix.
    SimType1(SimType1Args),
    /// Power study under the logistic-link alternative.
    SimPower(SimPowerArgs),
    /// Wall-clock timing of the all-pairs testing procedures.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    X2,
    G2,
    PermG2,
    PermX2,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::X2 => Method::X2,
            MethodArg::G2 => Method::G2,
            MethodArg::PermG2 => Method::PermG2,
            MethodArg::PermX2 => Method::PermX2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Uniform,
    Binomial,
}

impl From<DistArg> for NullDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Uniform => NullDistribution::DiscreteUniform,
            DistArg::Binomial => NullDistribution::Binomial,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    /// Input CSV file (header row required).
    #[arg(long)]
    csv: PathBuf,
    /// Column name of the first variable.
    #[arg(long)]
    x: String,
    /// Column name of the second variable.
    #[arg(long)]
    y: String,
    /// Conditioning column names (repeatable).
    #[arg(long = "z")]
    z: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::X2)]
    method: MethodArg,
    /// Number of permutations for permutation methods.
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    perms: usize,
    /// Use the raw proportion b/R instead of (1+b)/(R+1).
    #[arg(long)]
    raw_proportion: bool,
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    /// Also write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimDiffArgs {
    /// Sample sizes: "small", "large", "full" or a comma list like
    /// "100,200,400".
    #[arg(long, default_value = "full")]
    sizes: String,
    /// Cardinalities of the tested variables.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 5])]
    cards: Vec<usize>,
    /// Number of conditioning variables (0, 1 or 2).
    #[arg(long, default_value_t = 0)]
    zvars: usize,
    #[arg(long, value_enum, default_value_t = DistArg::Binomial)]
    dist: DistArg,
    /// Number of data columns (each grid point tests all pairs).
    #[arg(long, default_value_t = DEFAULT_COLUMNS)]
    cols: usize,
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimType1Args {
    #[arg(long, default_value = "small")]
    sizes: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 5])]
    cards: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    zvars: usize,
    #[arg(long, value_enum, default_value_t = DistArg::Binomial)]
    dist: DistArg,
    /// Testing procedures to evaluate on each grid point.
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![MethodArg::X2, MethodArg::G2, MethodArg::PermG2])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    perms: usize,
    #[arg(long)]
    raw_proportion: bool,
    /// Widening factor on the binomial standard error of the size-correct
    /// band (tests sharing a column are dependent).
    #[arg(long, default_value_t = DEFAULT_BAND_WIDEN)]
    band_widen: f64,
    #[arg(long, default_value_t = DEFAULT_COLUMNS)]
    cols: usize,
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimPowerArgs {
    #[arg(long, default_value = "100,200,300,500,1000")]
    sizes: String,
    /// Binomial size parameters of the alternative (observed support is
    /// one larger).
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4])]
    cards: Vec<usize>,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    b_min: i32,
    #[arg(long, default_value_t = 3)]
    b_max: i32,
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![MethodArg::X2, MethodArg::G2, MethodArg::PermG2])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    perms: usize,
    #[arg(long)]
    raw_proportion: bool,
    /// Replications per (cardinality, sample size, effect) point.
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    reps: usize,
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "100,200,400,800")]
    sizes: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 3, 4, 5])]
    cards: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    perms: usize,
    /// Timed repetitions per method (a warm-up run is excluded).
    #[arg(long, default_value_t = DEFAULT_BENCH_REPETITIONS)]
    repetitions: usize,
    #[arg(long, default_value_t = DEFAULT_COLUMNS)]
    cols: usize,
    #[arg(long, default_value_t = 1729)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, CliError> {
    match spec {
        "small" => Ok(small_grid()),
        "large" => Ok(large_grid()),
        "full" => Ok(full_grid()),
        list => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("invalid sample size '{v}'")))
            })
            .collect(),
    }
}

fn emit(rendered: String, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = if cli.workers == 0 { None } else { Some(cli.workers) };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure {t} workers: {e}")))?;
    }

    match cli.command {
        Command::Test(args) => {
            let req = SingleTestRequest {
                x_column: args.x,
                y_column: args.y,
                z_columns: args.z,
                method: args.method.into(),
                n_permutations: args.perms,
                raw_proportion: args.raw_proportion,
                seed: args.seed,
            };
            let report = run_single_test(&args.csv, &req)?;
            let json = serde_json::to_string_pretty(&report)
                .expect("report serialization cannot fail");
            println!("{json}");
            if let Some(path) = args.out {
                std::fs::write(&path, format!("{json}\n"))
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::SimDiff(args) => {
            let cfg = DiffConfig {
                sizes: parse_sizes(&args.sizes)?,
                cards: args.cards,
                n_conditioning: args.zvars,
                distribution: args.dist.into(),
                n_columns: args.cols,
                seed: args.seed,
            };
            emit(render_diff(&run_diff(&cfg)?), args.out.as_ref())
        }
        Command::SimType1(args) => {
            let cfg = Type1Config {
                sizes: parse_sizes(&args.sizes)?,
                cards: args.cards,
                n_conditioning: args.zvars,
                distribution: args.dist.into(),
                methods: args.methods.into_iter().map(Method::from).collect(),
                alpha: args.alpha,
                n_permutations: args.perms,
                raw_proportion: args.raw_proportion,
                band_widen: args.band_widen,
                n_columns: args.cols,
                seed: args.seed,
            };
            emit(render_type1(&run_type1(&cfg)?), args.out.as_ref())
        }
        Command::SimPower(args) => {
            let cfg = PowerConfig {
                sizes: parse_sizes(&args.sizes)?,
                cards: args.cards,
                b_min: args.b_min,
                b_max: args.b_max,
                methods: args.methods.into_iter().map(Method::from).collect(),
                alpha: args.alpha,
                n_permutations: args.perms,
                raw_proportion: args.raw_proportion,
                replications: args.reps,
                seed: args.seed,
            };
            emit(render_power(&run_power(&cfg)?), args.out.as_ref())
        }
        Command::Bench(args) => {
            let cfg = BenchConfig {
                sizes: parse_sizes(&args.sizes)?,
                cards: args.cards,
                n_permutations: args.perms,
                repetitions: args.repetitions,
                n_columns: args.cols,
                seed: args.seed,
            };
            emit(render_bench(&run_bench(&cfg)?), args.out.as_ref())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let _ = e.print();
            std::process::exit(3);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
