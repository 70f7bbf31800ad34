//! `layerpack` command-line front end.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use layerpack::{parse_permutation, parse_shape, LayeredPermuton, LayeredShape, Permutation};
use serde::Serialize;
use serde_json::json;

use report::CliError;

#[derive(Debug, Parser)]
#[command(name = "layerpack", version)]
#[command(about = "Densities of layered permutation patterns in permutations and layered permutons")]
struct Cli {
    /// File of `key = value` lines presetting flags; the command line wins.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for restarts and enumeration.
    #[arg(long, global = true, env = "LAYERPACK_THREADS")]
    threads: Option<usize>,

    /// Report a null duration so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact occurrence count and density of a pattern in a permutation.
    Count(CountArgs),
    /// Density of a layered pattern in a layered permuton, with its gradient.
    Density(DensityArgs),
    /// Maximize the density over layered permutons with K layers.
    Optimize(OptimizeArgs),
    /// Best layered permutations (or all permutations) of a given order.
    Exact(ExactArgs),
    /// Draw random permutations from a layered permuton, or estimate a density.
    Sample(SampleArgs),
    /// Embed a layered permutation as a layered permuton.
    Embed(EmbedArgs),
    /// Quantitative bounds behind the layer-count results.
    Bounds {
        #[command(subcommand)]
        action: BoundsAction,
    },
    /// Run the acceptance checks and report one record per criterion.
    VerifyPaper(VerifyArgs),
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("pattern_input").required(true).args(["pattern", "pattern_shape"])))]
#[command(group(ArgGroup::new("host_input").required(true).args(["host", "host_shape"])))]
struct CountArgs {
    /// Pattern permutation, e.g. `1,3,2` or "1 3 2".
    #[arg(long, value_parser = permutation_arg)]
    pattern: Option<Permutation>,

    /// Pattern given by its layer sizes, e.g. `2,2`.
    #[arg(long, value_parser = shape_arg)]
    pattern_shape: Option<LayeredShape>,

    /// Host permutation.
    #[arg(long, value_parser = permutation_arg)]
    host: Option<Permutation>,

    /// Host given by its layer sizes.
    #[arg(long, value_parser = shape_arg)]
    host_shape: Option<LayeredShape>,

    /// Enumerate subsets even when both objects are layered.
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args, Serialize)]
struct DensityArgs {
    /// Pattern layer sizes, e.g. `1,2`.
    #[arg(long, value_parser = shape_arg)]
    pattern: LayeredShape,

    /// Layer lengths of the permuton, e.g. `1/3,2/3` or `0.25,0.75`.
    #[arg(long, value_parser = permuton_arg)]
    permuton: LayeredPermuton,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("layers").required(true).args(["k", "sweep"])))]
struct OptimizeArgs {
    /// Pattern layer sizes, e.g. `13,1,2`.
    #[arg(long, value_parser = shape_arg)]
    pattern: LayeredShape,

    /// Number of layers.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    k: Option<usize>,

    /// Range of layer counts `a:b`, both ends included.
    #[arg(long, value_parser = range_arg)]
    sweep: Option<KRange>,

    /// Restrict to geometric layer profiles and optimize the ratio.
    #[arg(long)]
    geometric: bool,

    /// Geometric profile direction; `best` tries both.
    #[arg(long, value_enum, default_value_t = OrientationArg::Best)]
    orientation: OrientationArg,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Random restarts per K.
    #[arg(long, default_value_t = 16)]
    restarts: usize,

    /// Stationarity tolerance on the spread of the gradient.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Iteration cap per restart.
    #[arg(long, default_value_t = 5000)]
    max_iters: usize,
}

#[derive(Debug, Args, Serialize)]
struct ExactArgs {
    /// Pattern layer sizes.
    #[arg(long, value_parser = shape_arg)]
    pattern: LayeredShape,

    /// Order of the host permutations.
    #[arg(long)]
    n: usize,

    /// Search all n! permutations instead of the compositions of n.
    #[arg(long, conflicts_with = "pruned")]
    all_permutations: bool,

    /// Branch-and-bound over compositions, for n beyond the enumeration guard.
    #[arg(long)]
    pruned: bool,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["m", "pattern"])))]
struct SampleArgs {
    /// Layer lengths of the permuton.
    #[arg(long, value_parser = permuton_arg)]
    permuton: LayeredPermuton,

    /// Order of the sampled permutations.
    #[arg(long)]
    m: Option<usize>,

    /// Number of permutations to draw.
    #[arg(long, default_value_t = 1, requires = "m")]
    count: usize,

    /// Estimate the density of this pattern by Monte Carlo instead.
    #[arg(long, value_parser = permutation_arg)]
    pattern: Option<Permutation>,

    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000, requires = "pattern")]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("host_input").required(true).args(["permutation", "shape"])))]
struct EmbedArgs {
    /// A layered permutation.
    #[arg(long, value_parser = permutation_arg)]
    permutation: Option<Permutation>,

    /// Layer sizes of the permutation.
    #[arg(long, value_parser = shape_arg)]
    shape: Option<LayeredShape>,

    /// Also compare the pattern's density before and after embedding.
    #[arg(long, value_parser = shape_arg)]
    pattern: Option<LayeredShape>,

    /// `csv` prints the support segments `x_start,x_end,y_start,y_end`.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
enum BoundsAction {
    /// Bounds for the pattern (n, 1, tail) at one n.
    Counterexample {
        #[arg(long)]
        n: usize,
        /// Tail layer sizes, e.g. `2`.
        #[arg(long, value_parser = shape_arg)]
        tail: LayeredShape,
        /// Lower bound on the density of (1, tail): a number, or `132` for 2√3−3.
        #[arg(long, value_parser = d_prime_arg)]
        d_prime: Option<DPrime>,
    },
    /// Smallest n for which the bounds rule out finitely many layers.
    FindN0 {
        #[arg(long, value_parser = shape_arg)]
        tail: LayeredShape,
        #[arg(long, value_parser = d_prime_arg)]
        d_prime: Option<DPrime>,
        /// Largest n examined.
        #[arg(long, default_value_t = layerpack::bounds::DEFAULT_N0_HORIZON)]
        horizon: usize,
    },
    /// Constants of the layer-merging argument.
    MergeConstants {
        #[arg(long, value_parser = shape_arg)]
        pattern: LayeredShape,
        /// Minimum layer fraction; defaults to 1/(2m³k^(2m+1)).
        #[arg(long = "C")]
        #[serde(rename = "C")]
        big_c: Option<f64>,
    },
    /// Layer-length thresholds for patterns without consecutive singletons.
    #[command(group(ArgGroup::new("eps").required(true).args(["epsilon", "permuton"])))]
    Thresholds {
        #[arg(long, value_parser = shape_arg)]
        pattern: LayeredShape,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Take epsilon from the (2k−3)-th longest layer of this permuton.
        #[arg(long, value_parser = permuton_arg)]
        permuton: Option<LayeredPermuton>,
    },
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// Criteria to run, by key or number; all when omitted.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,

    /// Largest n in the counterexample chain.
    #[arg(long, default_value_t = 100)]
    horizon: usize,

    /// Random hosts in the embedding check.
    #[arg(long, default_value_t = 1000)]
    trials: usize,

    /// Monte Carlo trials per grid pair.
    #[arg(long, default_value_t = 1_000_000)]
    mc_trials: u64,

    #[arg(long, default_value_t = 20_240_611)]
    seed: u64,

    /// Random restarts per optimization.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OrientationArg {
    Increasing,
    Decreasing,
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct KRange {
    from: usize,
    to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DPrime {
    Value(f64),
    Packing132,
}

fn permutation_arg(s: &str) -> Result<Permutation, String> {
    parse_permutation(s).map_err(|e| e.to_string())
}

fn shape_arg(s: &str) -> Result<LayeredShape, String> {
    parse_shape(s).map_err(|e| e.to_string())
}

fn permuton_arg(s: &str) -> Result<LayeredPermuton, String> {
    LayeredPermuton::parse(s).map_err(|e| e.to_string())
}

fn range_arg(s: &str) -> Result<KRange, String> {
    let (a, b) = s.split_once(':').ok_or("expected `a:b`")?;
    let from: usize = a.trim().parse().map_err(|_| format!("column 1: `{a}` is not a layer count"))?;
    let to: usize = b.trim().parse().map_err(|_| format!("column {}: `{b}` is not a layer count", a.len() + 2))?;
    if from == 0 || to < from {
        return Err(format!("empty or invalid range {from}:{to}"));
    }
    Ok(KRange { from, to })
}

fn d_prime_arg(s: &str) -> Result<DPrime, String> {
    match s {
        "132" | "packing-132" => Ok(DPrime::Packing132),
        _ => {
            let v: f64 = s.parse().map_err(|_| format!("`{s}` is neither a number nor `132`"))?;
            if v > 0.0 && v <= 1.0 {
                Ok(DPrime::Value(v))
            } else {
                Err(format!("{v} is outside (0, 1]"))
            }
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Density(_) => "density",
            Command::Optimize(_) => "optimize",
            Command::Exact(_) => "exact",
            Command::Sample(_) => "sample",
            Command::Embed(_) => "embed",
            Command::Bounds { .. } => "bounds",
            Command::VerifyPaper(_) => "verify-paper",
        }
    }

    fn args_value(&self) -> serde_json::Value {
        match self {
            Command::Count(a) => report::to_value(a),
            Command::Density(a) => report::to_value(a),
            Command::Optimize(a) => report::to_value(a),
            Command::Exact(a) => report::to_value(a),
            Command::Sample(a) => report::to_value(a),
            Command::Embed(a) => report::to_value(a),
            Command::Bounds { action } => report::to_value(action),
            Command::VerifyPaper(a) => report::to_value(a),
        }
    }
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            n
        }
        None => rayon::current_num_threads(),
    };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Count(a) => commands::count(a)?,
        Command::Density(a) => commands::density(a)?,
        Command::Optimize(a) => commands::optimize(a)?,
        Command::Exact(a) => commands::exact(a)?,
        Command::Sample(a) => commands::sample(a)?,
        Command::Embed(a) => commands::embed(a)?,
        Command::Bounds { action } => commands::bounds(action)?,
        Command::VerifyPaper(a) => commands::verify(a, cli.no_timing)?,
    };
    let duration = (!cli.no_timing).then(|| start.elapsed().as_secs_f64());
    let config = json!({
        "threads": threads,
        "config_file": cli.config,
        "no_timing": cli.no_timing,
        "output": cli.output,
        "args": cli.command.args_value(),
    });
    let text = report::render(cli.command.name(), &config, &outcome, duration);
    report::write(&text, cli.output.as_deref())?;
    Ok(outcome.status.code())
}
