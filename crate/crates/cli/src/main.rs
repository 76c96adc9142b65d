//! `wgs-random`: experiments on random circuits driven by measurements on
//! weighted graph states.
//!
//! Every subcommand writes CSV (or a single number) to stdout or `--out`.
//! Output is assembled in memory and written only after the computation
//! succeeds. Exit status 2 means bad arguments, 1 a runtime failure.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wgs_core::experiments::{format_sig12, pmf_csv, ConvergenceSpec};
use wgs_core::rng::input_stream;
use wgs_core::scheme::validate_phi;
use wgs_core::{
    burnin_mean_entropy, column_step, convergence_curve, entropy_histogram_experiment,
    entropy_series, haar_sample, mbqc_column_oracle, page_average, phi_scan,
    stabilizer_entropy_pmf, ExperimentSpec, InputKind, SamplingMode, SchemeConfig, ToCsv,
};

#[derive(Parser, Debug)]
#[command(name = "wgs-random", version, about = "Random circuits from fixed-basis measurements on weighted graph states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy after every step of a single trajectory (step,entropy_bits)
    Run(RunArgs),
    /// Burn in one trajectory, then record the entropy after every step (step,entropy_bits)
    Burnin(BurninArgs),
    /// Density histogram of post-burn-in entropies (bin_lo,bin_hi,density)
    Histogram(HistogramArgs),
    /// Depth needed for the trial-averaged entropy to reach the Page value (converge.csv)
    Converge(ConvergeArgs),
    /// Mean entropy at fixed depth for several angles (phiscan.csv)
    Phiscan(PhiscanArgs),
    /// Haar-average entropy of N_A qubits out of N_A + N_B, in bits
    Page(PageArgs),
    /// Entropy distribution of uniformly random stabilizer states (s_a,probability)
    Stabpmf(StabpmfArgs),
    /// Compare the column step against a literal measurement simulation
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Worker threads (output does not depend on this)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Number of rows (qubits)
    #[arg(long)]
    n: usize,
    /// Size of subsystem A (rows 0..N_A)
    #[arg(long, default_value_t = 1)]
    na: usize,
    /// Number of column steps
    #[arg(long, default_value_t = 100)]
    length: usize,
    /// Vertical gate angle: radians, or pi, 5pi/8, 2pi, ...
    #[arg(long, default_value = "5pi/8", value_parser = parse_phi)]
    phi: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "haar", value_parser = parse_input)]
    input: InputKind,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BurninArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    na: usize,
    #[arg(long, default_value = "5pi/8", value_parser = parse_phi)]
    phi: f64,
    #[arg(long)]
    seed: u64,
    /// Unrecorded steps before sampling
    #[arg(long, default_value_t = 10_000)]
    burnin: usize,
    /// Recorded steps
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value = "haar", value_parser = parse_input)]
    input: InputKind,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct HistogramArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    na: usize,
    #[arg(long, default_value = "5pi/8", value_parser = parse_phi)]
    phi: f64,
    #[arg(long)]
    seed: u64,
    /// Steps before sampling (per trajectory in independent mode)
    #[arg(long, default_value_t = 10_000)]
    burnin: usize,
    /// Samples in trajectory mode
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Trajectories in independent mode
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 500)]
    bins: usize,
    #[arg(long, default_value = "haar", value_parser = parse_input)]
    input: InputKind,
    #[arg(long, default_value = "trajectory", value_parser = parse_mode)]
    mode: SamplingMode,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Row counts, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    na: usize,
    #[arg(long, default_value = "5pi/8", value_parser = parse_phi)]
    phi: f64,
    /// Accuracy levels, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    epsilon: Vec<f64>,
    /// Consecutive depths that must stay within epsilon
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    max_depth: usize,
    #[arg(long, default_value = "zeros", value_parser = parse_input)]
    input: InputKind,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PhiscanArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    na: usize,
    /// Angles, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse_phi, default_value = "pi/8,pi/4,3pi/8,pi/2,5pi/8,3pi/4,7pi/8,pi,2pi")]
    phi: Vec<f64>,
    /// Depth at which the mean entropy is evaluated
    #[arg(long, visible_alias = "depth", default_value_t = 20)]
    length: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value = "zeros", value_parser = parse_input)]
    input: InputKind,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PageArgs {
    #[arg(long)]
    na: usize,
    #[arg(long)]
    nb: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct StabpmfArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    na: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Row counts to check, comma separated (at most 8)
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    n: Vec<usize>,
    /// Random inputs per row count
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value = "5pi/8", value_parser = parse_phi)]
    phi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

/// Parses radians given as a decimal or as `[k]pi[/d]`.
fn parse_phi(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let value = if let Some(pos) = t.find("pi") {
        let (coef, rest) = (&t[..pos], &t[pos + 2..]);
        let coef = match coef.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| format!("bad coefficient in angle '{s}'"))?,
        };
        let denom = match rest {
            "" => 1.0,
            r => r
                .strip_prefix('/')
                .and_then(|d| d.parse::<f64>().ok())
                .ok_or_else(|| format!("bad denominator in angle '{s}'"))?,
        };
        coef * PI / denom
    } else {
        t.parse::<f64>().map_err(|_| format!("cannot parse angle '{s}'"))?
    };
    validate_phi(value).map_err(|e| e.to_string())?;
    Ok(value)
}

fn parse_input(s: &str) -> Result<InputKind, String> {
    s.parse().map_err(|e: wgs_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SamplingMode, String> {
    s.parse().map_err(|e: wgs_core::Error| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<wgs_core::Error> for Failure {
    fn from(e: wgs_core::Error) -> Self {
        match e {
            wgs_core::Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn scheme(n: usize, length: usize, phi: f64, na: usize, seed: u64) -> Result<SchemeConfig, Failure> {
    let config = SchemeConfig::new(n, length, phi, na, seed);
    config.validate()?;
    Ok(config)
}

fn run(args: &RunArgs) -> Outcome {
    let config = scheme(args.n, args.length, args.phi, args.na, args.seed)?;
    Ok(entropy_series(&config, args.input)?.to_csv())
}

fn burnin(args: &BurninArgs) -> Outcome {
    let mut spec = ExperimentSpec::new(scheme(args.n, 0, args.phi, args.na, args.seed)?);
    spec.burnin_steps = args.burnin;
    spec.sample_steps = args.samples;
    spec.input_kind = args.input;
    spec.validate()?;
    let result = burnin_mean_entropy(&spec)?;
    let page = if 2 * args.na <= args.n {
        format_sig12(page_average(args.na, args.n - args.na)?)
    } else {
        "n/a".into()
    };
    eprintln!(
        "mean_entropy_bits={} std_error={} page={page}",
        format_sig12(result.mean),
        format_sig12(result.std_error)
    );
    Ok(result.to_csv())
}

fn histogram(args: &HistogramArgs) -> Outcome {
    let mut spec = ExperimentSpec::new(scheme(args.n, 0, args.phi, args.na, args.seed)?);
    spec.burnin_steps = args.burnin;
    spec.sample_steps = args.samples;
    spec.trajectories = args.trials;
    spec.bins = args.bins;
    spec.input_kind = args.input;
    spec.mode = args.mode;
    spec.validate()?;
    Ok(entropy_histogram_experiment(&spec)?.histogram.to_csv())
}

fn converge(args: &ConvergeArgs) -> Outcome {
    if args.window == 0 || args.epsilon.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Failure::Usage("epsilon and window must be positive".into()));
    }
    let specs: Vec<ConvergenceSpec> = args
        .n
        .iter()
        .map(|&n| ConvergenceSpec {
            n,
            n_a: args.na,
            phi: args.phi,
            trials: args.trials,
            max_depth: args.max_depth,
            input: args.input,
            seed: args.seed,
        })
        .collect();
    for spec in &specs {
        spec.validate()?;
    }
    let mut results = Vec::new();
    for spec in &specs {
        let curve = convergence_curve(spec)?;
        results.extend(args.epsilon.iter().map(|&e| curve.result(e, args.window)));
    }
    Ok(results.to_csv())
}

fn phiscan(args: &PhiscanArgs) -> Outcome {
    let base = ConvergenceSpec {
        n: args.n,
        n_a: args.na,
        phi: args.phi[0],
        trials: args.trials,
        max_depth: args.length,
        input: args.input,
        seed: args.seed,
    };
    base.validate()?;
    Ok(phi_scan(&base, &args.phi, args.length)?.to_csv())
}

fn page(args: &PageArgs) -> Outcome {
    Ok(format!("{}\n", format_sig12(page_average(args.na, args.nb)?)))
}

fn stabpmf(args: &StabpmfArgs) -> Outcome {
    Ok(pmf_csv(&stabilizer_entropy_pmf(args.n, args.na)?))
}

fn oracle_check(args: &OracleArgs) -> Outcome {
    if let Some(&n) = args.n.iter().find(|&&n| n == 0 || n > wgs_core::scheme::ORACLE_MAX_ROWS) {
        return Err(Failure::Usage(format!(
            "oracle rows must be in 1..={}, got {n}",
            wgs_core::scheme::ORACLE_MAX_ROWS
        )));
    }
    let mut out = String::from("n,trials,passed,failed,min_overlap,max_probability_error\n");
    let mut failed_total = 0;
    for &n in &args.n {
        let mut inputs = input_stream(args.seed, n as u64);
        let mut draws = input_stream(args.seed, 1000 + n as u64);
        let (mut passed, mut failed) = (0, 0);
        let mut min_overlap = f64::INFINITY;
        let mut max_prob_err: f64 = 0.0;
        for _ in 0..args.trials {
            let psi = haar_sample(n, &mut inputs)?;
            let run = mbqc_column_oracle(&psi, args.phi, &mut draws)?;
            let mut fast = psi;
            column_step(&mut fast, &run.outcome, args.phi)?;
            let overlap = run.state.overlap(&fast)?;
            let prob_err = run
                .plus_probabilities
                .iter()
                .map(|p| (p - 0.5).abs())
                .fold(0.0, f64::max);
            min_overlap = min_overlap.min(overlap);
            max_prob_err = max_prob_err.max(prob_err);
            if overlap >= 1.0 - 1e-10 && prob_err <= 1e-10 {
                passed += 1;
            } else {
                failed += 1;
            }
        }
        failed_total += failed;
        out.push_str(&format!(
            "{n},{},{passed},{failed},{},{}\n",
            args.trials,
            format_sig12(min_overlap),
            format_sig12(max_prob_err)
        ));
    }
    if failed_total > 0 {
        eprint!("{out}");
        return Err(Failure::Runtime(format!("{failed_total} oracle comparisons failed")));
    }
    Ok(out)
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Run(a) => &a.common,
        Command::Burnin(a) => &a.common,
        Command::Histogram(a) => &a.common,
        Command::Converge(a) => &a.common,
        Command::Phiscan(a) => &a.common,
        Command::Page(a) => &a.common,
        Command::Stabpmf(a) => &a.common,
        Command::OracleCheck(a) => &a.common,
    }
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Run(a) => run(a),
        Command::Burnin(a) => burnin(a),
        Command::Histogram(a) => histogram(a),
        Command::Converge(a) => converge(a),
        Command::Phiscan(a) => phiscan(a),
        Command::Page(a) => page(a),
        Command::Stabpmf(a) => stabpmf(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(text.as_bytes())?;
            file.flush()
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = common(&cli.command);

    let result = match opts.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure::Runtime(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(&cli.command),
    };

    match result {
        Ok(text) => match write_output(&text, opts.out.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                let target = opts
                    .out
                    .as_ref()
                    .map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
                eprintln!("error: cannot write {target}: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
