//! Monte Carlo studies of the random circuit.
//!
//! Every trajectory `id` draws its outcomes from
//! [`rng::outcome_stream`](crate::rng::outcome_stream)`(seed, id)` and its
//! input state from [`rng::input_stream`](crate::rng::input_stream)`(seed, id)`.
//! Multi-trajectory work is split into fixed batches of trajectory ids and
//! reduced in batch order, so results do not depend on the thread count.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::entanglement::{build_histogram, haar_sample, page_average, vn_entropy_bits, EntanglementHistogram};
use crate::error::{Error, Result};
use crate::rng::{input_stream, outcome_stream, StreamRng};
use crate::scheme::{column_step, validate_phi, OutcomeVector, SchemeConfig};
use crate::statevec::StateVector;

/// Trajectories per parallel work item.
const BATCH: u64 = 64;

/// `5 pi / 8`, the default vertical gate angle.
pub const DEFAULT_PHI: f64 = 5.0 * PI / 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    HaarRandom,
    AllZeros,
    AllPlus,
}

impl InputKind {
    pub fn prepare(self, n: usize, seed: u64, trajectory: u64) -> Result<StateVector> {
        match self {
            InputKind::HaarRandom => haar_sample(n, &mut input_stream(seed, trajectory)),
            InputKind::AllZeros => StateVector::zeros(n),
            InputKind::AllPlus => StateVector::plus(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InputKind::HaarRandom => "haar",
            InputKind::AllZeros => "zeros",
            InputKind::AllPlus => "plus",
        }
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" | "haar-random" => Ok(InputKind::HaarRandom),
            "zeros" | "all-zeros" => Ok(InputKind::AllZeros),
            "plus" | "all-plus" => Ok(InputKind::AllPlus),
            other => Err(Error::InvalidParameter(format!("unknown input kind '{other}'"))),
        }
    }
}

/// How histogram samples are collected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    /// One trajectory; one sample per step after burn-in.
    Trajectory,
    /// Many trajectories; one sample at the end of each.
    Independent,
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(SamplingMode::Trajectory),
            "independent" => Ok(SamplingMode::Independent),
            other => Err(Error::InvalidParameter(format!("unknown sampling mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub scheme: SchemeConfig,
    pub burnin_steps: usize,
    pub sample_steps: usize,
    pub trajectories: usize,
    pub bins: usize,
    pub epsilon: f64,
    pub window: usize,
    pub input_kind: InputKind,
    pub mode: SamplingMode,
}

impl ExperimentSpec {
    /// Desk-scale defaults around a scheme configuration.
    pub fn new(scheme: SchemeConfig) -> Self {
        Self {
            scheme,
            burnin_steps: 10_000,
            sample_steps: 10_000,
            trajectories: 10_000,
            bins: 500,
            epsilon: 0.01,
            window: 10,
            input_kind: InputKind::HaarRandom,
            mode: SamplingMode::Trajectory,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if self.sample_steps == 0 || self.trajectories == 0 || self.bins == 0 || self.window == 0 {
            return Err(Error::InvalidParameter(
                "samples, trajectories, bins and window must all be positive".into(),
            ));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// A single run of the circuit from a prepared input.
struct Trajectory {
    state: StateVector,
    outcomes: StreamRng,
    phi: f64,
    partition_size: usize,
}

impl Trajectory {
    fn start(
        rows: usize,
        phi: f64,
        partition_size: usize,
        input: InputKind,
        seed: u64,
        id: u64,
    ) -> Result<Self> {
        Ok(Self {
            state: input.prepare(rows, seed, id)?,
            outcomes: outcome_stream(seed, id),
            phi,
            partition_size,
        })
    }

    fn from_spec(spec: &ExperimentSpec, id: u64) -> Result<Self> {
        let s = &spec.scheme;
        Self::start(s.rows, s.phi, s.partition_size, spec.input_kind, s.seed, id)
    }

    fn step(&mut self) -> Result<()> {
        let outcome = OutcomeVector::sample(self.state.num_qubits(), &mut self.outcomes);
        column_step(&mut self.state, &outcome, self.phi)
    }

    fn advance(&mut self, steps: usize) -> Result<()> {
        (0..steps).try_for_each(|_| self.step())
    }

    fn entropy(&self) -> Result<f64> {
        vn_entropy_bits(&self.state, self.partition_size)
    }
}

/// Runs `trajectories` trajectories in parallel batches; `per_batch` folds
/// the trajectories of one batch (ids in increasing order) and the batch
/// results come back in batch order.
fn batched<T, F>(trajectories: usize, per_batch: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> Result<T> + Sync,
{
    let total = trajectories as u64;
    let batches = total.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| per_batch(b * BATCH..((b + 1) * BATCH).min(total)))
        .collect()
}

/// Entropy after each of `length` steps of one trajectory, starting with
/// the input itself at step 0.
pub fn entropy_series(config: &SchemeConfig, input: InputKind) -> Result<Vec<(usize, f64)>> {
    config.validate()?;
    let mut traj = Trajectory::start(config.rows, config.phi, config.partition_size, input, config.seed, 0)?;
    let mut series = Vec::with_capacity(config.length + 1);
    series.push((0, traj.entropy()?));
    for step in 1..=config.length {
        traj.step()?;
        series.push((step, traj.entropy()?));
    }
    Ok(series)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BurninResult {
    pub mean: f64,
    /// Naive standard error `sd / sqrt(samples)`; successive samples are
    /// correlated, so treat it as a lower bound.
    pub std_error: f64,
    /// `(step, entropy)` for every recorded step, numbered from the start of
    /// the trajectory.
    pub series: Vec<(usize, f64)>,
}

/// One trajectory: `burnin_steps` unrecorded steps, then the entropy after
/// each of `sample_steps` further steps.
pub fn burnin_mean_entropy(spec: &ExperimentSpec) -> Result<BurninResult> {
    spec.validate()?;
    let mut traj = Trajectory::from_spec(spec, 0)?;
    traj.advance(spec.burnin_steps)?;
    let mut series = Vec::with_capacity(spec.sample_steps);
    for i in 1..=spec.sample_steps {
        traj.step()?;
        series.push((spec.burnin_steps + i, traj.entropy()?));
    }
    let (mean, std_error) = mean_and_se(series.iter().map(|&(_, s)| s));
    Ok(BurninResult {
        mean,
        std_error,
        series,
    })
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / count;
    if count < 2.0 {
        return (mean, f64::NAN);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramRun {
    pub samples: Vec<f64>,
    pub histogram: EntanglementHistogram,
}

/// Entropy samples binned over `[0, N_A]`.
///
/// In [`SamplingMode::Trajectory`] one trajectory is burned in and then
/// sampled after every step (`sample_steps` samples). In
/// [`SamplingMode::Independent`] each of `trajectories` trajectories runs
/// `burnin_steps` steps and contributes its final entropy.
pub fn entropy_histogram_experiment(spec: &ExperimentSpec) -> Result<HistogramRun> {
    spec.validate()?;
    let samples = match spec.mode {
        SamplingMode::Trajectory => burnin_mean_entropy(spec)?
            .series
            .into_iter()
            .map(|(_, s)| s)
            .collect(),
        SamplingMode::Independent => batched(spec.trajectories, |ids| {
            ids.map(|id| {
                let mut traj = Trajectory::from_spec(spec, id)?;
                traj.advance(spec.burnin_steps)?;
                traj.entropy()
            })
            .collect::<Result<Vec<f64>>>()
        })?
        .into_iter()
        .flatten()
        .collect::<Vec<f64>>(),
    };
    let histogram = build_histogram(&samples, spec.bins, 0.0, spec.scheme.partition_size as f64)?;
    Ok(HistogramRun { samples, histogram })
}

/// Parameters for trial-averaged entropy as a function of depth.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    pub n: usize,
    pub n_a: usize,
    pub phi: f64,
    pub trials: usize,
    pub max_depth: usize,
    pub input: InputKind,
    pub seed: u64,
}

impl ConvergenceSpec {
    pub fn new(n: usize, n_a: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            n_a,
            phi: DEFAULT_PHI,
            trials,
            max_depth: 200,
            input: InputKind::AllZeros,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        SchemeConfig::new(self.n, self.max_depth, self.phi, self.n_a, self.seed).validate_for_page()?;
        if self.trials < 100 {
            return Err(Error::InvalidParameter(format!(
                "convergence estimates need at least 100 trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Trial-averaged entropy at every depth `0..=max_depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceCurve {
    pub spec: ConvergenceSpec,
    pub page: f64,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
}

impl ConvergenceCurve {
    /// Smallest depth `t` with `|mean_{t'} - page| < epsilon` for every
    /// `t'` in `t..t + window`, all within the computed depths.
    pub fn t_epsilon(&self, epsilon: f64, window: usize) -> Option<usize> {
        let window = window.max(1);
        let mut run = 0;
        for (t, mean) in self.means.iter().enumerate() {
            if (mean - self.page).abs() < epsilon {
                run += 1;
                if run == window {
                    return Some(t + 1 - window);
                }
            } else {
                run = 0;
            }
        }
        None
    }

    pub fn result(&self, epsilon: f64, window: usize) -> ConvergenceResult {
        ConvergenceResult {
            n: self.spec.n,
            n_a: self.spec.n_a,
            phi: self.spec.phi,
            epsilon,
            window,
            trials: self.spec.trials,
            t_epsilon: self.t_epsilon(epsilon, window),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceResult {
    pub n: usize,
    pub n_a: usize,
    pub phi: f64,
    pub epsilon: f64,
    pub window: usize,
    pub trials: usize,
    /// `None` when the criterion is not met within the computed depths.
    pub t_epsilon: Option<usize>,
}

pub fn convergence_curve(spec: &ConvergenceSpec) -> Result<ConvergenceCurve> {
    spec.validate()?;
    let depths = spec.max_depth + 1;
    // Per batch: (sum, sum of squares) at each depth.
    let partials = batched(spec.trials, |ids| {
        let mut sums = vec![0.0; depths];
        let mut squares = vec![0.0; depths];
        for id in ids {
            let mut traj = Trajectory::start(spec.n, spec.phi, spec.n_a, spec.input, spec.seed, id)?;
            for t in 0..depths {
                if t > 0 {
                    traj.step()?;
                }
                let s = traj.entropy()?;
                sums[t] += s;
                squares[t] += s * s;
            }
        }
        Ok((sums, squares))
    })?;
    let mut sums = vec![0.0; depths];
    let mut squares = vec![0.0; depths];
    for (s, q) in partials {
        for t in 0..depths {
            sums[t] += s[t];
            squares[t] += q[t];
        }
    }
    let count = spec.trials as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / count).collect();
    let std_errors = squares
        .iter()
        .zip(&means)
        .map(|(q, m)| ((q / count - m * m).max(0.0) * count / (count - 1.0) / count).sqrt())
        .collect();
    Ok(ConvergenceCurve {
        spec: spec.clone(),
        page: page_average(spec.n_a, spec.n - spec.n_a)?,
        means,
        std_errors,
    })
}

pub fn convergence_time(spec: &ConvergenceSpec, epsilon: f64, window: usize) -> Result<ConvergenceResult> {
    if epsilon.is_nan() || epsilon <= 0.0 || window == 0 {
        return Err(Error::InvalidParameter(
            "epsilon and window must be positive".into(),
        ));
    }
    Ok(convergence_curve(spec)?.result(epsilon, window))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiScanRow {
    pub phi: f64,
    pub depth: usize,
    pub trials: usize,
    pub mean_entropy: f64,
    pub abs_deviation: f64,
}

/// Mean entropy at a fixed `depth` for each angle, and its distance from
/// the Page value. All angles share the same trajectory streams.
pub fn phi_scan(
    base: &ConvergenceSpec,
    phis: &[f64],
    depth: usize,
) -> Result<Vec<PhiScanRow>> {
    if phis.is_empty() {
        return Err(Error::InvalidParameter("phi scan needs at least one angle".into()));
    }
    phis.iter().try_for_each(|&phi| validate_phi(phi))?;
    phis.iter()
        .map(|&phi| {
            let spec = ConvergenceSpec {
                phi,
                max_depth: depth,
                ..base.clone()
            };
            spec.validate()?;
            let page = page_average(spec.n_a, spec.n - spec.n_a)?;
            let partials = batched(spec.trials, |ids| {
                ids.map(|id| {
                    let mut traj = Trajectory::start(spec.n, phi, spec.n_a, spec.input, spec.seed, id)?;
                    traj.advance(depth)?;
                    traj.entropy()
                })
                .sum::<Result<f64>>()
            })?;
            let mean_entropy = partials.iter().sum::<f64>() / spec.trials as f64;
            Ok(PhiScanRow {
                phi,
                depth,
                trials: spec.trials,
                mean_entropy,
                abs_deviation: (mean_entropy - page).abs(),
            })
        })
        .collect()
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed.
pub fn format_sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Types with a fixed CSV rendering.
pub trait ToCsv {
    fn to_csv(&self) -> String;
}

impl ToCsv for [ConvergenceResult] {
    fn to_csv(&self) -> String {
        let mut out = String::from("n,n_a,phi,epsilon,window,trials,t_epsilon\n");
        for r in self {
            let t = r.t_epsilon.map_or(-1, |t| t as i64);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n,
                r.n_a,
                format_sig12(r.phi),
                format_sig12(r.epsilon),
                r.window,
                r.trials,
                t
            );
        }
        out
    }
}

impl ToCsv for EntanglementHistogram {
    fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,density\n");
        for (lo, hi, d) in self.rows() {
            let _ = writeln!(out, "{},{},{}", format_sig12(lo), format_sig12(hi), format_sig12(d));
        }
        out
    }
}

/// `step,entropy_bits` series.
impl ToCsv for [(usize, f64)] {
    fn to_csv(&self) -> String {
        let mut out = String::from("step,entropy_bits\n");
        for (step, s) in self {
            let _ = writeln!(out, "{step},{}", format_sig12(*s));
        }
        out
    }
}

impl ToCsv for BurninResult {
    fn to_csv(&self) -> String {
        self.series.to_csv()
    }
}

impl ToCsv for [PhiScanRow] {
    fn to_csv(&self) -> String {
        let mut out = String::from("phi,depth,trials,mean_entropy,abs_deviation_from_page\n");
        for r in self {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_sig12(r.phi),
                r.depth,
                r.trials,
                format_sig12(r.mean_entropy),
                format_sig12(r.abs_deviation)
            );
        }
        out
    }
}

/// Stabilizer entropy distribution as `s_a,probability`.
pub fn pmf_csv(pmf: &[f64]) -> String {
    let mut out = String::from("s_a,probability\n");
    for (s, p) in pmf.iter().enumerate() {
        let _ = writeln!(out, "{s},{}", format_sig12(*p));
    }
    out
}

/// Writes the CSV rendering of `result` to `sink` and flushes it. `path`
/// only labels errors.
pub fn emit_csv<T: ToCsv + ?Sized, W: Write>(result: &T, sink: &mut W, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    sink.write_all(result.to_csv().as_bytes()).map_err(io)?;
    sink.flush().map_err(io)
}
