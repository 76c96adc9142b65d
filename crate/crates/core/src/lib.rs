//! Random quantum circuits generated by measuring weighted graph states in a
//! single fixed basis.
//!
//! An `N`-qubit input is coupled by CZ gates to a column of resource qubits
//! that are themselves chained by controlled-phase gates of angle `phi`.
//! Measuring the input column in the X basis teleports the state onto the
//! resource column, transformed by `G(phi) * (H Z^s)^{⊗N}` where `s` is the
//! (uniformly random) outcome vector. Repeating column by column yields a
//! random circuit whose output distribution approaches the Haar measure.
//!
//! The crate is organised as:
//!
//! - [`statevec`]: dense state vectors, gate kernels, X-basis measurement and
//!   reduced-density-matrix spectra.
//! - [`scheme`]: the column-step engine, the literal measurement-based oracle,
//!   and the generalised resource-state step.
//! - [`entanglement`]: entropies, the Page average, the random-stabilizer
//!   entropy distribution, Haar sampling, histograms and distances.
//! - [`experiments`]: burn-in averages, histograms, convergence times and
//!   phase scans, with CSV output.
//! - [`rng`]: reproducible per-trajectory random streams.

pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod rng;
pub mod scheme;
pub mod statevec;

pub use entanglement::{
    build_histogram, distribution_distance, haar_sample, haar_unitary, page_average,
    stabilizer_entropy_pmf, vn_entropy_bits, DistributionDistance, EntanglementHistogram,
    EntanglementSample,
};
pub use error::{Error, Result};
pub use experiments::{
    burnin_mean_entropy, convergence_curve, convergence_time, emit_csv, entropy_histogram_experiment,
    entropy_series, phi_scan, BurninResult, ConvergenceCurve, ConvergenceResult, ConvergenceSpec,
    ExperimentSpec, HistogramRun, InputKind, PhiScanRow, SamplingMode, ToCsv, DEFAULT_PHI,
};
pub use scheme::{
    column_step, mbqc_column_oracle, run_circuit, GeneralizedStep, OracleRun, OutcomeVector,
    SchemeConfig,
};
pub use statevec::{Matrix2, StateVector, C64};
