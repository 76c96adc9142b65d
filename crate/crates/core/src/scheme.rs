//! The measurement-driven random circuit.
//!
//! The resource is an `N × l` grid: CZ gates between horizontal neighbours
//! and `phi`-gates between vertically adjacent rows (an open chain, no
//! wraparound). Measuring one column of `N` qubits in the X basis applies
//!
//! ```text
//! G(phi) · (H Z^{s_1} ⊗ ... ⊗ H Z^{s_N})
//! ```
//!
//! to the carried state, with every outcome vector `s` equally likely. The
//! fast path samples `s` uniformly and applies this operator directly;
//! [`mbqc_column_oracle`] simulates the joint `2N`-qubit system and measures
//! it literally, and is the reference the fast path is tested against.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::entanglement::haar_unitary;
use crate::error::{Error, Result};
use crate::statevec::{gates, Matrix2, StateVector, C64};

/// Lattice and experiment parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    /// Number of rows `N`, i.e. qubits carried by the circuit.
    pub rows: usize,
    /// Number of column steps applied.
    pub length: usize,
    /// Vertical gate angle in radians.
    pub phi: f64,
    /// Size `N_A` of the bipartition `A = {0, ..., N_A - 1}`.
    pub partition_size: usize,
    pub seed: u64,
}

impl SchemeConfig {
    pub fn new(rows: usize, length: usize, phi: f64, partition_size: usize, seed: u64) -> Self {
        Self {
            rows,
            length,
            phi,
            partition_size,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.rows > crate::statevec::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "rows must be in 2..={}, got {}",
                crate::statevec::MAX_QUBITS,
                self.rows
            )));
        }
        if self.partition_size == 0 || self.partition_size >= self.rows {
            return Err(Error::InvalidParameter(format!(
                "partition size must satisfy 1 <= N_A <= N - 1, got N_A = {} with N = {}",
                self.partition_size, self.rows
            )));
        }
        validate_phi(self.phi)
    }

    /// Validation for comparisons against the Page average, which also needs
    /// `N_A <= N - N_A`.
    pub fn validate_for_page(&self) -> Result<()> {
        self.validate()?;
        if 2 * self.partition_size > self.rows {
            return Err(Error::InvalidParameter(format!(
                "Page comparisons need N_A <= N - N_A, got N_A = {} with N = {}",
                self.partition_size, self.rows
            )));
        }
        Ok(())
    }

    /// Qubits of subsystem `A`.
    pub fn partition(&self) -> Vec<usize> {
        (0..self.partition_size).collect()
    }
}

pub fn validate_phi(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= 2.0 * PI) {
        return Err(Error::InvalidParameter(format!(
            "phi must lie in (0, 2pi], got {phi}"
        )));
    }
    Ok(())
}

/// Two-qubit resource gates consumed per column step: `N` horizontal CZ
/// gates plus `N - 1` vertical `phi`-gates.
pub fn resource_gates_per_step(rows: usize) -> usize {
    2 * rows - 1
}

/// Total two-qubit resource gates for a circuit of `length` steps.
pub fn resource_gate_count(rows: usize, length: usize) -> usize {
    resource_gates_per_step(rows) * length
}

/// Measurement outcomes of one column; bit `j` belongs to row `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeVector {
    bits: Vec<u8>,
}

impl OutcomeVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("empty outcome vector".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("outcome bit {b} is not 0 or 1")));
        }
        Ok(Self { bits })
    }

    pub fn zeros(rows: usize) -> Self {
        Self {
            bits: vec![0; rows],
        }
    }

    /// Outcome vector whose bit `j` is bit `j` of `mask`.
    pub fn from_mask(rows: usize, mask: u64) -> Self {
        Self {
            bits: (0..rows).map(|j| ((mask >> j) & 1) as u8).collect(),
        }
    }

    /// Draws `rows` independent fair bits from one `u64` of the stream.
    pub fn sample<R: RngCore + ?Sized>(rows: usize, rng: &mut R) -> Self {
        assert!(rows <= 64, "outcome sampling supports at most 64 rows");
        Self::from_mask(rows, rng.next_u64())
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn mask(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (u64::from(b) << j))
    }
}

/// Draws one outcome vector for `config`.
pub fn sample_outcome<R: RngCore + ?Sized>(config: &SchemeConfig, rng: &mut R) -> OutcomeVector {
    OutcomeVector::sample(config.rows, rng)
}

fn check_rows(state: &StateVector, rows: usize) -> Result<()> {
    if state.num_qubits() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: state.num_qubits(),
        });
    }
    Ok(())
}

/// Applies `H Z^{s_j}` to every row `j`.
pub fn apply_m_operator(state: &mut StateVector, outcome: &OutcomeVector) -> Result<()> {
    check_rows(state, outcome.len())?;
    for (row, &bit) in outcome.bits().iter().enumerate() {
        let gate = if bit == 0 {
            &gates::HADAMARD
        } else {
            &gates::HADAMARD_Z
        };
        state.apply_single_qubit_unchecked(row, gate);
    }
    Ok(())
}

/// Applies the `phi`-gate to every adjacent row pair `(j, j + 1)`.
///
/// All factors are diagonal, so the product multiplies basis state `x` by
/// `e^{-i phi c(x)}` where `c(x)` counts adjacent pairs of set bits.
pub fn apply_g_operator(state: &mut StateVector, phi: f64) -> Result<()> {
    let n = state.num_qubits();
    if n < 2 {
        return Ok(());
    }
    let phases: Vec<C64> = (0..n)
        .map(|edges| C64::from_polar(1.0, -phi * edges as f64))
        .collect();
    for (idx, amp) in state.amplitudes_mut().iter_mut().enumerate() {
        let edges = (idx & (idx >> 1)).count_ones() as usize;
        if edges != 0 {
            *amp *= phases[edges];
        }
    }
    Ok(())
}

/// One column of the circuit: `G(phi) · M(outcome)`.
pub fn column_step(state: &mut StateVector, outcome: &OutcomeVector, phi: f64) -> Result<()> {
    apply_m_operator(state, outcome)?;
    apply_g_operator(state, phi)
}

/// Applies `config.length` column steps with freshly sampled outcomes and
/// returns the outcome log.
pub fn run_circuit<R: RngCore + ?Sized>(
    state: &mut StateVector,
    config: &SchemeConfig,
    rng: &mut R,
) -> Result<Vec<OutcomeVector>> {
    check_rows(state, config.rows)?;
    let mut log = Vec::with_capacity(config.length);
    for _ in 0..config.length {
        let outcome = sample_outcome(config, rng);
        column_step(state, &outcome, config.phi)?;
        log.push(outcome);
    }
    Ok(log)
}

/// Dense `2^N × 2^N` matrix of the column operator for a fixed outcome.
pub fn column_unitary(outcome: &OutcomeVector, phi: f64) -> Result<DMatrix<C64>> {
    let rows = outcome.len();
    let dim = 1usize << rows;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut basis = StateVector::basis(rows, col)?;
        column_step(&mut basis, outcome, phi)?;
        for (row, amp) in basis.amplitudes().iter().enumerate() {
            out[(row, col)] = *amp;
        }
    }
    Ok(out)
}

/// Eigenphases in `(-pi, pi]` of the column operator, sorted ascending.
pub fn column_eigenphases(outcome: &OutcomeVector, phi: f64) -> Result<Vec<f64>> {
    let unitary = column_unitary(outcome, phi)?;
    let (_, triangular) = nalgebra::Schur::new(unitary).unpack();
    let mut phases: Vec<f64> = triangular.diagonal().iter().map(|z| z.arg()).collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Result of the literal measurement-based simulation of one column.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub outcome: OutcomeVector,
    /// State left on the resource column after the input column is measured.
    pub state: StateVector,
    /// Born probability of the `+1` outcome for each measured input qubit,
    /// conditioned on the earlier outcomes.
    pub plus_probabilities: Vec<f64>,
}

/// Largest row count the literal oracle accepts (`2N <= 16` qubits).
pub const ORACLE_MAX_ROWS: usize = 8;

/// Simulates one column of the scheme on the joint `2N`-qubit system.
///
/// Input qubits occupy indices `0..N` and the resource column `N..2N`. The
/// resource column starts in `|+>^N`, is chained by `phi`-gates, coupled to
/// the input by CZ gates row by row, and the input qubits are then measured
/// in the X basis using uniform draws from `rng`.
pub fn mbqc_column_oracle<R: Rng + ?Sized>(
    input: &StateVector,
    phi: f64,
    rng: &mut R,
) -> Result<OracleRun> {
    let n = input.num_qubits();
    if n > ORACLE_MAX_ROWS {
        return Err(Error::InvalidParameter(format!(
            "oracle supports at most {ORACLE_MAX_ROWS} rows, got {n}"
        )));
    }
    let in_dim = 1usize << n;
    let resource_amp = (in_dim as f64).sqrt().recip();
    let mut joint_amps = vec![C64::default(); in_dim * in_dim];
    for chunk in joint_amps.chunks_exact_mut(in_dim) {
        for (dst, src) in chunk.iter_mut().zip(input.amplitudes()) {
            *dst = src * resource_amp;
        }
    }
    let mut joint = StateVector::from_amplitudes(joint_amps)?;

    for row in 0..n.saturating_sub(1) {
        joint.apply_controlled_phase(n + row, n + row + 1, phi)?;
    }
    for row in 0..n {
        joint.apply_controlled_phase(row, n + row, PI)?;
    }

    let mut bits = Vec::with_capacity(n);
    let mut plus_probabilities = Vec::with_capacity(n);
    for row in 0..n {
        let m = joint.measure_x_basis(row, rng.random::<f64>())?;
        bits.push(m.bit);
        plus_probabilities.push(m.prob_plus);
    }

    // Every input qubit is now |+> or |->; contract them away.
    let joint_amps = joint.amplitudes();
    let column: Vec<C64> = (0..in_dim)
        .map(|resource| {
            (0..in_dim)
                .map(|x| {
                    let parity = (0..n).filter(|&j| bits[j] == 1 && (x >> j) & 1 == 1).count();
                    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                    joint_amps[x + resource * in_dim] * sign
                })
                .sum::<C64>()
                * resource_amp
        })
        .collect();

    Ok(OracleRun {
        outcome: OutcomeVector::new(bits)?,
        state: StateVector::from_amplitudes(column)?,
        plus_probabilities,
    })
}

/// A column built from resource qubits `gamma|0> + delta|1>`, an arbitrary
/// two-qubit coupling `U` between neighbouring columns, and measurement in
/// the basis `(|0> ± e^{i theta}|1>)/sqrt(2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedStep {
    gamma: C64,
    delta: C64,
    theta: f64,
    unitary: Matrix4<C64>,
}

const STEP_NORM_TOL: f64 = 1e-12;
const STEP_UNITARY_TOL: f64 = 1e-10;

impl GeneralizedStep {
    pub fn new(gamma: C64, delta: C64, theta: f64, unitary: Matrix4<C64>) -> Result<Self> {
        let norm = gamma.norm_sqr() + delta.norm_sqr();
        if (norm - 1.0).abs() > STEP_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|gamma|^2 + |delta|^2 = {norm}, expected 1"
            )));
        }
        let deviation = (unitary.adjoint() * unitary - Matrix4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > STEP_UNITARY_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self {
            gamma,
            delta,
            theta,
            unitary,
        })
    }

    /// Resource qubits in `|+>`, CZ coupling and X-basis measurement: the
    /// standard column.
    pub fn cz_column() -> Self {
        Self::diagonal_coupling(PI)
    }

    /// `|+>` resource qubits coupled by `diag(1, 1, 1, e^{-i phi})`.
    pub fn diagonal_coupling(phi: f64) -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let unitary = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, -phi),
        ));
        Self {
            gamma: h,
            delta: h,
            theta: 0.0,
            unitary,
        }
    }

    /// Random step: Haar resource qubit, uniform `theta`, Haar `U(4)` coupling.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut draw = || {
            C64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            )
        };
        let (g, d) = (draw(), draw());
        let norm = (g.norm_sqr() + d.norm_sqr()).sqrt();
        let theta = rng.random_range(0.0..2.0 * PI);
        let u = haar_unitary(4, rng);
        Self {
            gamma: g / norm,
            delta: d / norm,
            theta,
            unitary: Matrix4::from_fn(|i, j| u[(i, j)]),
        }
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn delta(&self) -> C64 {
        self.delta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn unitary(&self) -> &Matrix4<C64> {
        &self.unitary
    }

    /// Entry `u_ij` with 1-based indices.
    fn u(&self, i: usize, j: usize) -> C64 {
        self.unitary[(i - 1, j - 1)]
    }

    /// Branch operator for outcome `s`, unnormalized: the Kraus operator of
    /// the measurement is this matrix divided by `sqrt(2)`.
    pub fn branch_operator(&self, s: u8) -> Matrix2 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        let chi = C64::from_polar(sign, -self.theta);
        let entry = |top: usize, bottom: usize, col: usize| {
            self.gamma * (self.u(top, col) + chi * self.u(bottom, col))
                + self.delta * (self.u(top, col + 1) + chi * self.u(bottom, col + 1))
        };
        [
            [entry(1, 3, 1), entry(1, 3, 3)],
            [entry(2, 4, 1), entry(2, 4, 3)],
        ]
    }

    pub fn is_diagonal(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || self.unitary[(i, j)].norm() <= 1e-12))
    }

    /// How far the branch operators are from being proportional to
    /// unitaries.
    ///
    /// For diagonal couplings this is `| |gamma|^2 u11* u33 + |delta|^2 u22* u44 |`.
    /// Otherwise it is `max_s ||M(s)^dag M(s) - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        if self.is_diagonal() {
            let term = self.gamma.norm_sqr() * self.u(1, 1).conj() * self.u(3, 3)
                + self.delta.norm_sqr() * self.u(2, 2).conj() * self.u(4, 4);
            return term.norm();
        }
        (0..2u8)
            .map(|s| {
                let m = self.branch_operator(s);
                let gram = crate::statevec::matmul2(&crate::statevec::adjoint2(&m), &m);
                let mut frob = 0.0;
                for (i, row) in gram.iter().enumerate() {
                    for (j, z) in row.iter().enumerate() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        frob += (z - target).norm_sqr();
                    }
                }
                frob.sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `M(0)^dag M(0) + M(1)^dag M(1) - 2 I`.
    pub fn kraus_deviation(&self) -> f64 {
        let mut total = [[C64::default(); 2]; 2];
        for s in 0..2u8 {
            let m = self.branch_operator(s);
            let gram = crate::statevec::matmul2(&crate::statevec::adjoint2(&m), &m);
            for i in 0..2 {
                for j in 0..2 {
                    total[i][j] += gram[i][j];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for (i, row) in total.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let target = if i == j { 2.0 } else { 0.0 };
                worst = worst.max((z - target).norm());
            }
        }
        worst
    }
}
