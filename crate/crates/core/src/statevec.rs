//! Dense state vectors over `N` qubits.
//!
//! Basis index bit `j` holds qubit `j` (qubit 0 is the least significant
//! bit). All operations act in place on an exclusively owned vector.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A 2×2 complex matrix in row-major order.
pub type Matrix2 = [[C64; 2]; 2];

/// Largest supported register. Experiments use far fewer qubits.
pub const MAX_QUBITS: usize = 24;

const UNITARY_TOL: f64 = 1e-8;
const CLAMP_TOL: f64 = 1e-12;
const COLLAPSE_FLOOR: f64 = 1e-15;

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub mod gates {
    //! Fixed single-qubit gates.
    use super::{c, Matrix2, FRAC_1_SQRT_2};

    pub const IDENTITY: Matrix2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    pub const HADAMARD: Matrix2 = [
        [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
    ];
    pub const PAULI_X: Matrix2 = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
    pub const PAULI_Z: Matrix2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
    /// `H * Z`, the branch operator for a `-1` outcome.
    pub const HADAMARD_Z: Matrix2 = [
        [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
        [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
    ];
}

/// Product of two 2×2 matrices.
pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[C64::default(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Conjugate transpose of a 2×2 matrix.
pub fn adjoint2(a: &Matrix2) -> Matrix2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Largest entrywise deviation of `G^dag G` from the identity.
pub fn unitarity_deviation(gate: &Matrix2) -> f64 {
    let prod = matmul2(&adjoint2(gate), gate);
    let mut worst: f64 = 0.0;
    for (i, row) in prod.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((entry - target).norm());
        }
    }
    worst
}

/// Result of an X-basis measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XMeasurement {
    /// `0` for the `+1` eigenvalue (`|+>`), `1` for `-1` (`|->`).
    pub bit: u8,
    /// Born probability of the `|+>` outcome before collapse.
    pub prob_plus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    fn check_size(num_qubits: usize) -> Result<()> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "number of qubits must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        Ok(())
    }

    /// The computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        Self::check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = c(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// `|0...0>`.
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// `|+...+>`.
    pub fn plus(num_qubits: usize) -> Result<Self> {
        Self::check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amp = c((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            num_qubits,
            amps: vec![amp; dim],
        })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    ///
    /// The length must be a power of two and the vector must be nonzero.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        Self::check_size(num_qubits)?;
        let mut state = Self { num_qubits, amps };
        let norm = state.norm();
        if !norm.is_finite() || norm < COLLAPSE_FLOOR {
            return Err(Error::InvalidParameter(
                "amplitude vector has zero or non-finite norm".into(),
            ));
        }
        state.scale(norm.recip());
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn renormalize(&mut self) {
        let norm = self.norm();
        self.scale(norm.recip());
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_dim(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`, the phase-insensitive overlap.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Applies a single-qubit unitary to `qubit`.
    pub fn apply_single_qubit(&mut self, qubit: usize, gate: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        let deviation = unitarity_deviation(gate);
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        self.apply_single_qubit_unchecked(qubit, gate);
        Ok(())
    }

    pub(crate) fn apply_single_qubit_unchecked(&mut self, qubit: usize, gate: &Matrix2) {
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = gate[0][0] * x0 + gate[0][1] * x1;
                *a1 = gate[1][0] * x0 + gate[1][1] * x1;
            }
        }
    }

    /// Applies `diag(1, 1, 1, e^{-i phi})` to qubits `a` and `b`.
    pub fn apply_controlled_phase(&mut self, a: usize, b: usize, phi: f64) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::SameQubit(a));
        }
        let mask = (1usize << a) | (1usize << b);
        let phase = C64::from_polar(1.0, -phi);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp *= phase;
            }
        }
        Ok(())
    }

    /// Projectively measures `qubit` in the `{|+>, |->}` basis.
    ///
    /// The outcome is `0` iff `draw < p_plus`. The state collapses to the
    /// renormalized projection, leaving the measured qubit in `|+>` or `|->`.
    pub fn measure_x_basis(&mut self, qubit: usize, draw: f64) -> Result<XMeasurement> {
        self.check_qubit(qubit)?;
        if !(0.0..1.0).contains(&draw) {
            return Err(Error::InvalidParameter(format!(
                "measurement draw {draw} is not in [0, 1)"
            )));
        }
        let stride = 1usize << qubit;
        let prob_plus: f64 = self
            .amps
            .chunks_exact(stride << 1)
            .flat_map(|block| block[..stride].iter().zip(&block[stride..]))
            .map(|(a0, a1)| 0.5 * (a0 + a1).norm_sqr())
            .sum::<f64>()
            .clamp(0.0, 1.0);
        let bit = u8::from(draw >= prob_plus);
        let prob = if bit == 0 { prob_plus } else { 1.0 - prob_plus };
        if prob < COLLAPSE_FLOOR {
            return Err(Error::Numerical(format!(
                "measurement branch with probability {prob:e} selected"
            )));
        }
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        let scale = 0.5 / prob.sqrt();
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let proj = (*a0 + *a1 * sign) * scale;
                *a0 = proj;
                *a1 = proj * sign;
            }
        }
        Ok(XMeasurement { bit, prob_plus })
    }

    /// Eigenvalues of the reduced density matrix on `subset`, nonincreasing.
    ///
    /// Values in `[-1e-12, 0)` are clamped to zero; anything more negative is
    /// reported as a numerical failure.
    pub fn reduced_spectrum(&self, subset: &[usize]) -> Result<Vec<f64>> {
        let n = self.num_qubits;
        if subset.is_empty() || subset.len() >= n {
            return Err(Error::InvalidSubset(format!(
                "subset of size {} must be nonempty and proper for {n} qubits",
                subset.len()
            )));
        }
        let mut in_subset = vec![false; n];
        for &q in subset {
            self.check_qubit(q)?;
            if std::mem::replace(&mut in_subset[q], true) {
                return Err(Error::InvalidSubset(format!("qubit {q} listed twice")));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&q| !in_subset[q]).collect();
        let dim_a = 1usize << subset.len();
        let dim_b = 1usize << rest.len();

        // Schmidt matrix: rows indexed by the subset bits, columns by the rest.
        let mut schmidt = DMatrix::<C64>::zeros(dim_a, dim_b);
        for (idx, amp) in self.amps.iter().enumerate() {
            schmidt[(gather_bits(idx, subset), gather_bits(idx, &rest))] = *amp;
        }
        let gram = if dim_a <= dim_b {
            &schmidt * schmidt.adjoint()
        } else {
            schmidt.adjoint() * &schmidt
        };
        let mut values: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
        for v in &mut values {
            if *v < -CLAMP_TOL || !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "reduced density matrix eigenvalue {v:e} is negative"
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        values.resize(dim_a, 0.0);
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }
}

/// Packs the bits of `idx` found at `positions` into a dense integer.
fn gather_bits(idx: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &q)| acc | (((idx >> q) & 1) << k))
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn state(amps: &[(f64, f64)]) -> StateVector {
        StateVector::from_amplitudes(amps.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    fn assert_amps(s: &StateVector, expected: &[C64], tol: f64) {
        assert_eq!(s.dim(), expected.len());
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < tol, "{a} vs {e}");
        }
    }

    fn bell() -> StateVector {
        state(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])
    }

    fn w_state() -> StateVector {
        let mut amps = vec![c(0.0, 0.0); 8];
        for idx in [1, 2, 4] {
            amps[idx] = c(1.0, 0.0);
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn hadamard_on_zero_gives_plus() {
        let mut s = StateVector::zeros(1).unwrap();
        s.apply_single_qubit(0, &HADAMARD).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(h, 0.0)], TOL);
    }

    #[test]
    fn z_on_plus_gives_minus() {
        let mut s = StateVector::plus(1).unwrap();
        s.apply_single_qubit(0, &PAULI_Z).unwrap();
        let h = FRAC_1_SQRT_2;
        assert_amps(&s, &[c(h, 0.0), c(-h, 0.0)], TOL);
    }

    #[test]
    fn x_on_second_qubit_flips_it() {
        // |10> with qubit 1 set is basis index 2.
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply_single_qubit(1, &PAULI_X).unwrap();
        assert_amps(&s, StateVector::zeros(2).unwrap().amplitudes(), TOL);
    }

    #[test]
    fn single_qubit_errors() {
        let mut s = StateVector::zeros(2).unwrap();
        assert!(matches!(
            s.apply_single_qubit(2, &HADAMARD),
            Err(Error::QubitOutOfRange { qubit: 2, num_qubits: 2 })
        ));
        let bad = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            s.apply_single_qubit(0, &bad),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn controlled_phase_examples() {
        let mut s = StateVector::basis(2, 3).unwrap();
        s.apply_controlled_phase(0, 1, PI).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)], TOL);

        let mut s = StateVector::basis(2, 3).unwrap();
        s.apply_controlled_phase(0, 1, 2.0 * PI).unwrap();
        assert_amps(&s, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], TOL);

        let phi = 0.7;
        let mut s = StateVector::plus(2).unwrap();
        s.apply_controlled_phase(1, 0, phi).unwrap();
        let mut expected = vec![c(0.5, 0.0); 4];
        expected[3] = C64::from_polar(0.5, -phi);
        assert_amps(&s, &expected, TOL);
    }

    #[test]
    fn controlled_phase_errors() {
        let mut s = StateVector::zeros(3).unwrap();
        assert!(matches!(
            s.apply_controlled_phase(1, 1, 1.0),
            Err(Error::SameQubit(1))
        ));
        assert!(matches!(
            s.apply_controlled_phase(0, 3, 1.0),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn measuring_plus_eigenstate() {
        let mut s = StateVector::plus(1).unwrap();
        let m = s.measure_x_basis(0, 0.3).unwrap();
        assert_eq!(m.bit, 0);
        assert!((m.prob_plus - 1.0).abs() < TOL);
        assert!(s.overlap(&StateVector::plus(1).unwrap()).unwrap() > 1.0 - TOL);
    }

    #[test]
    fn measuring_zero_is_fair() {
        for draw in [0.0, 0.25, 0.49, 0.5, 0.9] {
            let mut s = StateVector::zeros(1).unwrap();
            let m = s.measure_x_basis(0, draw).unwrap();
            assert!((m.prob_plus - 0.5).abs() < 1e-15);
            assert_eq!(m.bit, u8::from(draw >= 0.5));
            assert!((s.norm() - 1.0).abs() < TOL);
            let sign = if m.bit == 0 { 1.0 } else { -1.0 };
            let h = FRAC_1_SQRT_2;
            assert_amps(&s, &[c(h, 0.0), c(sign * h, 0.0)], TOL);
        }
    }

    #[test]
    fn cz_with_plus_gives_fair_outcomes() {
        // CZ (psi ⊗ |+>) for an arbitrary psi: both outcomes equally likely.
        let psi = [c(0.3, -0.2), c(-0.5, 0.77)];
        let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        let h = FRAC_1_SQRT_2 / norm;
        let amps = vec![psi[0] * h, psi[1] * h, psi[0] * h, psi[1] * h];
        let mut joint = StateVector::from_amplitudes(amps).unwrap();
        joint.apply_controlled_phase(0, 1, PI).unwrap();
        let m = joint.measure_x_basis(0, 0.999).unwrap();
        assert!((m.prob_plus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn measurement_rejects_bad_draw() {
        let mut s = StateVector::zeros(1).unwrap();
        assert!(s.measure_x_basis(0, 1.0).is_err());
        assert!(s.measure_x_basis(0, -0.1).is_err());
    }

    #[test]
    fn measurement_collapse_floor() {
        // |+> has p_minus = 0, but the draw rule can never pick it.
        let mut s = StateVector::plus(2).unwrap();
        let m = s.measure_x_basis(1, 0.999_999).unwrap();
        assert_eq!(m.bit, 0);
    }

    #[test]
    fn spectrum_examples() {
        let spec = bell().reduced_spectrum(&[0]).unwrap();
        assert!((spec[0] - 0.5).abs() < 1e-12 && (spec[1] - 0.5).abs() < 1e-12);

        let spec = StateVector::zeros(2).unwrap().reduced_spectrum(&[0]).unwrap();
        assert_eq!(spec.len(), 2);
        assert!((spec[0] - 1.0).abs() < 1e-12 && spec[1].abs() < 1e-12);

        let spec = w_state().reduced_spectrum(&[0]).unwrap();
        assert!((spec[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((spec[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_of_large_subset_is_padded() {
        let spec = w_state().reduced_spectrum(&[1, 2]).unwrap();
        assert_eq!(spec.len(), 4);
        assert!((spec[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((spec[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(spec[2].abs() < 1e-12 && spec[3].abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_bad_subsets() {
        let s = w_state();
        assert!(s.reduced_spectrum(&[]).is_err());
        assert!(s.reduced_spectrum(&[0, 1, 2]).is_err());
        assert!(s.reduced_spectrum(&[0, 0]).is_err());
        assert!(s.reduced_spectrum(&[5]).is_err());
    }

    #[test]
    fn from_amplitudes_validation() {
        assert!(StateVector::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![c(0.0, 0.0); 4]).is_err());
        assert!(StateVector::zeros(0).is_err());
    }

    // ---- reference kernels built from explicit Kronecker products ----

    type Dense = Vec<Vec<C64>>;

    fn kron(a: &Dense, b: &Dense) -> Dense {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn dense(m: &Matrix2) -> Dense {
        m.iter().map(|r| r.to_vec()).collect()
    }

    /// Full operator for `gate` on `qubit`. The Kronecker product is written
    /// most-significant qubit first, matching the little-endian index.
    fn lift(n: usize, qubit: usize, gate: &Matrix2) -> Dense {
        let mut out = vec![vec![c(1.0, 0.0)]];
        for q in (0..n).rev() {
            let factor = if q == qubit { dense(gate) } else { dense(&IDENTITY) };
            out = kron(&out, &factor);
        }
        out
    }

    fn cphase_dense(n: usize, a: usize, b: usize, phi: f64) -> Dense {
        // Sum of projector terms: I - |11><11| + e^{-i phi} |11><11| on (a, b).
        let p1: Matrix2 = [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let both = {
            let mut out = vec![vec![c(1.0, 0.0)]];
            for q in (0..n).rev() {
                let factor = if q == a || q == b { dense(&p1) } else { dense(&IDENTITY) };
                out = kron(&out, &factor);
            }
            out
        };
        let dim = 1 << n;
        let shift = C64::from_polar(1.0, -phi) - 1.0;
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let id = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                        id + shift * both[i][j]
                    })
                    .collect()
            })
            .collect()
    }

    fn matvec(m: &Dense, v: &[C64]) -> Vec<C64> {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn arb_state(max_qubits: usize) -> impl Strategy<Value = StateVector> {
        (1..=max_qubits).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
                .prop_filter_map("zero vector", |v| {
                    StateVector::from_amplitudes(v.into_iter().map(|(r, i)| c(r, i)).collect())
                        .ok()
                })
        })
    }

    fn arb_unitary() -> impl Strategy<Value = Matrix2> {
        // e^{i alpha} [[a, -conj(b)], [b, conj(a)]] with |a|^2 + |b|^2 = 1.
        (0.0..PI, 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(t, p1, p2, alpha)| {
            let a = C64::from_polar((t / 2.0).cos(), p1);
            let b = C64::from_polar((t / 2.0).sin(), p2);
            let g = C64::from_polar(1.0, alpha);
            [[g * a, -g * b.conj()], [g * b, g * a.conj()]]
        })
    }

    proptest! {
        #[test]
        fn single_qubit_matches_kronecker(s in arb_state(3), gate in arb_unitary(), q in 0usize..3) {
            let q = q % s.num_qubits();
            let expected = matvec(&lift(s.num_qubits(), q, &gate), s.amplitudes());
            let mut out = s.clone();
            out.apply_single_qubit(q, &gate).unwrap();
            for (a, e) in out.amplitudes().iter().zip(&expected) {
                prop_assert!((a - e).norm() < 1e-12);
            }
            prop_assert!((out.norm() - s.norm()).abs() < 1e-12);
        }

        #[test]
        fn controlled_phase_matches_kronecker(s in arb_state(3), phi in -7.0f64..7.0, a in 0usize..3, b in 0usize..3) {
            prop_assume!(s.num_qubits() >= 2);
            let n = s.num_qubits();
            let (a, b) = (a % n, b % n);
            prop_assume!(a != b);
            let expected = matvec(&cphase_dense(n, a, b, phi), s.amplitudes());
            let mut out = s.clone();
            out.apply_controlled_phase(a, b, phi).unwrap();
            for (x, e) in out.amplitudes().iter().zip(&expected) {
                prop_assert!((x - e).norm() < 1e-12);
            }
            // symmetric in (a, b), and undone by -phi
            let mut swapped = s.clone();
            swapped.apply_controlled_phase(b, a, phi).unwrap();
            prop_assert_eq!(&swapped, &out);
            out.apply_controlled_phase(a, b, -phi).unwrap();
            for (x, e) in out.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((x - e).norm() < 1e-12);
            }
        }

        #[test]
        fn measurement_restores_norm(s in arb_state(4), q in 0usize..4, draw in 0.0f64..1.0) {
            let q = q % s.num_qubits();
            let mut out = s.clone();
            let m = out.measure_x_basis(q, draw).unwrap();
            prop_assert!((0.0..=1.0).contains(&m.prob_plus));
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
            // The measured qubit is now an X eigenstate: measuring again is certain.
            let again = out.clone().measure_x_basis(q, draw).unwrap();
            let expected = if m.bit == 0 { 1.0 } else { 0.0 };
            prop_assert!((again.prob_plus - expected).abs() < 1e-10);
        }

        #[test]
        fn schmidt_symmetry(s in arb_state(5), mask in 1usize..31) {
            let n = s.num_qubits();
            prop_assume!(n >= 2);
            let mask = mask % ((1 << n) - 1);
            prop_assume!(mask != 0);
            let a: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
            let b: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 0).collect();
            let mut sa = s.reduced_spectrum(&a).unwrap();
            let mut sb = s.reduced_spectrum(&b).unwrap();
            let len = sa.len().max(sb.len());
            sa.resize(len, 0.0);
            sb.resize(len, 0.0);
            prop_assert!((sa.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(sa.windows(2).all(|w| w[0] >= w[1]));
            for (x, y) in sa.iter().zip(&sb) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
