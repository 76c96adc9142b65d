//! Entanglement entropy and the reference distributions it is compared to.
//!
//! Entropies are in bits. Subsystem `A` is always the leading block of
//! qubits `0..N_A`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::statevec::{StateVector, C64};

/// One recorded entropy value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntanglementSample {
    pub value: f64,
    pub step_index: usize,
    pub trajectory_id: u64,
}

/// Von Neumann entropy (bits) of qubits `0..partition_size`.
pub fn vn_entropy_bits(state: &StateVector, partition_size: usize) -> Result<f64> {
    let n = state.num_qubits();
    if partition_size == 0 || partition_size >= n {
        return Err(Error::InvalidParameter(format!(
            "partition size must satisfy 1 <= N_A <= N - 1, got {partition_size} with N = {n}"
        )));
    }
    let subset: Vec<usize> = (0..partition_size).collect();
    let spectrum = state.reduced_spectrum(&subset)?;
    Ok(entropy_bits(&spectrum))
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy_bits(probabilities: &[f64]) -> f64 {
    let h: f64 = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Mean entropy (bits) of `n_a` qubits in a Haar-random pure state on
/// `n_a + n_b` qubits:
///
/// ```text
/// (1 / ln 2) [ sum_{k = 2^{n_b} + 1}^{2^{n_a + n_b}} 1/k  -  (2^{n_a} - 1) / 2^{n_b + 1} ]
/// ```
pub fn page_average(n_a: usize, n_b: usize) -> Result<f64> {
    if n_a == 0 || n_a > n_b {
        return Err(Error::InvalidParameter(format!(
            "Page average needs 1 <= n_a <= n_b, got n_a = {n_a}, n_b = {n_b}"
        )));
    }
    if n_a + n_b > 40 {
        return Err(Error::InvalidParameter(format!(
            "Page average supports n_a + n_b <= 40, got {}",
            n_a + n_b
        )));
    }
    let lower = 1u64 << n_b;
    let upper = 1u64 << (n_a + n_b);
    // Smallest terms first.
    let harmonic: f64 = (lower + 1..=upper).rev().map(|k| (k as f64).recip()).sum();
    let correction = ((1u64 << n_a) - 1) as f64 / (1u64 << (n_b + 1)) as f64;
    Ok((harmonic - correction) / std::f64::consts::LN_2)
}

/// Distribution of the (integer) entropy of `n_a` qubits in a uniformly
/// random `n`-qubit stabilizer state. Entry `s` is `P(S_A = s)`.
///
/// Evaluated in log space.
pub fn stabilizer_entropy_pmf(n: usize, n_a: usize) -> Result<Vec<f64>> {
    if n_a == 0 || 2 * n_a > n {
        return Err(Error::InvalidParameter(format!(
            "stabilizer distribution needs 1 <= n_a <= n - n_a, got n = {n}, n_a = {n_a}"
        )));
    }
    if n > 60 {
        return Err(Error::InvalidParameter(format!(
            "stabilizer distribution supports n <= 60, got {n}"
        )));
    }
    let pow2 = |e: usize| (e as f64).exp2();
    let log_prefactor: f64 = (1..=n_a).map(|i| (pow2(i) + 1.0).ln()).sum::<f64>()
        - (n - n_a + 1..=n).map(|k| (pow2(k) + 1.0).ln()).sum::<f64>();
    let mut pmf = Vec::with_capacity(n_a + 1);
    let mut log_term = log_prefactor;
    pmf.push(log_term.exp());
    for j in 1..=n_a {
        log_term += (pow2(n - n_a + 1 - j) - 1.0).ln() + (pow2(n_a + j) - pow2(2 * j - 1)).ln()
            - (pow2(2 * j) - 1.0).ln();
        pmf.push(log_term.exp());
    }
    Ok(pmf)
}

/// Mean of [`stabilizer_entropy_pmf`].
pub fn stabilizer_mean_entropy(n: usize, n_a: usize) -> Result<f64> {
    Ok(stabilizer_entropy_pmf(n, n_a)?
        .iter()
        .enumerate()
        .map(|(s, p)| s as f64 * p)
        .sum())
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    if n == 0 || n > crate::statevec::MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "Haar sampling needs 1 <= n <= {}, got {n}",
            crate::statevec::MAX_QUBITS
        )));
    }
    let amps = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
    StateVector::from_amplitudes(amps)
}

/// Haar-random `dim × dim` unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let (mut q, r) = ginibre.qr().unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Density-normalized histogram over evenly spaced bins.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
    /// Samples outside `[lo, hi]` that were clamped into a boundary bin.
    pub overflow: usize,
}

impl EntanglementHistogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.bin_edges[0], self.bin_edges[self.bin_edges.len() - 1])
    }

    pub fn bin_width(&self) -> f64 {
        let (lo, hi) = self.range();
        (hi - lo) / self.bins() as f64
    }

    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<f64> {
        let width = self.bin_width();
        self.densities.iter().map(|d| d * width).collect()
    }

    /// `(bin_lo, bin_hi, density)` for every bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.bin_edges
            .windows(2)
            .zip(&self.densities)
            .map(|(edge, &d)| (edge[0], edge[1], d))
    }
}

/// Density-normalized histogram of `samples` on `bins` right-closed bins
/// spanning `[lo, hi]`. Out-of-range samples go to the nearest boundary bin
/// and are counted in `overflow`.
pub fn build_histogram(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<EntanglementHistogram> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("cannot histogram an empty sample list".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidParameter(format!(
            "histogram range [{lo}, {hi}] is empty or not finite"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut overflow = 0;
    for &x in samples {
        if x.is_nan() {
            return Err(Error::InvalidParameter("NaN sample".into()));
        }
        if x < lo || x > hi {
            overflow += 1;
        }
        // Bins are right-closed: (lo + i w, lo + (i + 1) w], the first also
        // taking `lo` itself.
        let idx = ((x - lo) / width).ceil() - 1.0;
        let idx = if idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
        counts[idx] += 1;
    }
    let total = samples.len() as f64;
    let mut bin_edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);
    Ok(EntanglementHistogram {
        bin_edges,
        densities: counts.iter().map(|&k| k as f64 / (total * width)).collect(),
        sample_count: samples.len(),
        overflow,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("KS statistic needs nonempty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        // Advance past every copy of the next distinct value in both samples.
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Total-variation distance between two histograms on the same binning.
pub fn total_variation(h1: &EntanglementHistogram, h2: &EntanglementHistogram) -> Result<f64> {
    if h1.bins() != h2.bins() || h1.range() != h2.range() {
        return Err(Error::InvalidParameter(format!(
            "histograms differ in binning: {} bins on {:?} vs {} bins on {:?}",
            h1.bins(),
            h1.range(),
            h2.bins(),
            h2.range()
        )));
    }
    Ok(0.5
        * h1.masses()
            .iter()
            .zip(h2.masses())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionDistance {
    pub ks: f64,
    pub total_variation: f64,
}

/// KS on the raw samples and total variation on a common `bins`-bin
/// histogram over `[lo, hi]`.
pub fn distribution_distance(
    a: &[f64],
    b: &[f64],
    bins: usize,
    lo: f64,
    hi: f64,
) -> Result<DistributionDistance> {
    let ks = ks_statistic(a, b)?;
    let tv = total_variation(&build_histogram(a, bins, lo, hi)?, &build_histogram(b, bins, lo, hi)?)?;
    Ok(DistributionDistance {
        ks,
        total_variation: tv,
    })
}
