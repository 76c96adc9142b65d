//! Fixtures shared by the benchmarks.

use wgs_core::rng::input_stream;
use wgs_core::{haar_sample, StateVector};

/// Haar-random input on `n` qubits, fixed per `n`.
pub fn fixed_input(n: usize) -> StateVector {
    haar_sample(n, &mut input_stream(0xBE7C, n as u64)).expect("valid qubit count")
}
