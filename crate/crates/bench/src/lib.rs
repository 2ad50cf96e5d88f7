//! Shared inputs for the criterion benches.

use caqc_core::pqc::{encoded_state, synthetic_inputs};
use caqc_core::*;

/// Dense random-looking Pauli word on `n` qubits, from a fixed pattern.
pub fn word(n: usize, salt: usize) -> PauliProduct {
    let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut p = PauliProduct::identity(n);
    for q in 0..n {
        p.set_letter(q, letters[(q * 7 + salt * 13 + q * q) % 4]);
    }
    p
}

/// A randomized model of `rule` with one encoded input.
pub fn model_and_input(rule: &str, extended: bool, n: usize, depth: usize) -> (PqcModel, DenseState) {
    let t = Cqca::builtin(rule).expect("built-in rule");
    let mut m = PqcModel::new(&t, n, depth, extended, pqc::DEFAULT_ENCODER_REPS).expect("model compiles");
    m.randomize(&mut rng::stream(0, "params"));
    let x = &synthetic_inputs(n, 1, 0)[0];
    (m, encoded_state(x, pqc::DEFAULT_ENCODER_REPS).expect("input in range"))
}
