//! Cross-checks of the symbolic layer against explicit matrices and statevectors.

mod common;

#[test]
fn products_and_commutation_exhaustive() {
    common::pauli_products_exhaustive().unwrap();
}

#[test]
fn dense_pauli_action_exhaustive() {
    common::dense_pauli_exhaustive().unwrap();
}

#[test]
fn conjugation_matches_unitaries() {
    common::conjugation_cases(100).unwrap();
}

#[test]
fn stabilizer_states_match_statevectors() {
    common::stabilizer_cases(100).unwrap();
}

#[test]
fn projector_of_partial_code() {
    common::partial_code_cases(20).unwrap();
}
