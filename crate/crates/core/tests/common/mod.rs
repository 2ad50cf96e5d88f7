//! Explicit-matrix oracle shared by the oracle tests and the acceptance run.
//!
//! Every check returns the number of instances it compared, or a description of the
//! first disagreement.

#![allow(dead_code)]

use caqc_core::dense::Gate;
use caqc_core::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M = DMatrix<Complex64>;
pub type Check = std::result::Result<usize, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

const LETTERS: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(l: Letter) -> M {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match l {
        Letter::I => M::from_row_slice(2, 2, &[o, z, z, o]),
        Letter::X => M::from_row_slice(2, 2, &[z, o, o, z]),
        Letter::Y => M::from_row_slice(2, 2, &[z, -i, i, z]),
        Letter::Z => M::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product with qubit 0 as the least significant index.
pub fn matrix(p: &PauliProduct) -> M {
    let mut m = M::from_element(1, 1, c(1.0, 0.0));
    for q in (0..p.n_qubits()).rev() {
        m = m.kronecker(&letter_matrix(p.letter(q)));
    }
    let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase_exp() as usize];
    m * phase
}

pub fn close(a: &M, b: &M) -> bool {
    (a - b).iter().all(|v| v.norm() < 1e-10)
}

pub fn all_words(n: usize) -> Vec<PauliProduct> {
    (0..4usize.pow(n as u32))
        .map(|mut k| {
            let mut p = PauliProduct::identity(n);
            for q in 0..n {
                p.set_letter(q, LETTERS[k % 4]);
                k /= 4;
            }
            p
        })
        .collect()
}

pub fn random_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> Vec<Gate> {
    (0..len)
        .map(|_| match rng.gen_range(0..3) {
            0 => Gate::H(rng.gen_range(0..n)),
            1 => Gate::S(rng.gen_range(0..n)),
            _ if n > 1 => {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(1..n)) % n;
                Gate::Cz(a, b)
            }
            _ => Gate::H(0),
        })
        .collect()
}

pub fn circuit_table(n: usize, gates: &[Gate]) -> CliffordTable {
    let mut t = CliffordTable::identity(n);
    for g in gates {
        let step = match g {
            Gate::H(q) => CliffordTable::hadamard(n, &[*q]),
            Gate::S(q) => CliffordTable::phase_s(n, &[*q]),
            Gate::Cz(a, b) => CliffordTable::cz(n, &[(*a, *b)]),
            _ => unreachable!(),
        };
        t = t.then(&step).unwrap();
    }
    t
}

pub fn circuit_unitary(n: usize, gates: &[Gate]) -> M {
    let dim = 1 << n;
    let mut u = M::zeros(dim, dim);
    for col in 0..dim {
        let mut s = DenseState::basis(n, col).unwrap();
        for g in gates {
            s.apply_gate(g).unwrap();
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    u
}

/// `prod_k (1 + S_k) / 2`.
pub fn code_projector(code: &StabilizerCode) -> M {
    let dim = 1 << code.n_qubits();
    let mut proj = M::identity(dim, dim);
    for s in code.stabilizers() {
        proj = proj * ((M::identity(dim, dim) + matrix(s)) * c(0.5, 0.0));
    }
    proj
}

/// Products and commutation of all Pauli words on up to three qubits.
pub fn pauli_products_exhaustive() -> Check {
    let mut count = 0;
    for n in 1..=3 {
        let words = all_words(n);
        for (k, a) in words.iter().enumerate() {
            let a = a.clone().with_phase((k % 4) as u8);
            let ma = matrix(&a);
            for b in &words {
                let mb = matrix(b);
                let ab = a.multiply(b).unwrap();
                ensure!(close(&matrix(&ab), &(&ma * &mb)), "{a} * {b} = {ab}");
                let commute = close(&(&ma * &mb), &(&mb * &ma));
                ensure!(a.commutes(b).unwrap() == commute, "commutation of {a} and {b}");
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Statevector Pauli action and expectation for every word on up to three qubits.
pub fn dense_pauli_exhaustive() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut count = 0;
    for n in 1..=3 {
        let amps: Vec<Complex64> = (0..1 << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let psi = DenseState::from_amplitudes(amps).unwrap();
        let v = DVector::from_column_slice(psi.amplitudes());
        for p in all_words(n) {
            let mut s = psi.clone();
            s.apply_pauli(&p).unwrap();
            let want = matrix(&p) * &v;
            ensure!(s.amplitudes().iter().zip(want.iter()).all(|(a, b)| (a - b).norm() < 1e-12), "action of {p}");
            let e = (v.adjoint() * matrix(&p) * &v)[(0, 0)].re;
            ensure!((psi.expectation(&p).unwrap() - e).abs() < 1e-12, "expectation of {p}");
            count += 1;
        }
    }
    Ok(count)
}

/// Clifford tables of random H/S/CZ circuits against `U P U^dagger`.
pub fn conjugation_cases(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..cases {
        let n = 1 + k % 4;
        let gates = random_circuit(n, 12, &mut rng);
        let t = circuit_table(n, &gates);
        ensure!(t.check_relations().is_ok(), "case {k}: table is not Clifford");
        let u = circuit_unitary(n, &gates);
        for p in [PauliProduct::x(n, k % n), PauliProduct::z(n, (k / 4) % n), PauliProduct::y(n, 0)] {
            let want = &u * matrix(&p) * u.adjoint();
            ensure!(close(&matrix(&t.conjugate(&p).unwrap()), &want), "case {k}: image of {p}");
        }
    }
    Ok(cases)
}

/// Random stabilizer states against statevectors: generators, projector and one
/// random Pauli measurement (outcome, probability, post-measurement state).
pub fn stabilizer_cases(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..cases {
        let n = 1 + k % 4;
        let gates = random_circuit(n, 15, &mut rng);
        let t = circuit_table(n, &gates);
        let zeros = StabilizerCode::new(n, (0..n).map(|q| PauliProduct::z(n, q)).collect(), Vec::new()).unwrap();
        let mut code = zeros.conjugate(&t).unwrap();
        let mut psi = DenseState::zero(n).unwrap();
        for g in &gates {
            psi.apply_gate(g).unwrap();
        }
        for s in code.stabilizers() {
            ensure!((psi.expectation(s).unwrap() - 1.0).abs() < 1e-10, "case {k}: <{s}> != 1");
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        ensure!(close(&code_projector(&code), &(&v * v.adjoint())), "case {k}: projector");

        let mut obs = PauliProduct::identity(n);
        while obs.is_identity_letters() {
            for q in 0..n {
                obs.set_letter(q, LETTERS[rng.gen_range(0..4)]);
            }
        }
        if rng.gen() {
            obs = obs.negated();
        }
        let mut r2 = ChaCha8Rng::seed_from_u64(k as u64);
        let rec = code.measure_pauli(&obs, None, &mut r2).unwrap();
        let (bit, p) = psi.measure_projective(&obs, Some(rec.outcome), &mut r2).unwrap();
        ensure!(bit == rec.outcome, "case {k}: outcome of {obs}");
        ensure!((p - rec.probability).abs() < 1e-10, "case {k}: probability {p} vs {}", rec.probability);
        for s in code.stabilizers() {
            ensure!((psi.expectation(s).unwrap() - 1.0).abs() < 1e-10, "case {k}: after measuring {obs}, <{s}> != 1");
        }
    }
    Ok(cases)
}

/// Codes with logical qubits: the projector is idempotent with trace `2^k` and
/// commutes with every logical.
pub fn partial_code_cases(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..cases {
        let n = 2 + k % 3;
        let gates = random_circuit(n, 10, &mut rng);
        let t = circuit_table(n, &gates);
        let code = StabilizerCode::new(
            n,
            vec![PauliProduct::z(n, 0)],
            (1..n).map(|q| (PauliProduct::x(n, q), PauliProduct::z(n, q))).collect(),
        )
        .unwrap()
        .conjugate(&t)
        .unwrap();
        let p = code_projector(&code);
        ensure!(close(&(&p * &p), &p), "case {k}: projector is not idempotent");
        let trace: Complex64 = p.diagonal().iter().sum();
        ensure!((trace.re - (1 << (n - 1)) as f64).abs() < 1e-10, "case {k}: trace {trace}");
        for (x, z) in code.logicals() {
            ensure!(close(&(matrix(x) * &p), &(&p * matrix(x))), "case {k}: {x}");
            ensure!(close(&(matrix(z) * &p), &(&p * matrix(z))), "case {k}: {z}");
        }
    }
    Ok(cases)
}
