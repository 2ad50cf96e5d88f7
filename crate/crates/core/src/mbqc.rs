//! Measurement-based execution by unit cells.
//!
//! Each iteration attaches a fresh column of `|+>` qubits, entangles it with the
//! current column through `U_T`, rotates the old column about `Z`, measures it in the
//! `X` basis and discards it. Input qubits are `0..n`, output qubits `n..2n`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::clifford::{CliffordMap, CliffordTable};
use crate::compiler::RotationLayerProgram;
use crate::cqca::Cqca;
use crate::dense::DenseState;
use crate::error::{CaqcError, Result};
use crate::pauli::PauliProduct;
use crate::rng;
use crate::stabilizer::StabilizerCode;

/// The two-column map `U_T = T^(out) prod_i H_i^(out) CZ_{i,i}^(in,out)`.
#[derive(Clone, Debug)]
pub struct UtMap {
    pub rule: String,
    pub n: usize,
    /// `T` on one ring of `n` qubits.
    pub ring: CliffordTable,
    /// `U_T` on `2n` qubits.
    pub table: CliffordTable,
}

impl CliffordMap for UtMap {
    fn n_qubits(&self) -> usize {
        2 * self.n
    }

    fn image_x(&self, q: usize) -> &PauliProduct {
        self.table.image_x(q)
    }

    fn image_z(&self, q: usize) -> &PauliProduct {
        self.table.image_z(q)
    }
}

/// Builds `U_T` from its circuit and checks the four image rules.
pub fn build_ut(t: &Cqca, n: usize) -> Result<UtMap> {
    t.validate(n)?;
    ut_from_ring(t.name(), t.ring_map(n)?)
}

fn ut_from_ring(rule: &str, ring: CliffordTable) -> Result<UtMap> {
    let n = ring.n_qubits();
    let m = 2 * n;
    let rungs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + i)).collect();
    let outs: Vec<usize> = (n..m).collect();
    let table = CliffordTable::cz(m, &rungs)
        .then(&CliffordTable::hadamard(m, &outs))?
        .then(&ring.embed(m, &outs))?;
    let lift = |p: &PauliProduct| p.remap(m, &outs);
    for i in 0..n {
        let x_in = PauliProduct::x(m, i);
        let z_in = PauliProduct::z(m, i);
        let tx = lift(ring.image_x(i));
        let tz = lift(ring.image_z(i));
        let rules = [
            (table.image_x(i), x_in.mul_unchecked(&tx)),
            (table.image_z(i), z_in.clone()),
            (table.image_x(n + i), z_in.mul_unchecked(&tz)),
            (table.image_z(n + i), tx.clone()),
        ];
        for (got, want) in rules {
            if *got != want {
                return Err(CaqcError::Validation(format!("U_T image {got} differs from {want}")));
            }
        }
    }
    Ok(UtMap { rule: rule.to_string(), n, ring, table })
}

impl UtMap {
    /// Applies `U_T` to a dense state on `2n` qubits.
    pub fn apply_dense(&self, s: &mut DenseState) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            s.apply_cz(i, n + i)?;
        }
        for i in n..2 * n {
            s.apply_h(i)?;
        }
        s.apply_clifford(&self.ring, &(n..2 * n).collect::<Vec<_>>())
    }
}

/// Byproduct `operator` (already pushed to the end of the computation) caused by
/// outcome 1 at input `site` of iteration `step`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Byproduct {
    pub operator: PauliProduct,
    pub step: usize,
    pub site: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ByproductLedger {
    pub entries: Vec<Byproduct>,
}

#[derive(Clone, Debug)]
pub struct MbqcConfig {
    /// Apply `T(Z_i)^m` after every iteration.
    pub corrected: bool,
    /// Absorb the rotations into the measurement basis instead of applying them.
    pub folded: bool,
    /// Fixed outcome grid (`steps x n`); sampled from the seed when absent.
    pub forced_outcomes: Option<Vec<Vec<bool>>>,
    pub seed: u64,
}

impl MbqcConfig {
    pub fn corrected(seed: u64) -> Self {
        MbqcConfig { corrected: true, folded: false, forced_outcomes: None, seed }
    }

    pub fn uncorrected(seed: u64) -> Self {
        MbqcConfig { corrected: false, ..Self::corrected(seed) }
    }
}

#[derive(Clone, Debug)]
pub struct MbqcRun {
    pub rules: Vec<String>,
    pub n: usize,
    pub angles: Vec<Vec<f64>>,
    pub outcomes: Vec<Vec<bool>>,
    pub corrected: bool,
    pub final_state: DenseState,
    pub ledger: ByproductLedger,
    pub seed: u64,
}

/// The measurement loop: `depth` iterations of `U_T` with an angle grid of `depth x n`.
pub fn run_algorithm1(t: &Cqca, n: usize, depth: usize, angles: &[Vec<f64>], cfg: &MbqcConfig) -> Result<MbqcRun> {
    let ut = build_ut(t, n)?;
    let steps = vec![ut; depth];
    run_steps(&steps, angles, cfg)
}

/// Extended variant: per depth `j` an iteration with `T' = T_1 T` using `theta[j]`,
/// then one with `T_1` using `gamma[j]`.
pub fn run_extended(t: &Cqca, n: usize, depth: usize, theta: &[Vec<f64>], gamma: &[Vec<f64>], cfg: &MbqcConfig) -> Result<MbqcRun> {
    if theta.len() != depth || gamma.len() != depth {
        return Err(CaqcError::Dimension { expected: depth, actual: theta.len().min(gamma.len()) });
    }
    let (tp, t1) = extended_steps(t, n)?;
    let mut steps = Vec::with_capacity(2 * depth);
    let mut angles = Vec::with_capacity(2 * depth);
    for j in 0..depth {
        steps.push(tp.clone());
        angles.push(theta[j].clone());
        steps.push(t1.clone());
        angles.push(gamma[j].clone());
    }
    run_steps(&steps, &angles, cfg)
}

/// `(U_{T'}, U_{T_1})` with `T' = T_1 T`.
pub fn extended_steps(t: &Cqca, n: usize) -> Result<(UtMap, UtMap)> {
    t.validate(n)?;
    let h = CliffordTable::hadamard(n, &(0..n).collect::<Vec<_>>());
    let tp = ut_from_ring(&format!("{}+hadamard", t.name()), t.ring_map(n)?.then(&h)?)?;
    let t1 = ut_from_ring("hadamard", h)?;
    Ok((tp, t1))
}

/// Angle grid flattened into a parameter vector in the compiler's indexing.
pub fn flatten_angles(angles: &[Vec<f64>]) -> Vec<f64> {
    angles.iter().flatten().copied().collect()
}

/// Runs one iteration per entry of `steps`, using the matching row of `angles`.
pub fn run_steps(steps: &[UtMap], angles: &[Vec<f64>], cfg: &MbqcConfig) -> Result<MbqcRun> {
    let n = steps.first().map(|s| s.n).ok_or_else(|| CaqcError::Precondition("no iterations".into()))?;
    if angles.len() != steps.len() || angles.iter().any(|row| row.len() != n) {
        return Err(CaqcError::Dimension { expected: steps.len() * n, actual: angles.iter().map(Vec::len).sum() });
    }
    if let Some(f) = &cfg.forced_outcomes {
        if f.len() != steps.len() || f.iter().any(|row| row.len() != n) {
            return Err(CaqcError::Dimension { expected: steps.len() * n, actual: f.iter().map(Vec::len).sum() });
        }
    }
    let mut rng = rng::stream(cfg.seed, "outcomes");
    let mut psi = DenseState::plus(n)?;
    let mut outcomes = Vec::with_capacity(steps.len());
    let mut raw = Vec::new();
    for (k, (ut, row)) in steps.iter().zip(angles).enumerate() {
        let mut s = psi.append_plus(n)?;
        ut.apply_dense(&mut s)?;
        let forced = cfg.forced_outcomes.as_ref().map(|f| &f[k]);
        let m = if cfg.folded {
            let (out, m) = measure_folded(&s, n, row, forced, &mut rng)?;
            psi = out;
            m
        } else {
            let two_n = 2 * n;
            for (i, &theta) in row.iter().enumerate() {
                s.apply_pauli_rotation(&PauliProduct::z(two_n, i), theta)?;
            }
            let mut m = Vec::with_capacity(n);
            for i in 0..n {
                let (bit, _) = s.measure_projective(&PauliProduct::x(two_n, i), forced.map(|f| f[i]), &mut rng)?;
                m.push(bit);
            }
            psi = s.discard_x_qubits(&(0..n).collect::<Vec<_>>(), &m)?;
            m
        };
        for (i, &bit) in m.iter().enumerate() {
            if bit {
                let b = ut.ring.image_z(i);
                if cfg.corrected {
                    psi.apply_pauli(b)?;
                } else {
                    raw.push((k, i, b.clone()));
                }
            }
        }
        outcomes.push(m);
    }
    // Push recorded byproducts through the remaining iterations.
    let entries = raw
        .into_iter()
        .map(|(k, i, b)| {
            let mut op = b;
            for later in &steps[k + 1..] {
                op = later.ring.conjugate(&op)?;
            }
            Ok(Byproduct { operator: op, step: k, site: i })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MbqcRun {
        rules: steps.iter().map(|s| s.rule.clone()).collect(),
        n,
        angles: angles.to_vec(),
        outcomes,
        corrected: cfg.corrected,
        final_state: psi,
        ledger: ByproductLedger { entries },
        seed: cfg.seed,
    })
}

/// Measures every input qubit in the basis `exp(-iθZ)|±>`, which equals rotating by
/// `exp(iθZ)` and measuring `X`.
fn measure_folded<R: Rng>(
    s: &DenseState,
    n: usize,
    row: &[f64],
    forced: Option<&Vec<bool>>,
    rng: &mut R,
) -> Result<(DenseState, Vec<bool>)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut cur = s.clone();
    let mut m = Vec::with_capacity(n);
    for (i, &theta) in row.iter().enumerate() {
        // <±| exp(iθZ) as a row vector; the current input is always qubit 0.
        let e = Complex64::from_polar(h, theta);
        let bra = |minus: bool| [e, if minus { -e.conj() } else { e.conj() }];
        let bit = match forced {
            Some(f) => f[i],
            None => {
                let (_, p_minus) = cur.contract_qubit(0, bra(true)).unwrap_or((cur.clone(), 0.0));
                rng.gen::<f64>() < p_minus
            }
        };
        let (next, _) = cur.contract_qubit(0, bra(bit))?;
        cur = next;
        m.push(bit);
    }
    Ok((cur, m))
}

/// Pushes every byproduct to the end of `prog`.
///
/// Walks the rotations in order with the running product of byproducts emitted so
/// far; a rotation whose generator anticommutes with that product has its angle
/// negated. Byproducts of iteration `k` join the product after the rotations of
/// iteration `k`. Returns the final Pauli and the sign-flipped program.
pub fn commute_byproducts(ledger: &ByproductLedger, prog: &RotationLayerProgram) -> Result<(PauliProduct, RotationLayerProgram)> {
    let n = prog.n_qubits;
    let last_step = prog.rotations.iter().map(|r| r.step).max();
    for b in &ledger.entries {
        if b.operator.n_qubits() != n || Some(b.step) > last_step || b.site >= n {
            return Err(CaqcError::Precondition(format!(
                "byproduct at iteration {} site {} does not fit the program",
                b.step + 1,
                b.site + 1
            )));
        }
    }
    let mut tail = PauliProduct::identity(n);
    let mut flips = BTreeSet::new();
    let mut absorbed = 0usize;
    let mut entries: Vec<&Byproduct> = ledger.entries.iter().collect();
    entries.sort_by_key(|b| b.step);
    for (k, r) in prog.rotations.iter().enumerate() {
        while absorbed < entries.len() && entries[absorbed].step < r.step {
            tail = entries[absorbed].operator.mul_unchecked(&tail);
            absorbed += 1;
        }
        if r.generator.anticommutes_unchecked(&tail) {
            flips.insert(k);
        }
    }
    for b in &entries[absorbed..] {
        tail = b.operator.mul_unchecked(&tail);
    }
    Ok((tail, prog.with_flipped(&flips)))
}

/// Stabilizer-picture trace of one iteration with `+` outcomes.
#[derive(Clone, Debug)]
pub struct HeisenbergReport {
    /// Code on `2n` qubits right after `U_T`.
    pub after_ut: StabilizerCode,
    /// Logical pairs on the output column after measuring and discarding the inputs.
    pub output_logicals: Vec<(PauliProduct, PauliProduct)>,
    /// `(T(X_i), T(Z_i))`.
    pub expected: Vec<(PauliProduct, PauliProduct)>,
    pub matches: bool,
}

pub fn heisenberg_trace(t: &Cqca, n: usize) -> Result<HeisenbergReport> {
    let ut = build_ut(t, n)?;
    let m = 2 * n;
    let input = StabilizerCode::new(
        m,
        (n..m).map(|q| PauliProduct::x(m, q)).collect(),
        (0..n).map(|i| (PauliProduct::x(m, i), PauliProduct::z(m, i))).collect(),
    )?;
    let after_ut = input.conjugate(&ut)?;
    let mut code = after_ut.clone();
    let mut rng = rng::stream(0, "heisenberg");
    for i in 0..n {
        code.measure_pauli(&PauliProduct::x(m, i), Some(false), &mut rng)?;
    }
    let out = code.drop_qubits(&(0..n).collect::<Vec<_>>())?;
    let output_logicals = out.logicals().to_vec();
    let expected: Vec<_> = (0..n).map(|i| (ut.ring.image_x(i).clone(), ut.ring.image_z(i).clone())).collect();
    let matches = output_logicals == expected;
    Ok(HeisenbergReport { after_ut, output_logicals, expected, matches })
}

/// Random angle grid of `rows x n` in `[-π, π)`.
pub fn random_angles<R: Rng>(rows: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    (0..rows).map(|_| (0..n).map(|_| rng.gen_range(-PI..PI)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::theorem2_program;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliProduct {
        s.parse().unwrap()
    }

    #[test]
    fn ut_images_for_cluster() {
        let ut = build_ut(&Cqca::cluster(), 4).unwrap();
        // Z of output qubit 2 maps to T(X_2) on the output column.
        assert_eq!(ut.image_z(5), &p("+X5 Z6 X7 @N=8"));
        for i in 0..4 {
            assert_eq!(ut.image_z(i), &PauliProduct::z(8, i));
        }
    }

    #[test]
    fn zero_angles_one_block_is_identity() {
        for (t, n) in [(Cqca::cluster(), 3), (Cqca::periodic_cluster(), 3)] {
            let l = t.period(n).unwrap();
            let run = run_algorithm1(&t, n, l, &vec![vec![0.0; n]; l], &MbqcConfig::corrected(5)).unwrap();
            assert_abs_diff_eq!(run.final_state.fidelity(&DenseState::plus(n).unwrap()).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn corrected_matches_theorem2() {
        let t = Cqca::cluster();
        let n = 2;
        let l = t.period(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let angles = random_angles(l, n, &mut rng);
        let prog = theorem2_program(&t, n, l, false).unwrap();
        let mut want = DenseState::plus(n).unwrap();
        prog.evaluate(&flatten_angles(&angles), &mut want).unwrap();
        for seed in 0..3 {
            let run = run_algorithm1(&t, n, l, &angles, &MbqcConfig::corrected(seed)).unwrap();
            assert_abs_diff_eq!(run.final_state.fidelity(&want).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn all_plus_outcomes_need_no_correction() {
        let t = Cqca::cluster();
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let angles = random_angles(2, n, &mut rng);
        let forced = Some(vec![vec![false; n]; 2]);
        let a = run_algorithm1(&t, n, 2, &angles, &MbqcConfig { forced_outcomes: forced.clone(), ..MbqcConfig::corrected(0) }).unwrap();
        let b = run_algorithm1(&t, n, 2, &angles, &MbqcConfig { forced_outcomes: forced, ..MbqcConfig::uncorrected(0) }).unwrap();
        assert_abs_diff_eq!(a.final_state.fidelity(&b.final_state).unwrap(), 1.0, epsilon = 1e-12);
        assert!(b.ledger.entries.is_empty());
    }

    #[test]
    fn folded_measurements_agree() {
        let t = Cqca::fractal_cluster();
        let n = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let angles = random_angles(3, n, &mut rng);
        let forced = Some(vec![vec![true, false], vec![false, true], vec![true, true]]);
        for corrected in [true, false] {
            let base = MbqcConfig { corrected, folded: false, forced_outcomes: forced.clone(), seed: 0 };
            let a = run_algorithm1(&t, n, 3, &angles, &base).unwrap();
            let b = run_algorithm1(&t, n, 3, &angles, &MbqcConfig { folded: true, ..base }).unwrap();
            assert_abs_diff_eq!(a.final_state.fidelity(&b.final_state).unwrap(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn empty_ledger_leaves_program() {
        let prog = theorem2_program(&Cqca::cluster(), 3, Cqca::cluster().period(3).unwrap(), false).unwrap();
        let (tail, flipped) = commute_byproducts(&ByproductLedger::default(), &prog).unwrap();
        assert!(tail.is_identity());
        assert_eq!(flipped, prog);
    }

    #[test]
    fn heisenberg_trace_reproduces_images() {
        for (t, n) in [(Cqca::cluster(), 3), (Cqca::fractal_cluster(), 4), (Cqca::periodic_cluster(), 3)] {
            let rep = heisenberg_trace(&t, n).unwrap();
            assert!(rep.matches, "{}: {:?}", t.name(), rep.output_logicals);
            let m = 2 * n;
            let ring = t.ring_map(n).unwrap();
            let outs: Vec<usize> = (n..m).collect();
            let expected: Vec<PauliProduct> =
                (0..n).map(|i| PauliProduct::z(m, i).mul_unchecked(&ring.image_z(i).remap(m, &outs))).collect();
            let want = StabilizerCode::new(m, expected, vec![]).unwrap();
            let got = StabilizerCode::new(m, rep.after_ut.stabilizers().to_vec(), vec![]).unwrap();
            assert!(StabilizerCode::codes_equal(&want, &got));
        }
    }

    #[test]
    fn uncorrected_runs_reconstruct_with_byproducts() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for (t, n, extended) in [(Cqca::cluster(), 2, false), (Cqca::fractal_cluster(), 4, false), (Cqca::periodic_cluster(), 2, true)] {
            let l = t.period(n).unwrap();
            let prog = theorem2_program(&t, n, l, extended).unwrap();
            let rows = if extended { 2 * l } else { l };
            let angles = random_angles(rows, n, &mut rng);
            for seed in 0..4 {
                let cfg = MbqcConfig::uncorrected(seed);
                let run = if extended {
                    let theta: Vec<_> = angles.iter().step_by(2).cloned().collect();
                    let gamma: Vec<_> = angles.iter().skip(1).step_by(2).cloned().collect();
                    run_extended(&t, n, l, &theta, &gamma, &cfg).unwrap()
                } else {
                    run_algorithm1(&t, n, l, &angles, &cfg).unwrap()
                };
                let (tail, flipped) = commute_byproducts(&run.ledger, &prog).unwrap();
                let mut want = DenseState::plus(n).unwrap();
                flipped.evaluate(&flatten_angles(&angles), &mut want).unwrap();
                want.apply_pauli(&tail).unwrap();
                assert_abs_diff_eq!(run.final_state.fidelity(&want).unwrap(), 1.0, epsilon = 1e-9);
                let corrected = MbqcConfig::corrected(seed);
                let run = if extended {
                    let theta: Vec<_> = angles.iter().step_by(2).cloned().collect();
                    let gamma: Vec<_> = angles.iter().skip(1).step_by(2).cloned().collect();
                    run_extended(&t, n, l, &theta, &gamma, &corrected).unwrap()
                } else {
                    run_algorithm1(&t, n, l, &angles, &corrected).unwrap()
                };
                let mut want = DenseState::plus(n).unwrap();
                prog.evaluate(&flatten_angles(&angles), &mut want).unwrap();
                assert_abs_diff_eq!(run.final_state.fidelity(&want).unwrap(), 1.0, epsilon = 1e-9);
            }
        }
    }
}
