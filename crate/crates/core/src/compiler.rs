//! Rotation-layer programs for blocks of CQCA-based circuits.
//!
//! A block is `L` repetitions of "a layer of `exp(i θ Z_i)` then `T`". Pushing every
//! `T` to the end (where `T^L = id`) turns it into a product of rotations whose
//! generators are images `T^k(Z_i)`; the program lists those rotations in
//! application order.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::clifford::CliffordTable;
use crate::cqca::Cqca;
use crate::dense::DenseState;
use crate::error::{CaqcError, Result};
use crate::pauli::{Letter, PauliProduct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationKind {
    Theta,
    Gamma,
}

/// `exp(i · sign · params[param] · generator)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rotation {
    /// Hermitian generator stored with phase exponent 0.
    pub generator: PauliProduct,
    pub param: usize,
    pub sign: f64,
    /// Depth `j` within the program, 1-based.
    pub depth: usize,
    pub kind: RotationKind,
    /// Qubit whose `Z` rotation this came from, 0-based.
    pub site: usize,
    /// Circuit layer the rotation was applied in, 0-based: `j - 1`, or
    /// `2(j - 1) + {0 for θ, 1 for γ}` for extended programs.
    pub step: usize,
}

impl Rotation {
    pub fn angle(&self, params: &[f64]) -> f64 {
        self.sign * params[self.param]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProgramMeta {
    pub rule: String,
    pub period: usize,
    pub depth: usize,
    pub extended: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationLayerProgram {
    pub n_qubits: usize,
    pub n_params: usize,
    pub rotations: Vec<Rotation>,
    pub meta: ProgramMeta,
}

fn signed_generator(p: PauliProduct) -> (PauliProduct, f64) {
    debug_assert!(p.is_hermitian());
    let sign = if p.phase_exp() == 2 { -1.0 } else { 1.0 };
    (p.with_phase(0), sign)
}

/// Rotation program of `depth` layers, using `L = period(t, n)`.
///
/// Layer `j` contributes generators `T^e(Z_i)` with `e = [L - [j]_L + 1]_L`; in the
/// extended form it is followed by generators `T^e'(X_i)` with `e' = [L - [j]_L]_L`.
/// Parameters are indexed `(j-1) n + i`, or `(2(j-1) + layer) n + i` when extended.
pub fn compile_layers(t: &Cqca, n: usize, depth: usize, extended: bool) -> Result<RotationLayerProgram> {
    t.validate(n)?;
    let l = t.period(n)?;
    let (xs, zs) = t.power_orbit(n, l)?;
    let mut rotations = Vec::new();
    let per_layer = if extended { 2 } else { 1 };
    for j in 1..=depth {
        let jl = j % l;
        let e_theta = (l - jl + 1) % l;
        let e_gamma = (l - jl) % l;
        let mut layers = vec![(RotationKind::Theta, &zs[e_theta])];
        if extended {
            layers.push((RotationKind::Gamma, &xs[e_gamma]));
        }
        for (layer, (kind, base)) in layers.into_iter().enumerate() {
            let step = (j - 1) * per_layer + layer;
            for i in 0..n {
                let (generator, sign) = signed_generator(base.translate(i as i64));
                rotations.push(Rotation { generator, param: step * n + i, sign, depth: j, kind, site: i, step });
            }
        }
    }
    Ok(RotationLayerProgram {
        n_qubits: n,
        n_params: depth * per_layer * n,
        rotations,
        meta: ProgramMeta { rule: t.name().to_string(), period: l, depth, extended },
    })
}

/// `blocks` blocks of depth `L` each.
pub fn compile_block(t: &Cqca, n: usize, blocks: usize) -> Result<RotationLayerProgram> {
    let l = t.period(n)?;
    compile_layers(t, n, blocks * l, false)
}

/// `blocks` extended blocks: per depth a θ layer then a γ layer, `2 L N` parameters per block.
pub fn compile_extended_block(t: &Cqca, n: usize, blocks: usize) -> Result<RotationLayerProgram> {
    let l = t.period(n)?;
    compile_layers(t, n, blocks * l, true)
}

/// Program for `D` iterations of the measurement-based loop; needs `D` to be a multiple of `L`.
pub fn theorem2_program(t: &Cqca, n: usize, depth: usize, extended: bool) -> Result<RotationLayerProgram> {
    let l = t.period(n)?;
    if depth % l != 0 {
        return Err(CaqcError::Precondition(format!("depth {depth} is not a multiple of the period {l}")));
    }
    compile_layers(t, n, depth, extended)
}

impl RotationLayerProgram {
    /// Applies every rotation in order to `state`.
    pub fn evaluate(&self, params: &[f64], state: &mut DenseState) -> Result<()> {
        if params.len() != self.n_params {
            return Err(CaqcError::Dimension { expected: self.n_params, actual: params.len() });
        }
        if state.n_qubits() != self.n_qubits {
            return Err(CaqcError::Dimension { expected: self.n_qubits, actual: state.n_qubits() });
        }
        for r in &self.rotations {
            state.apply_pauli_rotation(&r.generator, r.angle(params))?;
        }
        Ok(())
    }

    /// Same program with the listed rotations' signs negated.
    pub fn with_flipped(&self, flips: &BTreeSet<usize>) -> RotationLayerProgram {
        let mut out = self.clone();
        for &k in flips {
            out.rotations[k].sign = -out.rotations[k].sign;
        }
        out
    }

    /// Depths whose rotations do not pairwise commute.
    pub fn noncommuting_layers(&self) -> Vec<usize> {
        let mut bad = BTreeSet::new();
        for (a, ra) in self.rotations.iter().enumerate() {
            for rb in &self.rotations[a + 1..] {
                if ra.step == rb.step && ra.generator.anticommutes_unchecked(&rb.generator) {
                    bad.insert(ra.depth);
                }
            }
        }
        bad.into_iter().collect()
    }

    pub fn gate_set_report(&self) -> GateSetReport {
        let mut axes = BTreeSet::new();
        let mut entangling = Vec::new();
        for r in &self.rotations {
            if r.generator.weight() == 1 {
                let q = r.generator.support()[0];
                axes.insert((r.depth, r.kind, r.generator.letter(q)));
            } else if r.generator.weight() > 1 {
                entangling.push((r.depth, r.generator.clone()));
            }
        }
        let has_free_z = axes.iter().any(|&(_, _, l)| l == Letter::Z);
        GateSetReport {
            has_free_z,
            single_qubit_axes: axes.into_iter().collect(),
            entangling_generators: entangling,
            noncommuting_layers: self.noncommuting_layers(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n_qubits,
            "rule": self.meta.rule,
            "period": self.meta.period,
            "depth": self.meta.depth,
            "extended": self.meta.extended,
            "n_params": self.n_params,
            "rotations": self.rotations.iter().map(|r| serde_json::json!({
                "generator": r.generator.to_string(),
                "param_index": r.param,
                "sign": r.sign as i32,
                "depth": r.depth,
                "kind": r.kind,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Gates available in a program.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateSetReport {
    pub has_free_z: bool,
    /// `(depth, layer kind, axis)` of single-qubit generators.
    pub single_qubit_axes: Vec<(usize, RotationKind, Letter)>,
    pub entangling_generators: Vec<(usize, PauliProduct)>,
    pub noncommuting_layers: Vec<usize>,
}

impl GateSetReport {
    pub fn has_axis(&self, letter: Letter) -> bool {
        self.single_qubit_axes.iter().any(|&(_, _, l)| l == letter)
    }
}

/// Reference circuit for a program of `depth` layers: rotations `exp(i θ Z)` then a
/// dense `T` (or `θ`-layer, `T` then `H`, `γ`-layer, `H` when extended). Used to check
/// compiled programs against the circuits they stand for.
pub fn evaluate_circuit(t: &Cqca, n: usize, depth: usize, extended: bool, params: &[f64], state: &mut DenseState) -> Result<()> {
    let ring = t.ring_map(n)?;
    let h = CliffordTable::hadamard(n, &(0..n).collect::<Vec<_>>());
    let tp = ring.then(&h)?;
    let qubits: Vec<usize> = (0..n).collect();
    let per_layer = if extended { 2 } else { 1 };
    if params.len() != depth * per_layer * n {
        return Err(CaqcError::Dimension { expected: depth * per_layer * n, actual: params.len() });
    }
    for j in 0..depth {
        let base = j * per_layer * n;
        for i in 0..n {
            state.apply_pauli_rotation(&PauliProduct::z(n, i), params[base + i])?;
        }
        if extended {
            state.apply_clifford(&tp, &qubits)?;
            for i in 0..n {
                state.apply_pauli_rotation(&PauliProduct::z(n, i), params[base + n + i])?;
            }
            state.apply_clifford(&h, &qubits)?;
        } else {
            state.apply_clifford(&ring, &qubits)?;
        }
    }
    Ok(())
}
