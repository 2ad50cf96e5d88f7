//! Stabilizer groups with logical operator pairs, in the Heisenberg picture.

use rand::Rng;
use serde::Serialize;

use crate::clifford::CliffordMap;
use crate::error::{CaqcError, Result};
use crate::pauli::{Letter, PauliProduct};

/// Outcome of a Pauli measurement. `outcome = true` means eigenvalue -1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub observable: PauliProduct,
    pub outcome: bool,
    pub deterministic: bool,
    pub probability: f64,
}

/// Stabilizer generators plus paired logical representatives `(X̄_k, Z̄_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerCode {
    n: usize,
    stabilizers: Vec<PauliProduct>,
    logicals: Vec<(PauliProduct, PauliProduct)>,
}

fn bit(p: &PauliProduct, col: usize, n: usize) -> bool {
    if col < n {
        p.x_bit(col)
    } else {
        p.z_bit(col - n)
    }
}

/// Reduced row echelon form with pivot columns ordered X bits first, then Z bits,
/// qubit ascending. Rows are products of the inputs, so phases stay exact.
/// Returns `(rows, pivots, rest)` where `rest` holds the inputs that reduced to
/// identity letters (possibly with a phase).
fn rref(n: usize, gens: &[PauliProduct]) -> (Vec<PauliProduct>, Vec<usize>, Vec<PauliProduct>) {
    let mut rows: Vec<PauliProduct> = gens.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..2 * n {
        let Some(k) = (r..rows.len()).find(|&k| bit(&rows[k], col, n)) else {
            continue;
        };
        rows.swap(r, k);
        let piv = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && bit(row, col, n) {
                *row = row.mul_unchecked(&piv);
            }
        }
        pivots.push(col);
        r += 1;
    }
    let rest = rows.split_off(r);
    (rows, pivots, rest)
}

impl StabilizerCode {
    /// Builds and validates a code.
    pub fn new(n: usize, stabilizers: Vec<PauliProduct>, logicals: Vec<(PauliProduct, PauliProduct)>) -> Result<Self> {
        let code = StabilizerCode { n, stabilizers, logicals };
        code.check().map_err(CaqcError::InvalidCode)?;
        Ok(code)
    }

    /// Empty stabilizer group with `(X_q, Z_q)` as logicals: an arbitrary `n`-qubit input.
    pub fn unencoded(n: usize) -> Self {
        StabilizerCode {
            n,
            stabilizers: Vec::new(),
            logicals: (0..n).map(|q| (PauliProduct::x(n, q), PauliProduct::z(n, q))).collect(),
        }
    }

    /// Generators `X_v prod_{u in N(v)} Z_u`; vertices are 0-based.
    pub fn graph_state(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut stabs: Vec<PauliProduct> = (0..n).map(|v| PauliProduct::x(n, v)).collect();
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(CaqcError::Geometry(format!("edge ({}, {}) outside {n} vertices", a + 1, b + 1)));
            }
            if a == b {
                return Err(CaqcError::Geometry(format!("self loop on vertex {}", a + 1)));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(CaqcError::Geometry(format!("repeated edge ({}, {})", a + 1, b + 1)));
            }
            stabs[a].set_letter(b, Letter::Z);
            stabs[b].set_letter(a, Letter::Z);
        }
        Ok(StabilizerCode { n, stabilizers: stabs, logicals: Vec::new() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliProduct] {
        &self.stabilizers
    }

    pub fn logicals(&self) -> &[(PauliProduct, PauliProduct)] {
        &self.logicals
    }

    pub fn is_full_rank(&self) -> bool {
        self.stabilizers.len() == self.n
    }

    /// Description of the first violated invariant, if any.
    pub fn check(&self) -> std::result::Result<(), String> {
        let n = self.n;
        if self.stabilizers.len() + self.logicals.len() > n {
            return Err(format!(
                "{} stabilizers and {} logical pairs exceed {n} qubits",
                self.stabilizers.len(),
                self.logicals.len()
            ));
        }
        let all = self.stabilizers.iter().chain(self.logicals.iter().flat_map(|(a, b)| [a, b]));
        for p in all {
            if p.n_qubits() != n {
                return Err(format!("{p} has the wrong size"));
            }
            if !p.is_hermitian() {
                return Err(format!("{p} is not Hermitian"));
            }
        }
        for (i, a) in self.stabilizers.iter().enumerate() {
            for b in &self.stabilizers[i + 1..] {
                if a.anticommutes_unchecked(b) {
                    return Err(format!("stabilizers {a} and {b} anticommute"));
                }
            }
        }
        let (_, _, rest) = rref(n, &self.stabilizers);
        if let Some(r) = rest.first() {
            return Err(if r.is_identity() {
                "stabilizer generators are dependent".to_string()
            } else {
                "stabilizer group contains -I".to_string()
            });
        }
        for (k, (x, z)) in self.logicals.iter().enumerate() {
            if !x.anticommutes_unchecked(z) {
                return Err(format!("logical pair {} commutes: {x}, {z}", k + 1));
            }
            for s in &self.stabilizers {
                if x.anticommutes_unchecked(s) || z.anticommutes_unchecked(s) {
                    return Err(format!("logical pair {} anticommutes with stabilizer {s}", k + 1));
                }
            }
            for (x2, z2) in &self.logicals[k + 1..] {
                for (a, b) in [(x, x2), (x, z2), (z, x2), (z, z2)] {
                    if a.anticommutes_unchecked(b) {
                        return Err(format!("logicals {a} and {b} of different pairs anticommute"));
                    }
                }
            }
        }
        Ok(())
    }

    fn debug_check(&self) {
        debug_assert_eq!(self.check(), Ok(()));
    }

    /// Conjugates every generator and logical representative.
    pub fn conjugate(&self, map: &dyn CliffordMap) -> Result<Self> {
        if map.n_qubits() != self.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: map.n_qubits() });
        }
        let stabilizers = self.stabilizers.iter().map(|p| map.conjugate(p)).collect::<Result<_>>()?;
        let logicals = self
            .logicals
            .iter()
            .map(|(x, z)| Ok((map.conjugate(x)?, map.conjugate(z)?)))
            .collect::<Result<_>>()?;
        let out = StabilizerCode { n: self.n, stabilizers, logicals };
        out.debug_check();
        Ok(out)
    }

    /// Canonical generators: the reduced row echelon form.
    pub fn canonical_generators(&self) -> Vec<PauliProduct> {
        rref(self.n, &self.stabilizers).0
    }

    /// If `p` (up to sign) lies in the group, returns the group element with `p`'s letters.
    pub fn group_element(&self, p: &PauliProduct) -> Option<PauliProduct> {
        if p.n_qubits() != self.n {
            return None;
        }
        let n = self.n;
        let (rows, pivots, _) = rref(n, &self.stabilizers);
        let mut acc = PauliProduct::identity(n);
        for (row, &col) in rows.iter().zip(&pivots) {
            if bit(p, col, n) != bit(&acc, col, n) {
                acc = acc.mul_unchecked(row);
            }
        }
        acc.same_letters(p).then_some(acc)
    }

    /// `Some(false)` if `+p` is in the group, `Some(true)` if `-p` is, `None` otherwise.
    pub fn stabilizer_sign(&self, p: &PauliProduct) -> Option<bool> {
        let g = self.group_element(p)?;
        match (4 + g.phase_exp() - p.phase_exp()) % 4 {
            0 => Some(false),
            2 => Some(true),
            _ => None,
        }
    }

    pub fn contains(&self, p: &PauliProduct) -> bool {
        self.stabilizer_sign(p) == Some(false)
    }

    /// `a = s · b` for some `s` in the group, phases exact.
    pub fn equivalent(&self, a: &PauliProduct, b: &PauliProduct) -> bool {
        a.n_qubits() == b.n_qubits() && a.n_qubits() == self.n && self.contains(&a.mul_unchecked(b))
    }

    /// Group equality (stabilizers only), signs included.
    pub fn codes_equal(a: &StabilizerCode, b: &StabilizerCode) -> bool {
        a.n == b.n && a.canonical_generators() == b.canonical_generators()
    }

    /// Pauli measurement with the group-surgery update rule.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        obs: &PauliProduct,
        outcome: Option<bool>,
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        if obs.n_qubits() != self.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: obs.n_qubits() });
        }
        if !obs.is_hermitian() {
            return Err(CaqcError::NonHermitian(obs.to_string()));
        }
        if let Some(forced) = self.stabilizer_sign(obs) {
            if outcome.is_some_and(|m| m != forced) {
                return Err(CaqcError::ImpossibleOutcome { probability: 0.0 });
            }
            return Ok(MeasurementRecord { observable: obs.clone(), outcome: forced, deterministic: true, probability: 1.0 });
        }
        let m = outcome.unwrap_or_else(|| rng.gen::<bool>());
        let signed = if m { obs.negated() } else { obs.clone() };
        if let Some(k0) = self.stabilizers.iter().position(|s| s.anticommutes_unchecked(obs)) {
            let s0 = self.stabilizers[k0].clone();
            for (k, s) in self.stabilizers.iter_mut().enumerate() {
                if k != k0 && s.anticommutes_unchecked(obs) {
                    *s = s.mul_unchecked(&s0);
                }
            }
            for (x, z) in &mut self.logicals {
                for l in [x, z] {
                    if l.anticommutes_unchecked(obs) {
                        *l = l.mul_unchecked(&s0);
                    }
                }
            }
            self.stabilizers[k0] = signed;
        } else {
            // The observable commutes with the group; a logical may be consumed.
            let hit = self
                .logicals
                .iter()
                .position(|(x, z)| x.anticommutes_unchecked(obs) || z.anticommutes_unchecked(obs));
            if let Some(k) = hit {
                let (x, z) = self.logicals.remove(k);
                let c = if x.anticommutes_unchecked(obs) { x } else { z };
                for (x2, z2) in &mut self.logicals {
                    for l in [x2, z2] {
                        if l.anticommutes_unchecked(obs) {
                            *l = l.mul_unchecked(&c);
                        }
                    }
                }
            }
            self.stabilizers.push(signed);
        }
        self.debug_check();
        Ok(MeasurementRecord { observable: obs.clone(), outcome: m, deterministic: false, probability: 0.5 })
    }

    /// Removes qubits that sit in a single-qubit eigenstate of the group (e.g. after
    /// measurement). Stabilizers and logicals are first cleaned of those qubits by
    /// multiplying with the single-qubit stabilizer; the rest are relabeled in order.
    pub fn drop_qubits(&self, qubits: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut code = self.clone();
        for &q in qubits {
            if q >= n {
                return Err(CaqcError::Index { index: q, n });
            }
            let single = Letter::NON_IDENTITY
                .iter()
                .map(|&l| PauliProduct::single(n, q, l))
                .find_map(|p| code.group_element(&p))
                .ok_or_else(|| CaqcError::Precondition(format!("qubit {} is not in a product eigenstate", q + 1)))?;
            // Put `single` into the generating set in place of one generator it uses.
            let pos = code.replaceable_generator(&single);
            code.stabilizers[pos] = single.clone();
            let letter = single.letter(q);
            for (k, s) in code.stabilizers.iter_mut().enumerate() {
                if k != pos && s.letter(q) == letter {
                    *s = s.mul_unchecked(&single);
                }
            }
            for (x, z) in &mut code.logicals {
                for l in [x, z] {
                    if l.letter(q) == letter {
                        *l = l.mul_unchecked(&single);
                    }
                }
            }
            code.stabilizers.remove(pos);
        }
        let keep: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let restrict = |p: &PauliProduct| {
            let mut out = PauliProduct::identity(keep.len()).with_phase(p.phase_exp());
            for (k, &q) in keep.iter().enumerate() {
                out.set_letter(k, p.letter(q));
            }
            out
        };
        let stabilizers = code.stabilizers.iter().map(restrict).collect();
        let logicals = code.logicals.iter().map(|(x, z)| (restrict(x), restrict(z))).collect();
        StabilizerCode::new(keep.len(), stabilizers, logicals)
    }

    /// Index of a generator that appears in the decomposition of `p`.
    fn replaceable_generator(&self, p: &PauliProduct) -> usize {
        // Try removing each generator; the first whose removal breaks membership is used by `p`.
        for k in 0..self.stabilizers.len() {
            let mut rest = self.stabilizers.clone();
            rest.remove(k);
            let sub = StabilizerCode { n: self.n, stabilizers: rest, logicals: Vec::new() };
            if sub.group_element(p).is_none() {
                return k;
            }
        }
        unreachable!("element of the group not generated by its generators")
    }

    /// Logical representatives reduced to canonical form modulo the stabilizers.
    pub fn reduced_logicals(&self) -> Vec<(PauliProduct, PauliProduct)> {
        let (rows, pivots, _) = rref(self.n, &self.stabilizers);
        let reduce = |p: &PauliProduct| {
            let mut out = p.clone();
            for (row, &col) in rows.iter().zip(&pivots) {
                if bit(&out, col, self.n) {
                    out = out.mul_unchecked(row);
                }
            }
            out
        };
        self.logicals.iter().map(|(x, z)| (reduce(x), reduce(z))).collect()
    }

    /// One generator per line in text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for g in &self.stabilizers {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        for (k, (x, z)) in self.logicals.iter().enumerate() {
            s.push_str(&format!("# logical {}: X {x} | Z {z}\n", k + 1));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "stabilizers": self.stabilizers.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "logicals": self.logicals.iter().map(|(x, z)| serde_json::json!({"x": x.to_string(), "z": z.to_string()})).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliProduct {
        s.parse().unwrap()
    }

    #[test]
    fn single_edge_graph() {
        let c = StabilizerCode::graph_state(2, &[(0, 1)]).unwrap();
        assert_eq!(c.stabilizers(), &[p("+X1 Z2 @N=2"), p("+Z1 X2 @N=2")]);
        let empty = StabilizerCode::graph_state(3, &[]).unwrap();
        assert!(empty.stabilizers().iter().enumerate().all(|(q, s)| *s == PauliProduct::x(3, q)));
        assert!(StabilizerCode::graph_state(2, &[(0, 0)]).is_err());
        assert!(StabilizerCode::graph_state(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn codes_equal_up_to_generator_choice() {
        let a = StabilizerCode::new(2, vec![p("+X1 Z2 @N=2"), p("+Z1 X2 @N=2")], vec![]).unwrap();
        let y = p("+X1 Z2 @N=2").multiply(&p("+Z1 X2 @N=2")).unwrap();
        assert_eq!(y, p("+Y1 Y2 @N=2"));
        let b = StabilizerCode::new(2, vec![p("+X1 Z2 @N=2"), y], vec![]).unwrap();
        assert!(StabilizerCode::codes_equal(&a, &b));
        let plus = StabilizerCode::new(1, vec![p("+X1 @N=1")], vec![]).unwrap();
        let minus = StabilizerCode::new(1, vec![p("-X1 @N=1")], vec![]).unwrap();
        assert!(!StabilizerCode::codes_equal(&plus, &minus));
    }

    #[test]
    fn invalid_codes_rejected() {
        assert!(StabilizerCode::new(1, vec![p("+X1 @N=1"), p("+Z1 @N=1")], vec![]).is_err());
        assert!(StabilizerCode::new(2, vec![p("+X1 @N=2"), p("+X1 @N=2")], vec![]).is_err());
        assert!(StabilizerCode::new(2, vec![p("+Z1 Z2 @N=2"), p("-Z1 Z2 @N=2")], vec![]).is_err());
    }

    #[test]
    fn teleportation_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let input = StabilizerCode::new(2, vec![p("+X2 @N=2")], vec![(p("+X1 @N=2"), p("+Z1 @N=2"))]).unwrap();
        let enc = input.conjugate(&CliffordTable::cz(2, &[(0, 1)])).unwrap();
        assert_eq!(enc.stabilizers(), &[p("+Z1 X2 @N=2")]);
        assert_eq!(enc.logicals(), &[(p("+X1 Z2 @N=2"), p("+Z1 @N=2"))]);
        let mut m = enc.clone();
        let rec = m.measure_pauli(&p("+X1 @N=2"), Some(false), &mut rng).unwrap();
        assert!(!rec.deterministic);
        assert_eq!(m.stabilizers(), &[p("+X1 @N=2")]);
        let (x, z) = &m.logicals()[0];
        assert!(m.equivalent(x, &p("+Z2 @N=2")));
        assert!(m.equivalent(z, &p("+X2 @N=2")));
        let out = m.drop_qubits(&[0]).unwrap();
        assert_eq!(out.logicals(), &[(p("+Z1 @N=1"), p("+X1 @N=1"))]);
    }

    #[test]
    fn measuring_a_stabilizer_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = StabilizerCode::graph_state(3, &[(0, 1), (1, 2)]).unwrap();
        let before = c.clone();
        let rec = c.measure_pauli(&p("+X1 Z2 @N=3"), None, &mut rng).unwrap();
        assert!(rec.deterministic && !rec.outcome);
        assert_eq!(c, before);
        let rec = c.measure_pauli(&p("-X1 Z2 @N=3"), None, &mut rng).unwrap();
        assert!(rec.outcome);
        assert!(c.measure_pauli(&p("+X1 Z2 @N=3"), Some(true), &mut rng).is_err());
    }

    #[test]
    fn measuring_a_logical_consumes_the_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = StabilizerCode::unencoded(2);
        c.measure_pauli(&p("+X1 X2 @N=2"), Some(true), &mut rng).unwrap();
        assert_eq!(c.stabilizers(), &[p("-X1 X2 @N=2")]);
        assert_eq!(c.logicals().len(), 1);
        assert_eq!(c.check(), Ok(()));
    }

    #[test]
    fn signs_of_group_elements() {
        let c = StabilizerCode::new(2, vec![p("+X1 X2 @N=2"), p("-Z1 Z2 @N=2")], vec![]).unwrap();
        assert_eq!(c.stabilizer_sign(&p("+Y1 Y2 @N=2")), Some(false));
        assert_eq!(c.stabilizer_sign(&p("+Z1 Z2 @N=2")), Some(true));
        assert_eq!(c.stabilizer_sign(&p("+Z1 @N=2")), None);
    }
}
