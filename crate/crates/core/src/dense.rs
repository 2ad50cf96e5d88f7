//! Statevector oracle for small registers.
//!
//! Basis ordering is little-endian: qubit `q` is bit `q` of the basis index.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;

use crate::clifford::CliffordMap;
use crate::error::{CaqcError, Result};
use crate::pauli::PauliProduct;

/// Largest register the oracle accepts.
pub const MAX_QUBITS: usize = 24;

const DUMP_MAGIC: &[u8; 4] = b"CQSV";

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Elementary gates understood by [`DenseState::apply_gate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Cz(usize, usize),
    SqrtX(usize),
    Pauli(PauliProduct),
}

/// A Pauli word in the form used by the kernels: `coef * X^x Z^z`.
#[derive(Clone, Copy, Debug)]
struct Kernel {
    x: usize,
    z: usize,
    coef: Complex64,
}

impl Kernel {
    fn of(p: &PauliProduct) -> Kernel {
        let x = p.x_mask() as usize;
        let z = p.z_mask() as usize;
        // Each Y letter is i X Z.
        let ny = (x & z).count_ones() as u8;
        Kernel { x, z, coef: i_pow(p.phase_exp() + ny) }
    }

    /// Amplitude factor picked up by `|b>` when mapped to `|b ^ x>`.
    #[inline]
    fn factor(&self, b: usize) -> Complex64 {
        if (self.z & b).count_ones() & 1 == 1 {
            -self.coef
        } else {
            self.coef
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_cap(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(CaqcError::Cap { n, cap: MAX_QUBITS });
    }
    Ok(())
}

impl DenseState {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        check_cap(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    /// `|+>^n`.
    pub fn plus(n: usize) -> Result<Self> {
        check_cap(n)?;
        let a = (1.0 / (1u64 << n) as f64).sqrt();
        Ok(DenseState { n, amps: vec![Complex64::new(a, 0.0); 1 << n] })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return Err(CaqcError::Index { index, n: s.amps.len() });
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(CaqcError::Dimension { expected: len.next_power_of_two(), actual: len });
        }
        let n = len.trailing_zeros() as usize;
        check_cap(n)?;
        let mut s = DenseState { n, amps };
        let norm = s.norm();
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(CaqcError::NonFinite("state with zero or non-finite norm".into()));
        }
        s.scale(1.0 / norm);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    fn renormalize(&mut self) {
        let norm = self.norm();
        self.scale(1.0 / norm);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(CaqcError::Index { index: q, n: self.n });
        }
        Ok(())
    }

    fn check_word(&self, p: &PauliProduct) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: p.n_qubits() });
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1 << q;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                self.amps[b] = (a0 + a1) * h;
                self.amps[b | bit] = (a0 - a1) * h;
            }
        }
        Ok(())
    }

    pub fn apply_s(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1 << q;
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & bit != 0 {
                *a *= I;
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(CaqcError::Precondition("CZ needs two distinct qubits".into()));
        }
        let mask = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// `sqrt(X) = H S H`.
    pub fn apply_sqrt_x(&mut self, q: usize) -> Result<()> {
        self.apply_h(q)?;
        self.apply_s(q)?;
        self.apply_h(q)
    }

    /// Applies the operator `p`, phase included.
    pub fn apply_pauli(&mut self, p: &PauliProduct) -> Result<()> {
        self.check_word(p)?;
        let k = Kernel::of(p);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            out[b ^ k.x] = k.factor(b) * a;
        }
        self.amps = out;
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        match g {
            Gate::H(q) => self.apply_h(*q),
            Gate::S(q) => self.apply_s(*q),
            Gate::Cz(a, b) => self.apply_cz(*a, *b),
            Gate::SqrtX(q) => self.apply_sqrt_x(*q),
            Gate::Pauli(p) => self.apply_pauli(p),
        }
    }

    /// `exp(i theta G) = cos(theta) I + i sin(theta) G` for Hermitian `G`.
    pub fn apply_pauli_rotation(&mut self, g: &PauliProduct, theta: f64) -> Result<()> {
        self.check_word(g)?;
        if !g.is_hermitian() {
            return Err(CaqcError::NonHermitian(g.to_string()));
        }
        let k = Kernel::of(g);
        let (c, s) = (theta.cos(), theta.sin());
        let is = I * s;
        if k.x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= c + is * k.factor(b);
            }
            return Ok(());
        }
        let hi = 1usize << (usize::BITS - 1 - k.x.leading_zeros());
        for b in 0..self.amps.len() {
            if b & hi == 0 {
                let b2 = b ^ k.x;
                let (a, a2) = (self.amps[b], self.amps[b2]);
                self.amps[b] = a * c + is * k.factor(b2) * a2;
                self.amps[b2] = a2 * c + is * k.factor(b) * a;
            }
        }
        Ok(())
    }

    /// `<psi|G|psi>` without the Hermiticity check.
    fn raw_expectation(&self, g: &PauliProduct) -> Complex64 {
        let k = Kernel::of(g);
        self.amps.iter().enumerate().map(|(b, a)| self.amps[b ^ k.x].conj() * k.factor(b) * a).sum()
    }

    pub fn expectation(&self, obs: &PauliProduct) -> Result<f64> {
        self.check_word(obs)?;
        if !obs.is_hermitian() {
            return Err(CaqcError::NonHermitian(obs.to_string()));
        }
        let e = self.raw_expectation(obs);
        debug_assert!(e.im.abs() < 1e-10, "imaginary expectation {e}");
        Ok(e.re)
    }

    /// `<self|G|other>` for a Pauli word `G`, phase included.
    pub fn matrix_element(&self, g: &PauliProduct, other: &DenseState) -> Result<Complex64> {
        self.check_word(g)?;
        other.check_word(g)?;
        let k = Kernel::of(g);
        Ok(other.amps.iter().enumerate().map(|(b, a)| self.amps[b ^ k.x].conj() * k.factor(b) * a).sum())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Projective measurement of `obs`; outcome bit 1 means eigenvalue -1.
    /// Returns the outcome and its probability before the measurement.
    pub fn measure_projective<R: Rng + ?Sized>(
        &mut self,
        obs: &PauliProduct,
        outcome: Option<bool>,
        rng: &mut R,
    ) -> Result<(bool, f64)> {
        let p_minus = (1.0 - self.expectation(obs)?) / 2.0;
        let m = match outcome {
            Some(m) => m,
            None => rng.gen::<f64>() < p_minus,
        };
        let prob = if m { p_minus } else { 1.0 - p_minus };
        if prob < 1e-12 {
            return Err(CaqcError::ImpossibleOutcome { probability: prob.max(0.0) });
        }
        let mut o = self.clone();
        o.apply_pauli(obs)?;
        let sign = if m { -1.0 } else { 1.0 };
        for (a, b) in self.amps.iter_mut().zip(&o.amps) {
            *a = (*a + b * sign) * 0.5;
        }
        self.renormalize();
        Ok((m, prob))
    }

    /// `self ⊗ |+>^k`, the new qubits taking indices `n..n+k`.
    pub fn append_plus(&self, k: usize) -> Result<DenseState> {
        check_cap(self.n + k)?;
        let f = (1.0 / (1u64 << k) as f64).sqrt();
        let mut amps = Vec::with_capacity(self.amps.len() << k);
        for _ in 0..(1usize << k) {
            amps.extend(self.amps.iter().map(|a| a * f));
        }
        Ok(DenseState { n: self.n + k, amps })
    }

    /// Tensor product `self ⊗ other`, `other` on the high qubits.
    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        check_cap(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for b in &other.amps {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        Ok(DenseState { n: self.n + other.n, amps })
    }

    /// Contracts each listed qubit with the bra `<+|` (bit 0) or `<-|` (bit 1) and
    /// renormalizes. Remaining qubits keep their relative order.
    pub fn discard_x_qubits(&self, qubits: &[usize], outcomes: &[bool]) -> Result<DenseState> {
        if qubits.len() != outcomes.len() {
            return Err(CaqcError::Dimension { expected: qubits.len(), actual: outcomes.len() });
        }
        let mut drop_mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            drop_mask |= 1 << q;
        }
        let keep: Vec<usize> = (0..self.n).filter(|q| drop_mask >> q & 1 == 0).collect();
        let mut minus_mask = 0usize;
        for (&q, &m) in qubits.iter().zip(outcomes) {
            if m {
                minus_mask |= 1 << q;
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << keep.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let mut idx = 0;
            for (k, &q) in keep.iter().enumerate() {
                idx |= (b >> q & 1) << k;
            }
            let sign = if (b & minus_mask).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            amps[idx] += a * sign;
        }
        DenseState::from_amplitudes(amps)
    }

    /// Contracts qubit `q` with the row vector `bra` (its two entries act on `|0>` and `|1>`).
    /// Returns the renormalized remaining state and the squared norm of the contraction.
    pub fn contract_qubit(&self, q: usize, bra: [Complex64; 2]) -> Result<(DenseState, f64)> {
        self.check_qubit(q)?;
        let low = (1usize << q) - 1;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() / 2];
        for (b, a) in self.amps.iter().enumerate() {
            let idx = (b & low) | ((b >> (q + 1)) << q);
            amps[idx] += bra[b >> q & 1] * a;
        }
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p < 1e-24 {
            return Err(CaqcError::ImpossibleOutcome { probability: p });
        }
        let f = 1.0 / p.sqrt();
        for a in &mut amps {
            *a *= f;
        }
        Ok((DenseState { n: self.n - 1, amps }, p))
    }

    /// Applies a `2^k x 2^k` row-major matrix to the listed qubits (first listed is the low bit).
    pub fn apply_matrix(&mut self, qubits: &[usize], m: &[Complex64]) -> Result<()> {
        let k = qubits.len();
        let dim = 1usize << k;
        if m.len() != dim * dim {
            return Err(CaqcError::Dimension { expected: dim * dim, actual: m.len() });
        }
        let mut mask = 0usize;
        for &q in qubits {
            self.check_qubit(q)?;
            mask |= 1 << q;
        }
        if mask.count_ones() as usize != k {
            return Err(CaqcError::Precondition("repeated qubit in gate".into()));
        }
        let offsets: Vec<usize> = (0..dim)
            .map(|l| qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((l >> j & 1) << q)))
            .collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                buf[l] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &m[r * dim..(r + 1) * dim];
                self.amps[base | off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
        Ok(())
    }

    /// Applies a unitary realizing `map` (up to a global phase) on the listed qubits.
    pub fn apply_clifford(&mut self, map: &dyn CliffordMap, qubits: &[usize]) -> Result<()> {
        if map.n_qubits() != qubits.len() {
            return Err(CaqcError::Dimension { expected: qubits.len(), actual: map.n_qubits() });
        }
        let m = clifford_matrix(map)?;
        self.apply_matrix(qubits, &m)
    }

    /// Binary dump: `CQSV`, `u32` n, then interleaved `f64` re/im, all little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(CaqcError::Format("bad state dump magic".into()));
        }
        let mut nb = [0u8; 4];
        r.read_exact(&mut nb)?;
        let n = u32::from_le_bytes(nb) as usize;
        check_cap(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        let mut f = [0u8; 8];
        for _ in 0..(1usize << n) {
            r.read_exact(&mut f)?;
            let re = f64::from_le_bytes(f);
            r.read_exact(&mut f)?;
            amps.push(Complex64::new(re, f64::from_le_bytes(f)));
        }
        Ok(DenseState { n, amps })
    }
}

/// Dense matrix (row-major) of a unitary `U` with `U X_q U† = map(X_q)` and
/// `U Z_q U† = map(Z_q)`, fixed up to a global phase.
///
/// Column `b` is `prod_q map(X_q)^{b_q} |phi0>`, where `|phi0>` spans the joint
/// +1 eigenspace of all `map(Z_q)`.
pub fn clifford_matrix(map: &dyn CliffordMap) -> Result<Vec<Complex64>> {
    let n = map.n_qubits();
    if n > 12 {
        return Err(CaqcError::Cap { n, cap: 12 });
    }
    let dim = 1usize << n;
    let project = |s: &mut DenseState| -> Result<f64> {
        for q in 0..n {
            let mut o = s.clone();
            o.apply_pauli(map.image_z(q))?;
            for (a, b) in s.amps.iter_mut().zip(&o.amps) {
                *a = (*a + b) * 0.5;
            }
        }
        Ok(s.norm())
    };
    let mut phi0 = None;
    for b in 0..dim {
        let mut s = DenseState::basis(n, b)?;
        if project(&mut s)? > 1e-6 {
            s.renormalize();
            phi0 = Some(s);
            break;
        }
    }
    let phi0 = phi0.ok_or_else(|| CaqcError::Validation("images of Z do not fix a common state".into()))?;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for b in 0..dim {
        let mut col = phi0.clone();
        for q in 0..n {
            if b >> q & 1 == 1 {
                col.apply_pauli(map.image_x(q))?;
            }
        }
        for r in 0..dim {
            m[r * dim + b] = col.amps[r];
        }
    }
    Ok(m)
}
