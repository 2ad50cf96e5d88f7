//! Phased Pauli products on a ring of qubits.
//!
//! A [`PauliProduct`] stores the operator `i^phase * σ_1 ⊗ ... ⊗ σ_n` where every
//! `σ_q` is one of `I, X, Y, Z`. The letter `σ_q` is encoded by the two bits
//! `(x_q, z_q)`: `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `Y = (1,1)` with the
//! convention `Y = iXZ`. Under this convention an operator is Hermitian exactly
//! when its phase exponent is even.
//!
//! Qubits are 0-based internally; the text and JSON forms are 1-based.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CaqcError, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Phased n-qubit Pauli word stored as packed x/z bit masks.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "PauliJson", try_from = "PauliJson")]
pub struct PauliProduct {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliProduct {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliProduct { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    pub fn single(n: usize, qubit: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(qubit, letter);
        p
    }

    pub fn x(n: usize, qubit: usize) -> Self {
        Self::single(n, qubit, Letter::X)
    }

    pub fn y(n: usize, qubit: usize) -> Self {
        Self::single(n, qubit, Letter::Y)
    }

    pub fn z(n: usize, qubit: usize) -> Self {
        Self::single(n, qubit, Letter::Z)
    }

    /// Builds a word from `(qubit, letter)` pairs. Later entries overwrite earlier ones.
    pub fn from_letters(n: usize, letters: &[(usize, Letter)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            p.set_letter(q, l);
        }
        p
    }

    /// Builds a word from a string of letters such as `"XZIY"` (qubit 0 first).
    pub fn from_dense_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        let mut p = Self::identity(n);
        for (q, c) in s.chars().enumerate() {
            let l = Letter::from_char(c).ok_or_else(|| CaqcError::Parse(format!("bad letter {c:?}")))?;
            p.set_letter(q, l);
        }
        Ok(p)
    }

    /// Builds a word from raw masks (only valid for `n <= 64`).
    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Self {
        assert!(n <= WORD, "from_masks supports at most 64 qubits");
        let keep = if n == WORD { u64::MAX } else { (1u64 << n) - 1 };
        let mut p = Self::identity(n);
        if n > 0 {
            p.x[0] = x & keep;
            p.z[0] = z & keep;
        }
        p.phase = phase & 3;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Phase exponent `k` of the overall factor `i^k` in letter form.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase = (p.phase + 2) & 3;
        p
    }

    /// Same letters with phase exponent 0.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the letter on qubit `q`; the letter-form phase is untouched.
    pub fn set_letter(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = letter.bits();
        let mask = 1u64 << (q % WORD);
        let w = q / WORD;
        if xb {
            self.x[w] |= mask;
        } else {
            self.x[w] &= !mask;
        }
        if zb {
            self.z[w] |= mask;
        } else {
            self.z[w] &= !mask;
        }
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// First word of the x mask; convenient for `n <= 64`.
    pub fn x_mask(&self) -> u64 {
        self.x.first().copied().unwrap_or(0)
    }

    pub fn z_mask(&self) -> u64 {
        self.z.first().copied().unwrap_or(0)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones()).sum()
    }

    /// Non-identity sites in ascending order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    /// True when all letters are `I` (any phase).
    pub fn is_identity_letters(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True for the group identity `+I`.
    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_identity_letters()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Same letters, ignoring phase.
    pub fn same_letters(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: other.n });
        }
        Ok(())
    }

    /// Group product `self · other` with exact phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Product without the dimension check; both words must have the same `n`.
    pub fn mul_unchecked(&self, other: &Self) -> Self {
        // X^a Z^b form: P = i^(phase + |x&z|) X^x Z^z, and Z^z1 X^x2 = (-1)^|z1&x2| X^x2 Z^z1.
        let mut cross = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            cross += (self.z[i] & other.x[i]).count_ones();
            x.push(self.x[i] ^ other.x[i]);
            z.push(self.z[i] ^ other.z[i]);
        }
        let mut out = PauliProduct { n: self.n, x, z, phase: 0 };
        let e = self.phase as i64 + self.y_count() as i64 + other.phase as i64 + other.y_count() as i64
            + 2 * cross as i64
            - out.y_count() as i64;
        out.phase = e.rem_euclid(4) as u8;
        out
    }

    /// In-place right multiplication `self <- self · other`.
    pub fn mul_assign_right(&mut self, other: &Self) -> Result<()> {
        *self = self.multiply(other)?;
        Ok(())
    }

    /// Symplectic product parity: `true` when the two words anticommute.
    pub fn anticommutes_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc += (self.x[i] & other.z[i]).count_ones() + (self.z[i] & other.x[i]).count_ones();
        }
        acc % 2 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_dims(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// Cyclic rotation of the ring: the letter on qubit `q` moves to `q + shift (mod n)`.
    pub fn translate(&self, shift: i64) -> Self {
        let n = self.n;
        let mut out = Self::identity(n);
        out.phase = self.phase;
        if n == 0 {
            return out;
        }
        let s = shift.rem_euclid(n as i64) as usize;
        for q in self.support() {
            out.set_letter((q + s) % n, self.letter(q));
        }
        out
    }

    /// Places this word on qubits `offset..offset+self.n` of a larger register.
    pub fn embed(&self, total: usize, offset: usize) -> Self {
        assert!(offset + self.n <= total);
        let mut out = Self::identity(total);
        out.phase = self.phase;
        for q in self.support() {
            out.set_letter(offset + q, self.letter(q));
        }
        out
    }

    /// Places qubit `q` of this word on qubit `map[q]` of a register of `total` qubits.
    pub fn remap(&self, total: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        let mut out = Self::identity(total);
        out.phase = self.phase;
        for q in self.support() {
            out.set_letter(map[q], self.letter(q));
        }
        out
    }

    /// Restriction to qubits `start..start+len`, keeping the phase.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        let mut out = Self::identity(len);
        out.phase = self.phase;
        for q in 0..len {
            out.set_letter(q, self.letter(start + q));
        }
        out
    }

    /// Letters as a string, qubit 0 first.
    pub fn letters_string(&self) -> String {
        (0..self.n).map(|q| self.letter(q).as_char()).collect()
    }

    fn phase_prefix(&self) -> &'static str {
        match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl fmt::Debug for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `+X1 Z2 X3 @N=5`; identity renders as `+I @N=5`.
impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<String> = self
            .support()
            .into_iter()
            .map(|q| format!("{}{}", self.letter(q), q + 1))
            .collect();
        let body = if ops.is_empty() { "I".to_string() } else { ops.join(" ") };
        write!(f, "{}{} @N={}", self.phase_prefix(), body, self.n)
    }
}

impl FromStr for PauliProduct {
    type Err = CaqcError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| CaqcError::Parse(format!("{msg} in {s:?}"));
        let mut tokens: Vec<&str> = s.split_whitespace().collect();
        let last = tokens.pop().ok_or_else(|| bad("empty input"))?;
        let n: usize = last
            .strip_prefix("@N=")
            .ok_or_else(|| bad("missing @N= suffix"))?
            .parse()
            .map_err(|_| bad("bad qubit count"))?;
        if tokens.is_empty() {
            return Err(bad("missing operators"));
        }
        let first = tokens[0];
        let (phase, rest) = if let Some(r) = first.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = first.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = first.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = first.strip_prefix('-') {
            (2, r)
        } else {
            return Err(bad("missing sign"));
        };
        tokens[0] = rest;
        let mut p = PauliProduct::identity(n).with_phase(phase);
        if tokens.len() == 1 && tokens[0] == "I" {
            return Ok(p);
        }
        let mut seen = vec![false; n];
        for tok in tokens {
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .and_then(Letter::from_char)
                .filter(|l| *l != Letter::I)
                .ok_or_else(|| bad("bad letter"))?;
            let idx: usize = chars.as_str().parse().map_err(|_| bad("bad qubit index"))?;
            if idx == 0 || idx > n {
                return Err(bad("qubit index out of range"));
            }
            if seen[idx - 1] {
                return Err(bad("repeated qubit"));
            }
            seen[idx - 1] = true;
            p.set_letter(idx - 1, letter);
        }
        Ok(p)
    }
}

/// JSON form `{"n":5,"phase":0,"ops":{"1":"X","2":"Z","3":"X"}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PauliJson {
    pub n: usize,
    pub phase: u8,
    pub ops: BTreeMap<String, Letter>,
}

impl From<PauliProduct> for PauliJson {
    fn from(p: PauliProduct) -> Self {
        let ops = p.support().into_iter().map(|q| ((q + 1).to_string(), p.letter(q))).collect();
        PauliJson { n: p.n, phase: p.phase, ops }
    }
}

impl TryFrom<PauliJson> for PauliProduct {
    type Error = CaqcError;

    fn try_from(j: PauliJson) -> Result<Self> {
        if j.phase > 3 {
            return Err(CaqcError::Parse(format!("phase {} not in 0..4", j.phase)));
        }
        let mut p = PauliProduct::identity(j.n).with_phase(j.phase);
        for (k, l) in j.ops {
            let idx: usize = k.parse().map_err(|_| CaqcError::Parse(format!("bad qubit key {k:?}")))?;
            if idx == 0 || idx > j.n {
                return Err(CaqcError::Parse(format!("qubit {idx} out of range")));
            }
            p.set_letter(idx - 1, l);
        }
        Ok(p)
    }
}

impl std::ops::Mul for &PauliProduct {
    type Output = PauliProduct;

    /// Panics on dimension mismatch; use [`PauliProduct::multiply`] for a fallible product.
    fn mul(self, rhs: &PauliProduct) -> PauliProduct {
        self.multiply(rhs).expect("Pauli dimension mismatch")
    }
}

/// Translation-invariant local image such as `X_{-1} Z_0 X_{+1}`.
///
/// Letters are keyed by their offset from the anchor site. Identity letters are
/// never stored, so the radius is always tight.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LocalPauliPattern {
    letters: BTreeMap<i64, Letter>,
    phase: u8,
}

impl LocalPauliPattern {
    pub fn new(letters: impl IntoIterator<Item = (i64, Letter)>, phase: u8) -> Self {
        let letters = letters.into_iter().filter(|(_, l)| *l != Letter::I).collect();
        LocalPauliPattern { letters, phase: phase & 3 }
    }

    pub fn single(letter: Letter) -> Self {
        Self::new([(0, letter)], 0)
    }

    pub fn letters(&self) -> &BTreeMap<i64, Letter> {
        &self.letters
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn radius(&self) -> usize {
        self.letters.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_at(&self, offset: i64) -> Letter {
        self.letters.get(&offset).copied().unwrap_or(Letter::I)
    }

    /// Offsets whose letter has an X component (X or Y).
    pub fn x_support(&self) -> Vec<i64> {
        self.letters.iter().filter(|(_, l)| l.bits().0).map(|(k, _)| *k).collect()
    }

    /// Offsets whose letter has a Z component (Z or Y).
    pub fn z_support(&self) -> Vec<i64> {
        self.letters.iter().filter(|(_, l)| l.bits().1).map(|(k, _)| *k).collect()
    }

    /// Support set is symmetric under `offset -> -offset`.
    pub fn has_symmetric_support(&self) -> bool {
        self.letters.keys().all(|k| self.letters.contains_key(&-k))
    }

    /// Places the pattern around `site` on a ring of `n` qubits.
    ///
    /// On rings with `n < 2r + 1` the pattern wraps onto itself; overlapping
    /// letters are multiplied in ascending offset order with exact phase.
    pub fn instantiate(&self, site: i64, n: usize) -> Result<PauliProduct> {
        if n == 0 {
            return Err(CaqcError::Geometry("ring of zero qubits".into()));
        }
        let mut p = PauliProduct::identity(n).with_phase(self.phase);
        if n > 2 * self.radius() {
            for (&k, &l) in &self.letters {
                p.set_letter((site + k).rem_euclid(n as i64) as usize, l);
            }
            return Ok(p);
        }
        for (&k, &l) in &self.letters {
            let q = (site + k).rem_euclid(n as i64) as usize;
            p = p.mul_unchecked(&PauliProduct::single(n, q, l));
        }
        Ok(p)
    }

    /// Reads a pattern off a ring word, anchored at `site`, using offsets in `[-(n-1)/2, n/2]`.
    pub fn from_product(p: &PauliProduct, site: usize) -> Self {
        let n = p.n_qubits() as i64;
        let letters = p.support().into_iter().map(|q| {
            let mut k = (q as i64 - site as i64).rem_euclid(n);
            if k > n / 2 {
                k -= n;
            }
            (k, p.letter(q))
        });
        Self::new(letters, p.phase_exp())
    }
}

impl fmt::Display for LocalPauliPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        let body: Vec<String> = self.letters.iter().map(|(k, l)| format!("{l}[{k}]")).collect();
        if body.is_empty() {
            write!(f, "{sign}I")
        } else {
            write!(f, "{sign}{}", body.join(" "))
        }
    }
}

/// JSON form of a pattern: `{"phase":0,"letters":{"-1":"X","0":"Z","1":"X"}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternJson {
    #[serde(default)]
    pub phase: u8,
    pub letters: BTreeMap<String, Letter>,
}

impl From<&LocalPauliPattern> for PatternJson {
    fn from(p: &LocalPauliPattern) -> Self {
        PatternJson {
            phase: p.phase,
            letters: p.letters.iter().map(|(k, l)| (k.to_string(), *l)).collect(),
        }
    }
}

impl TryFrom<PatternJson> for LocalPauliPattern {
    type Error = CaqcError;

    fn try_from(j: PatternJson) -> Result<Self> {
        if j.phase > 3 {
            return Err(CaqcError::Parse(format!("phase {} not in 0..4", j.phase)));
        }
        let mut letters = Vec::new();
        for (k, l) in j.letters {
            let off: i64 = k.parse().map_err(|_| CaqcError::Parse(format!("bad offset {k:?}")))?;
            letters.push((off, l));
        }
        Ok(LocalPauliPattern::new(letters, j.phase))
    }
}
