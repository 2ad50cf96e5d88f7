//! Clifford quantum cellular automata on a ring.
//!
//! A [`Cqca`] is given by its local transition rule: the images of `X_0` and
//! `Z_0` as [`LocalPauliPattern`]s. Every other image follows by translation,
//! and `T(Y) = i T(X) T(Z)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordMap, CliffordTable};
use crate::error::{CaqcError, Result};
use crate::pauli::{Letter, LocalPauliPattern, PatternJson, PauliProduct};

/// Default multiple of `n` searched by [`Cqca::period`].
pub const DEFAULT_PERIOD_FACTOR: usize = 4;
/// Default pattern-level period cap used by [`Cqca::classify`].
pub const DEFAULT_PERIOD_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    X,
    Z,
}

impl Which {
    fn letter(self) -> Letter {
        match self {
            Which::X => Letter::X,
            Which::Z => Letter::Z,
        }
    }
}

/// Local transition rule of a translation-invariant Clifford map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cqca {
    name: String,
    x_image: LocalPauliPattern,
    z_image: LocalPauliPattern,
}

/// Names accepted by [`Cqca::builtin`].
pub const BUILTIN_RULES: [&str; 5] = ["cluster", "periodic-cluster", "fractal-cluster", "hadamard", "identity"];

impl Cqca {
    pub fn new(name: impl Into<String>, x_image: LocalPauliPattern, z_image: LocalPauliPattern) -> Self {
        Cqca { name: name.into(), x_image, z_image }
    }

    /// `X -> X_{-1} Z_0 X_{+1}`, `Z -> X_0`.
    pub fn cluster() -> Self {
        Self::new(
            "cluster",
            LocalPauliPattern::new([(-1, Letter::X), (0, Letter::Z), (1, Letter::X)], 0),
            LocalPauliPattern::single(Letter::X),
        )
    }

    /// `X -> Z_{-1} X_0 Z_{+1}`, `Z -> Z_0`.
    pub fn periodic_cluster() -> Self {
        Self::new(
            "periodic-cluster",
            LocalPauliPattern::new([(-1, Letter::Z), (0, Letter::X), (1, Letter::Z)], 0),
            LocalPauliPattern::single(Letter::Z),
        )
    }

    /// `X -> X_{-1} Z_0 X_{+1}`, `Z -> X_{-1} Y_0 X_{+1}`.
    pub fn fractal_cluster() -> Self {
        Self::new(
            "fractal-cluster",
            LocalPauliPattern::new([(-1, Letter::X), (0, Letter::Z), (1, Letter::X)], 0),
            LocalPauliPattern::new([(-1, Letter::X), (0, Letter::Y), (1, Letter::X)], 0),
        )
    }

    /// Hadamard on every qubit: `X <-> Z`.
    pub fn hadamard() -> Self {
        Self::new("hadamard", LocalPauliPattern::single(Letter::Z), LocalPauliPattern::single(Letter::X))
    }

    pub fn identity() -> Self {
        Self::new("identity", LocalPauliPattern::single(Letter::X), LocalPauliPattern::single(Letter::Z))
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "cluster" => Some(Self::cluster()),
            "periodic-cluster" => Some(Self::periodic_cluster()),
            "fractal-cluster" => Some(Self::fractal_cluster()),
            "hadamard" => Some(Self::hadamard()),
            "identity" => Some(Self::identity()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x_image(&self) -> &LocalPauliPattern {
        &self.x_image
    }

    pub fn z_image(&self) -> &LocalPauliPattern {
        &self.z_image
    }

    pub fn image(&self, which: Which) -> &LocalPauliPattern {
        match which {
            Which::X => &self.x_image,
            Which::Z => &self.z_image,
        }
    }

    pub fn radius(&self) -> usize {
        self.x_image.radius().max(self.z_image.radius())
    }

    /// The rule of the map "apply `self`, then `next`", i.e. `P -> next(self(P))`.
    pub fn followed_by(&self, next: &Cqca, name: impl Into<String>) -> Result<Cqca> {
        let r = self.radius() + next.radius();
        let n = 2 * r + 1;
        let big = 2 * n + 1;
        let map = next.ring_map(big)?;
        let img = |pat: &LocalPauliPattern| -> Result<LocalPauliPattern> {
            let p = map.conjugate(&pat.instantiate(0, big)?)?;
            Ok(LocalPauliPattern::from_product(&p, 0))
        };
        Ok(Cqca::new(name, img(&self.x_image)?, img(&self.z_image)?))
    }

    /// Single-site image `T(X_site)` or `T(Z_site)` on a ring of `n` qubits.
    pub fn site_image(&self, which: Which, site: usize, n: usize) -> Result<PauliProduct> {
        self.image(which).instantiate(site as i64, n)
    }

    /// The full Clifford table of `T` on a ring of `n` qubits.
    pub fn ring_map(&self, n: usize) -> Result<CliffordTable> {
        let xs = (0..n).map(|q| self.x_image.instantiate(q as i64, n)).collect::<Result<Vec<_>>>()?;
        let zs = (0..n).map(|q| self.z_image.instantiate(q as i64, n)).collect::<Result<Vec<_>>>()?;
        CliffordTable::from_images(xs, zs)
    }

    /// Checks that the rule defines a Clifford map on a ring of `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(CaqcError::Geometry("ring of zero qubits".into()));
        }
        for (label, pat) in [("X", &self.x_image), ("Z", &self.z_image)] {
            if !pat.has_symmetric_support() {
                return Err(CaqcError::Validation(format!(
                    "{}: support of T({label}) is not symmetric about the site: {pat}",
                    self.name
                )));
            }
        }
        let x0 = self.x_image.instantiate(0, n)?;
        let z0 = self.z_image.instantiate(0, n)?;
        for (label, img) in [("X", &x0), ("Z", &z0)] {
            if !img.is_hermitian() {
                return Err(CaqcError::Validation(format!("{}: T({label}1) = {img} is not Hermitian", self.name)));
            }
        }
        if !x0.anticommutes_unchecked(&z0) {
            return Err(CaqcError::Validation(format!(
                "{}: T(X1) = {x0} and T(Z1) = {z0} must anticommute",
                self.name
            )));
        }
        for k in 1..n {
            let xk = self.x_image.instantiate(k as i64, n)?;
            let zk = self.z_image.instantiate(k as i64, n)?;
            for (la, a) in [("X", &x0), ("Z", &z0)] {
                for (lb, b) in [("X", &xk), ("Z", &zk)] {
                    if a.anticommutes_unchecked(b) {
                        return Err(CaqcError::Validation(format!(
                            "{}: T({la}1) = {a} and T({lb}{}) = {b} must commute",
                            self.name,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `T P T†` on the ring given by `p.n_qubits()`.
    pub fn apply(&self, p: &PauliProduct) -> Result<PauliProduct> {
        self.ring_map(p.n_qubits())?.conjugate(p)
    }

    /// `T^k` applied to the chosen single-site letter.
    pub fn power_image(&self, k: usize, n: usize, which: Which, site: usize) -> Result<PauliProduct> {
        let map = self.ring_map(n)?;
        let mut p = PauliProduct::single(n, site, which.letter());
        for _ in 0..k {
            p = map.conjugate(&p)?;
        }
        Ok(p)
    }

    /// Images `T^e(X_0)` and `T^e(Z_0)` for `e = 0..=k_max`.
    pub fn power_orbit(&self, n: usize, k_max: usize) -> Result<(Vec<PauliProduct>, Vec<PauliProduct>)> {
        let map = self.ring_map(n)?;
        let mut xs = vec![PauliProduct::x(n, 0)];
        let mut zs = vec![PauliProduct::z(n, 0)];
        for e in 0..k_max {
            xs.push(map.conjugate(&xs[e])?);
            zs.push(map.conjugate(&zs[e])?);
        }
        Ok((xs, zs))
    }

    /// Smallest `L >= 1` with `T^L = id` on a ring of `n` qubits (phases included),
    /// searching up to `DEFAULT_PERIOD_FACTOR * n` steps.
    pub fn period(&self, n: usize) -> Result<usize> {
        self.period_with_cap(n, DEFAULT_PERIOD_FACTOR * n)
    }

    pub fn period_with_cap(&self, n: usize, cap: usize) -> Result<usize> {
        let map = self.ring_map(n)?;
        let x0 = PauliProduct::x(n, 0);
        let z0 = PauliProduct::z(n, 0);
        let (mut x, mut z) = (x0.clone(), z0.clone());
        for l in 1..=cap {
            x = map.conjugate(&x)?;
            z = map.conjugate(&z)?;
            if x == x0 && z == z0 {
                return Ok(l);
            }
        }
        Err(CaqcError::PeriodNotFound { n, cap })
    }

    /// `T^{-1}` of a single-site letter, computed as `T^{L-1}`.
    pub fn inverse_image(&self, n: usize, which: Which, site: usize) -> Result<PauliProduct> {
        let l = self.period(n)?;
        self.power_image(l - 1, n, which, site)
    }

    pub fn is_simple(&self) -> bool {
        if self.z_image != LocalPauliPattern::single(Letter::X) {
            return false;
        }
        self.x_image.letters().iter().all(|(&k, &l)| {
            if k == 0 {
                matches!(l, Letter::Z | Letter::Y)
            } else {
                l == Letter::X
            }
        }) && matches!(self.x_image.letter_at(0), Letter::Z | Letter::Y)
    }

    pub fn is_entangling(&self) -> bool {
        self.x_image.weight() > 1 || self.z_image.weight() > 1
    }

    /// Pattern-level period: smallest `p <= cap` with `T^p(X_0) = X_0` and
    /// `T^p(Z_0) = Z_0` on a ring too large for any wraparound.
    pub fn pattern_period(&self, cap: usize) -> Result<Option<usize>> {
        let n = 2 * self.radius() * cap + 3;
        let map = self.ring_map(n)?;
        let x0 = PauliProduct::x(n, 0);
        let z0 = PauliProduct::z(n, 0);
        let (mut x, mut z) = (x0.clone(), z0.clone());
        for p in 1..=cap {
            x = map.conjugate(&x)?;
            z = map.conjugate(&z)?;
            if x == x0 && z == z0 {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    /// Bounded search for a pattern of width `<= 2 * search_radius + 1` that `T`
    /// translates by a nonzero shift `|s| <= r + 1` (up to sign).
    ///
    /// Ignoring phases, `T(w) ~ w shifted by s` is linear in the bits of `w`, so each
    /// `(width, s)` is a kernel computation over the window rather than an enumeration.
    /// Widths grow from 1, so a hit has exactly the current width.
    pub fn find_glider(&self, search_radius: usize) -> Result<Option<(LocalPauliPattern, i64)>> {
        let r = self.radius();
        let max_shift = r as i64 + 1;
        let mut shifts: Vec<i64> = (1..=max_shift).collect();
        shifts.extend((1..=max_shift).map(|s| -s));
        for width in 1..=2 * search_radius + 1 {
            let n = 2 * (width + 2 * r + 2) + 1;
            let map = self.ring_map(n)?;
            let site = n / 2;
            let window: Vec<usize> = (site + 1 - width..=site).collect();
            let basis: Vec<PauliProduct> =
                window.iter().flat_map(|&q| [PauliProduct::x(n, q), PauliProduct::z(n, q)]).collect();
            for &s in &shifts {
                let images = basis
                    .iter()
                    .map(|b| Ok(map.conjugate(b)?.mul_unchecked(&b.translate(s))))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(mask) = first_kernel_vector(&images) {
                    let mut word = PauliProduct::identity(n);
                    for (k, b) in basis.iter().enumerate() {
                        if mask >> k & 1 == 1 {
                            word = word.mul_unchecked(b);
                        }
                    }
                    let letters = window.iter().map(|&q| (q as i64 - site as i64, word.letter(q)));
                    return Ok(Some((LocalPauliPattern::new(letters.filter(|(_, l)| *l != Letter::I), 0), s)));
                }
            }
        }
        Ok(None)
    }

    /// Simple/entangling flags and glider/periodic/fractal class from bounded searches.
    pub fn classify(&self, search_radius: usize, period_cap: usize) -> Result<CqcaClassification> {
        let kind = if let Some(p) = self.pattern_period(period_cap)? {
            CqcaKind::Periodic { period: p }
        } else if let Some((pattern, shift)) = self.find_glider(search_radius)? {
            CqcaKind::Glider { pattern, shift }
        } else {
            CqcaKind::Fractal
        };
        Ok(CqcaClassification { is_simple: self.is_simple(), is_entangling: self.is_entangling(), kind })
    }

    /// [`Cqca::classify`] with the default search radius `2r + 2` and period cap 16.
    pub fn classify_default(&self) -> Result<CqcaClassification> {
        self.classify(2 * self.radius() + 2, DEFAULT_PERIOD_CAP)
    }

    /// Finds the smallest `m` and bits `alpha, beta` with
    /// `T^2(Z_0) = i^w Z_0 prod_k (T(Z_-k) T(Z_k))^{alpha_k} T(Z_0)^beta` on a ring of `n`.
    pub fn lemma2_solve(&self, n: usize) -> Result<Lemma2Coefficients> {
        let r = self.radius();
        if n < 4 * r + 1 {
            return Err(CaqcError::Precondition(format!("ring of {n} qubits is smaller than 4r+1 = {}", 4 * r + 1)));
        }
        let map = self.ring_map(n)?;
        let z0 = PauliProduct::z(n, 0);
        let tz0 = map.conjugate(&z0)?;
        let target = map.conjugate(&tz0)?;
        let max_m = 2 * r + 1;
        let tz = |k: i64| self.z_image.instantiate(k, n);
        for m in 0..=max_m {
            let pairs = (1..=m as i64).map(|k| Ok(tz(-k)?.mul_unchecked(&tz(k)?))).collect::<Result<Vec<_>>>()?;
            for mask in 0..(1u32 << (m + 1)) {
                let alpha: Vec<bool> = (0..m).map(|k| (mask >> k) & 1 == 1).collect();
                let beta = (mask >> m) & 1 == 1;
                let mut cand = z0.clone();
                for (k, on) in alpha.iter().enumerate() {
                    if *on {
                        cand = cand.mul_unchecked(&pairs[k]);
                    }
                }
                if beta {
                    cand = cand.mul_unchecked(&tz0);
                }
                if cand.same_letters(&target) {
                    let phase_exp = (target.phase_exp() + 4 - cand.phase_exp()) % 4;
                    return Ok(Lemma2Coefficients { m, alpha, beta, phase_exp });
                }
            }
        }
        Err(CaqcError::Decomposition { max_m })
    }
}

/// Bitmask of a nonempty subset of `images` whose product is the identity (phases
/// ignored), found by incremental elimination on the lowest set bit.
fn first_kernel_vector(images: &[PauliProduct]) -> Option<u64> {
    let bit = |p: &PauliProduct| (0..p.n_qubits()).find_map(|q| {
        if p.x_bit(q) {
            Some(2 * q)
        } else if p.z_bit(q) {
            Some(2 * q + 1)
        } else {
            None
        }
    });
    let has = |p: &PauliProduct, b: usize| if b % 2 == 0 { p.x_bit(b / 2) } else { p.z_bit(b / 2) };
    // (pivot, row, combination), sorted by pivot.
    let mut rows: Vec<(usize, PauliProduct, u64)> = Vec::new();
    for (k, img) in images.iter().enumerate() {
        let mut v = img.clone();
        let mut mask = 1u64 << k;
        for (pivot, row, m) in &rows {
            if has(&v, *pivot) {
                v = v.mul_unchecked(row);
                mask ^= m;
            }
        }
        match bit(&v) {
            None => return Some(mask),
            Some(pivot) => {
                let at = rows.partition_point(|(p, _, _)| *p < pivot);
                rows.insert(at, (pivot, v, mask));
            }
        }
    }
    None
}

impl fmt::Display for Cqca {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: X -> {}, Z -> {}", self.name, self.x_image, self.z_image)
    }
}

/// Class of a CQCA as found by the bounded searches in [`Cqca::classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CqcaKind {
    Glider { pattern: LocalPauliPattern, shift: i64 },
    Periodic { period: usize },
    Fractal,
}

impl CqcaKind {
    pub fn label(&self) -> &'static str {
        match self {
            CqcaKind::Glider { .. } => "glider",
            CqcaKind::Periodic { .. } => "periodic",
            CqcaKind::Fractal => "fractal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CqcaClassification {
    pub is_simple: bool,
    pub is_entangling: bool,
    pub kind: CqcaKind,
}

impl CqcaClassification {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "simple": self.is_simple,
            "entangling": self.is_entangling,
            "kind": self.kind.label(),
        });
        match &self.kind {
            CqcaKind::Glider { pattern, shift } => {
                v["glider_pattern"] = serde_json::to_value(PatternJson::from(pattern)).unwrap();
                v["glider_shift"] = serde_json::json!(shift);
            }
            CqcaKind::Periodic { period } => v["period"] = serde_json::json!(period),
            CqcaKind::Fractal => {}
        }
        v
    }
}

/// Coefficients of `T^2(Z_0) = i^phase_exp Z_0 prod_k (T(Z_-k) T(Z_k))^{alpha_k} T(Z_0)^beta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Coefficients {
    pub m: usize,
    pub alpha: Vec<bool>,
    pub beta: bool,
    pub phase_exp: u8,
}

impl Lemma2Coefficients {
    /// Right-hand side of the decomposition on a ring of `n`, around `site`, including the phase.
    pub fn reconstruct(&self, t: &Cqca, n: usize, site: usize) -> Result<PauliProduct> {
        let s = site as i64;
        let tz = |k: i64| t.z_image().instantiate(s + k, n);
        let mut out = PauliProduct::z(n, site).with_phase(self.phase_exp);
        for (k, on) in self.alpha.iter().enumerate() {
            if *on {
                let k = k as i64 + 1;
                out = out.mul_unchecked(&tz(-k)?).mul_unchecked(&tz(k)?);
            }
        }
        if self.beta {
            out = out.mul_unchecked(&tz(0)?);
        }
        Ok(out)
    }
}

/// JSON form `{"name": ..., "x_image": {...}, "z_image": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CqcaJson {
    #[serde(default)]
    pub name: String,
    pub x_image: PatternJson,
    pub z_image: PatternJson,
}

impl From<&Cqca> for CqcaJson {
    fn from(t: &Cqca) -> Self {
        CqcaJson { name: t.name.clone(), x_image: (&t.x_image).into(), z_image: (&t.z_image).into() }
    }
}

impl TryFrom<CqcaJson> for Cqca {
    type Error = CaqcError;

    fn try_from(j: CqcaJson) -> Result<Self> {
        Ok(Cqca::new(j.name, j.x_image.try_into()?, j.z_image.try_into()?))
    }
}

impl Cqca {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CqcaJson::from(self)).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: CqcaJson = serde_json::from_str(s).map_err(|e| CaqcError::Parse(e.to_string()))?;
        j.try_into()
    }
}

/// All radius-1 rules with symmetric support and Hermitian letter-form images
/// that validate on a ring of `n` qubits. Useful for exhaustive checks.
pub fn enumerate_radius1_rules(n: usize) -> Vec<Cqca> {
    const L: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];
    let mut patterns = Vec::new();
    for c in L {
        if c == Letter::I {
            continue;
        }
        patterns.push(LocalPauliPattern::new([(0, c)], 0));
        for a in Letter::NON_IDENTITY {
            for b in Letter::NON_IDENTITY {
                for c2 in L {
                    patterns.push(LocalPauliPattern::new([(-1, a), (0, c2), (1, b)], 0));
                }
            }
            let _ = c;
        }
    }
    patterns.sort_by_key(|p| format!("{p}"));
    patterns.dedup();
    let mut out = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, xp) in patterns.iter().enumerate() {
        for (j, zp) in patterns.iter().enumerate() {
            for phase_x in [0u8, 2] {
                let t = Cqca::new(
                    format!("r1-{i}-{j}-{phase_x}"),
                    LocalPauliPattern::new(xp.letters().iter().map(|(k, l)| (*k, *l)), phase_x),
                    zp.clone(),
                );
                if t.validate(n).is_ok() && seen.insert((format!("{}", t.x_image), format!("{}", t.z_image)), ()).is_none() {
                    out.push(t);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliProduct {
        s.parse().unwrap()
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_RULES {
            let t = Cqca::builtin(name).unwrap();
            t.validate(5).unwrap();
            t.validate(8).unwrap();
        }
    }

    #[test]
    fn commuting_images_fail_validation() {
        let t = Cqca::new("bad", LocalPauliPattern::single(Letter::X), LocalPauliPattern::single(Letter::X));
        assert!(matches!(t.validate(5), Err(CaqcError::Validation(_))));
    }

    #[test]
    fn asymmetric_support_fails_validation() {
        let t = Cqca::new(
            "shift",
            LocalPauliPattern::new([(1, Letter::X)], 0),
            LocalPauliPattern::new([(1, Letter::Z)], 0),
        );
        assert!(t.validate(5).is_err());
    }

    #[test]
    fn cluster_apply_examples() {
        let t = Cqca::cluster();
        assert_eq!(t.apply(&PauliProduct::z(6, 2)).unwrap(), PauliProduct::x(6, 2));
        assert_eq!(t.apply(&p("+Z2 X3 @N=6")).unwrap(), p("+Z3 X4 @N=6"));
    }

    #[test]
    fn cluster_second_power() {
        let t = Cqca::cluster();
        assert_eq!(t.power_image(2, 7, Which::Z, 3).unwrap(), p("+X3 Z4 X5 @N=7"));
        assert_eq!(t.power_image(0, 7, Which::X, 3).unwrap(), PauliProduct::x(7, 3));
    }

    #[test]
    fn fractal_second_power_letters() {
        let t = Cqca::fractal_cluster();
        let img = t.power_image(2, 8, Which::Z, 2).unwrap();
        assert!(img.same_letters(&p("+X1 Z2 X3 Z4 X5 @N=8")));
    }

    #[test]
    fn periods_of_builtins() {
        assert_eq!(Cqca::periodic_cluster().period(5).unwrap(), 2);
        assert_eq!(Cqca::periodic_cluster().period(9).unwrap(), 2);
        assert_eq!(Cqca::identity().period(4).unwrap(), 1);
        assert_eq!(Cqca::hadamard().period(4).unwrap(), 2);
        let l = Cqca::cluster().period(4).unwrap();
        assert!(l <= 16);
    }

    #[test]
    fn inverse_images() {
        let t = Cqca::cluster();
        assert_eq!(t.inverse_image(6, Which::Z, 2).unwrap(), p("+Z2 X3 Z4 @N=6"));
        let f = Cqca::fractal_cluster();
        let inv = f.inverse_image(8, Which::Z, 2).unwrap();
        assert!(inv.same_letters(&p("+Y2 X3 Y4 @N=8")));
        assert_eq!(f.apply(&inv).unwrap(), PauliProduct::z(8, 2));
    }

    #[test]
    fn classification_of_builtins() {
        let c = Cqca::cluster().classify_default().unwrap();
        assert!(c.is_simple && c.is_entangling);
        match c.kind {
            CqcaKind::Glider { pattern, shift } => {
                assert_eq!(shift, 1);
                assert_eq!(pattern, LocalPauliPattern::new([(-1, Letter::Z), (0, Letter::X)], 0));
            }
            other => panic!("expected glider, got {other:?}"),
        }
        let c = Cqca::periodic_cluster().classify_default().unwrap();
        assert!(!c.is_simple && c.is_entangling);
        assert_eq!(c.kind, CqcaKind::Periodic { period: 2 });
        let c = Cqca::fractal_cluster().classify_default().unwrap();
        assert!(!c.is_simple && c.is_entangling);
        assert_eq!(c.kind, CqcaKind::Fractal);
        let h = Cqca::hadamard().classify_default().unwrap();
        assert!(h.is_simple && !h.is_entangling);
    }

    #[test]
    fn lemma2_builtins() {
        let c = Cqca::cluster().lemma2_solve(5).unwrap();
        assert_eq!((c.m, c.alpha.clone(), c.beta), (1, vec![true], false));
        let f = Cqca::fractal_cluster().lemma2_solve(5).unwrap();
        assert_eq!((f.m, f.alpha.clone(), f.beta), (1, vec![true], true));
        let p = Cqca::periodic_cluster().lemma2_solve(5).unwrap();
        assert_eq!((p.m, p.alpha.clone(), p.beta), (0, vec![], false));
        assert!(Cqca::cluster().lemma2_solve(4).is_err());
    }

    #[test]
    fn lemma2_reconstruction_is_exact() {
        for t in [Cqca::cluster(), Cqca::fractal_cluster(), Cqca::periodic_cluster()] {
            for n in [7, 9] {
                let c = t.lemma2_solve(n).unwrap();
                let lhs = t.power_image(2, n, Which::Z, 3).unwrap();
                assert_eq!(c.reconstruct(&t, n, 3).unwrap(), lhs, "{}", t.name());
            }
        }
    }

    #[test]
    fn composition_with_hadamard() {
        let tp = Cqca::periodic_cluster().followed_by(&Cqca::hadamard(), "t1t").unwrap();
        assert_eq!(tp.x_image(), Cqca::cluster().x_image());
        assert_eq!(tp.z_image(), Cqca::cluster().z_image());
    }

    #[test]
    fn json_round_trip() {
        let t = Cqca::fractal_cluster();
        let s = t.to_json().to_string();
        assert_eq!(Cqca::from_json_str(&s).unwrap(), t);
        let cluster = r#"{"name": "cluster", "x_image": {"phase":0, "letters": {"-1":"X","0":"Z","1":"X"}}, "z_image": {"phase":0, "letters": {"0":"X"}}}"#;
        assert_eq!(Cqca::from_json_str(cluster).unwrap(), Cqca::cluster());
    }

    #[test]
    fn radius1_enumeration_contains_builtins() {
        let rules = enumerate_radius1_rules(7);
        for t in [Cqca::cluster(), Cqca::periodic_cluster(), Cqca::fractal_cluster(), Cqca::hadamard()] {
            assert!(rules.iter().any(|r| r.x_image() == t.x_image() && r.z_image() == t.z_image()));
        }
    }
}
