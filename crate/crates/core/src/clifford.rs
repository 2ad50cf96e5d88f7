//! Clifford maps described by the images of every single-qubit X and Z.

use crate::error::{CaqcError, Result};
use crate::pauli::PauliProduct;

/// Anything that conjugates Pauli products to Pauli products.
///
/// Implementors only expose the images of `X_q` and `Z_q`; conjugation of a
/// general word follows from `σ = i^{xz} X^x Z^z` and multiplicativity.
pub trait CliffordMap {
    fn n_qubits(&self) -> usize;
    fn image_x(&self, q: usize) -> &PauliProduct;
    fn image_z(&self, q: usize) -> &PauliProduct;

    /// `U P U†` with exact phase.
    fn conjugate(&self, p: &PauliProduct) -> Result<PauliProduct> {
        let n = self.n_qubits();
        if p.n_qubits() != n {
            return Err(CaqcError::Dimension { expected: n, actual: p.n_qubits() });
        }
        let y_count = p.support().iter().filter(|&&q| p.x_bit(q) && p.z_bit(q)).count() as u8;
        let mut acc = PauliProduct::identity(n).with_phase((p.phase_exp() + y_count) & 3);
        for q in p.support() {
            if p.x_bit(q) {
                acc = acc.mul_unchecked(self.image_x(q));
            }
            if p.z_bit(q) {
                acc = acc.mul_unchecked(self.image_z(q));
            }
        }
        Ok(acc)
    }
}

/// Explicit table of images; the workhorse implementation of [`CliffordMap`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTable {
    n: usize,
    x_images: Vec<PauliProduct>,
    z_images: Vec<PauliProduct>,
}

impl CliffordMap for CliffordTable {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn image_x(&self, q: usize) -> &PauliProduct {
        &self.x_images[q]
    }

    fn image_z(&self, q: usize) -> &PauliProduct {
        &self.z_images[q]
    }
}

impl CliffordTable {
    pub fn from_images(x_images: Vec<PauliProduct>, z_images: Vec<PauliProduct>) -> Result<Self> {
        let n = x_images.len();
        if z_images.len() != n {
            return Err(CaqcError::Dimension { expected: n, actual: z_images.len() });
        }
        for p in x_images.iter().chain(&z_images) {
            if p.n_qubits() != n {
                return Err(CaqcError::Dimension { expected: n, actual: p.n_qubits() });
            }
        }
        Ok(CliffordTable { n, x_images, z_images })
    }

    pub fn identity(n: usize) -> Self {
        CliffordTable {
            n,
            x_images: (0..n).map(|q| PauliProduct::x(n, q)).collect(),
            z_images: (0..n).map(|q| PauliProduct::z(n, q)).collect(),
        }
    }

    pub fn hadamard(n: usize, qubits: &[usize]) -> Self {
        let mut t = Self::identity(n);
        for &q in qubits {
            t.x_images[q] = PauliProduct::z(n, q);
            t.z_images[q] = PauliProduct::x(n, q);
        }
        t
    }

    /// Phase gate `S`: `X -> Y`, `Z -> Z`.
    pub fn phase_s(n: usize, qubits: &[usize]) -> Self {
        let mut t = Self::identity(n);
        for &q in qubits {
            t.x_images[q] = PauliProduct::y(n, q);
        }
        t
    }

    /// Product of `CZ` gates; repeated pairs cancel.
    pub fn cz(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut t = Self::identity(n);
        for &(a, b) in pairs {
            assert_ne!(a, b, "CZ needs two distinct qubits");
            let za = PauliProduct::z(n, a);
            let zb = PauliProduct::z(n, b);
            t.x_images[a] = t.x_images[a].mul_unchecked(&zb);
            t.x_images[b] = t.x_images[b].mul_unchecked(&za);
        }
        t
    }

    /// Conjugation by a Pauli operator: every image is `±` the original.
    pub fn pauli(p: &PauliProduct) -> Self {
        let n = p.n_qubits();
        let mut t = Self::identity(n);
        for q in 0..n {
            if p.z_bit(q) {
                t.x_images[q] = t.x_images[q].negated();
            }
            if p.x_bit(q) {
                t.z_images[q] = t.z_images[q].negated();
            }
        }
        t
    }

    pub fn materialize(map: &dyn CliffordMap) -> Self {
        let n = map.n_qubits();
        CliffordTable {
            n,
            x_images: (0..n).map(|q| map.image_x(q).clone()).collect(),
            z_images: (0..n).map(|q| map.image_z(q).clone()).collect(),
        }
    }

    /// The map "apply `self`, then `next`" (as circuits): `P -> next(self(P))`.
    pub fn then(&self, next: &dyn CliffordMap) -> Result<Self> {
        if next.n_qubits() != self.n {
            return Err(CaqcError::Dimension { expected: self.n, actual: next.n_qubits() });
        }
        let x_images = self.x_images.iter().map(|p| next.conjugate(p)).collect::<Result<_>>()?;
        let z_images = self.z_images.iter().map(|p| next.conjugate(p)).collect::<Result<_>>()?;
        Ok(CliffordTable { n: self.n, x_images, z_images })
    }

    /// Acts as `self` on qubits `map[0..n]` of a `total`-qubit register and as identity elsewhere.
    pub fn embed(&self, total: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.n);
        let mut t = Self::identity(total);
        for q in 0..self.n {
            t.x_images[map[q]] = self.x_images[q].remap(total, map);
            t.z_images[map[q]] = self.z_images[q].remap(total, map);
        }
        t
    }

    pub fn x_images(&self) -> &[PauliProduct] {
        &self.x_images
    }

    pub fn z_images(&self) -> &[PauliProduct] {
        &self.z_images
    }

    /// Checks Hermiticity and the canonical commutation relations of the images.
    /// Returns a description of the first violation.
    pub fn check_relations(&self) -> std::result::Result<(), String> {
        let n = self.n;
        for q in 0..n {
            if !self.x_images[q].is_hermitian() {
                return Err(format!("image of X{} is not Hermitian: {}", q + 1, self.x_images[q]));
            }
            if !self.z_images[q].is_hermitian() {
                return Err(format!("image of Z{} is not Hermitian: {}", q + 1, self.z_images[q]));
            }
        }
        for a in 0..n {
            for b in a..n {
                let pairs = [
                    ("X", &self.x_images[a], "X", &self.x_images[b], false),
                    ("X", &self.x_images[a], "Z", &self.z_images[b], a == b),
                    ("Z", &self.z_images[a], "X", &self.x_images[b], a == b),
                    ("Z", &self.z_images[a], "Z", &self.z_images[b], false),
                ];
                for (la, pa, lb, pb, should_anti) in pairs {
                    if pa.anticommutes_unchecked(pb) != should_anti {
                        let rel = if should_anti { "anticommute" } else { "commute" };
                        return Err(format!(
                            "images of {la}{} and {lb}{} must {rel}: {pa} vs {pb}",
                            a + 1,
                            b + 1
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

impl CliffordMap for &CliffordTable {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn image_x(&self, q: usize) -> &PauliProduct {
        &self.x_images[q]
    }

    fn image_z(&self, q: usize) -> &PauliProduct {
        &self.z_images[q]
    }
}
