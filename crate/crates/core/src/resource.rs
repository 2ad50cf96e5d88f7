//! Resource states on an `n x cols` lattice built by chaining `U_T` over neighbouring
//! columns, and their local stabilizer generators.
//!
//! Qubit `(col, row)` has index `col * n + row`; columns and rows are 0-based.
//! Generator signs come from exact membership in the Heisenberg-evolved code, so the
//! printed shapes only fix the letters.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::clifford::CliffordMap;
use crate::cqca::Cqca;
use crate::dense::DenseState;
use crate::error::{CaqcError, Result};
use crate::mbqc::{build_ut, extended_steps, MbqcConfig, UtMap};
use crate::pauli::{Letter, LocalPauliPattern, PauliProduct};
use crate::rng;
use crate::stabilizer::StabilizerCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    Left,
    Bulk,
    Right,
}

/// Generator `S_row^(column)`: the one created from `X` on `(column, row)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorRole {
    pub family: Family,
    pub column: usize,
    pub row: usize,
}

#[derive(Clone, Debug)]
pub struct LatticeCode {
    pub rule: String,
    pub rows: usize,
    pub cols: usize,
    pub code: StabilizerCode,
    pub roles: Vec<GeneratorRole>,
}

fn column(n: usize, c: usize) -> Vec<usize> {
    (c * n..(c + 1) * n).collect()
}

/// The Pauli `P` with `T(P) = ±target`, letters only (phase 0).
fn preimage(map: &dyn CliffordMap, target: &PauliProduct) -> PauliProduct {
    let n = map.n_qubits();
    let mut p = PauliProduct::identity(n);
    for q in 0..n {
        let x = target.anticommutes_unchecked(map.image_z(q));
        let z = target.anticommutes_unchecked(map.image_x(q));
        p.set_letter(q, Letter::from_bits(x, z));
    }
    p
}

/// `Z` on every qubit where `p` has an `X` or `Y` letter.
fn z_on_x_support(p: &PauliProduct) -> PauliProduct {
    let n = p.n_qubits();
    let qs: Vec<_> = (0..n).filter(|&q| p.x_bit(q)).map(|q| (q, Letter::Z)).collect();
    PauliProduct::from_letters(n, &qs)
}

fn z_on_z_support(p: &PauliProduct) -> PauliProduct {
    let n = p.n_qubits();
    let qs: Vec<_> = (0..n).filter(|&q| p.z_bit(q)).map(|q| (q, Letter::Z)).collect();
    PauliProduct::from_letters(n, &qs)
}

/// Places ring operators on columns of the lattice and multiplies them (letters only).
fn place(n: usize, cols: usize, parts: &[(usize, &PauliProduct)]) -> PauliProduct {
    let total = n * cols;
    let mut out = PauliProduct::identity(total);
    for (c, p) in parts {
        out = out.mul_unchecked(&p.remap(total, &column(n, *c)));
    }
    out.unsigned()
}

/// All-`X` code pushed column by column through `steps`; `steps[c]` acts on columns `(c, c+1)`.
pub fn evolved_code(n: usize, steps: &[UtMap]) -> Result<StabilizerCode> {
    let total = n * (steps.len() + 1);
    let mut code = StabilizerCode::new(total, (0..total).map(|q| PauliProduct::x(total, q)).collect(), Vec::new())?;
    for (c, ut) in steps.iter().enumerate() {
        let map = [column(n, c), column(n, c + 1)].concat();
        code = code.conjugate(&ut.table.embed(total, &map))?;
    }
    Ok(code)
}

/// Dense state `prod_c U^(c,c+1) |+>^{n*cols}` with the same column order.
pub fn dense_resource(n: usize, steps: &[UtMap]) -> Result<DenseState> {
    let total = n * (steps.len() + 1);
    let mut s = DenseState::plus(total)?;
    for (c, ut) in steps.iter().enumerate() {
        let (a, b) = (column(n, c), column(n, c + 1));
        for i in 0..n {
            s.apply_cz(a[i], b[i])?;
        }
        for &q in &b {
            s.apply_h(q)?;
        }
        s.apply_clifford(&ut.ring, &b)?;
    }
    Ok(s)
}

pub fn theorem3_steps(t: &Cqca, n: usize, depth: usize) -> Result<Vec<UtMap>> {
    Ok(vec![build_ut(t, n)?; depth])
}

/// `U_{T'}, U_{T_1}, U_{T'}, ...` over `2 * depth` column pairs.
pub fn extended_resource_steps(t: &Cqca, n: usize, depth: usize) -> Result<Vec<UtMap>> {
    let (tp, t1) = extended_steps(t, n)?;
    Ok((0..2 * depth).map(|c| if c % 2 == 0 { tp.clone() } else { t1.clone() }).collect())
}

fn sign_from(reference: &StabilizerCode, shape: PauliProduct) -> Result<PauliProduct> {
    match reference.stabilizer_sign(&shape) {
        Some(false) => Ok(shape),
        Some(true) => Ok(shape.negated()),
        None => Err(CaqcError::Hypothesis(format!("{shape} is not in the evolved stabilizer group"))),
    }
}

fn finish(rule: &str, n: usize, cols: usize, reference: &StabilizerCode, shapes: Vec<(GeneratorRole, PauliProduct)>) -> Result<LatticeCode> {
    let mut roles = Vec::with_capacity(shapes.len());
    let mut gens = Vec::with_capacity(shapes.len());
    for (role, shape) in shapes {
        gens.push(sign_from(reference, shape)?);
        roles.push(role);
    }
    let code = StabilizerCode::new(n * cols, gens, Vec::new())?;
    if !code.is_full_rank() {
        return Err(CaqcError::InvalidCode("lattice generators are not independent".into()));
    }
    Ok(LatticeCode { rule: rule.to_string(), rows: n, cols, code, roles })
}

fn role(family: Family, column: usize, row: usize) -> GeneratorRole {
    GeneratorRole { family, column, row }
}

/// Local generators of the `n x (depth+1)` resource state for `U_T^depth`, with `T(Z) != Z`.
///
/// Left column `T^{-1}(Z_i) Z_i`, bulk `Z_i [T(Z_i) prod_k (Z_{i-k} Z_{i+k})^{a_k} Z_i^b
/// prod_{k in Zsupp T(Z_0)} Z_{i+k}] Z_i` and right column `Z_i T(Z_i)`.
pub fn build_theorem3(t: &Cqca, n: usize, depth: usize) -> Result<LatticeCode> {
    if depth == 0 {
        return Err(CaqcError::Geometry("depth must be at least 1".into()));
    }
    if *t.z_image() == LocalPauliPattern::single(Letter::Z) {
        return Err(CaqcError::Hypothesis(format!("{} fixes Z; use the GHZ construction", t.name())));
    }
    let steps = theorem3_steps(t, n, depth)?;
    let reference = evolved_code(n, &steps)?;
    let ring = &steps[0].ring;
    let r = t.radius();
    let coeffs = t.lemma2_solve(if n >= 4 * r + 1 { n } else { n.max(6 * r + 3) })?;
    let cols = depth + 1;
    let mut shapes = Vec::with_capacity(n * cols);
    for i in 0..n {
        let tz = ring.image_z(i).unsigned();
        let tinv = preimage(ring, &PauliProduct::z(n, i));
        let mut mid = tz.mul_unchecked(&z_on_z_support(&tz));
        for (k, on) in coeffs.alpha.iter().enumerate() {
            if *on {
                let k = k + 1;
                mid = mid
                    .mul_unchecked(&PauliProduct::z(n, (i + n - k % n) % n))
                    .mul_unchecked(&PauliProduct::z(n, (i + k) % n));
            }
        }
        if coeffs.beta {
            mid = mid.mul_unchecked(&PauliProduct::z(n, i));
        }
        let zi = PauliProduct::z(n, i);
        shapes.push((role(Family::Left, 0, i), place(n, cols, &[(0, &tinv), (1, &zi)])));
        for j in 1..depth {
            shapes.push((role(Family::Bulk, j, i), place(n, cols, &[(j - 1, &zi), (j, &mid), (j + 1, &zi)])));
        }
        shapes.push((role(Family::Right, depth, i), place(n, cols, &[(depth - 1, &zi), (depth, &tz)])));
    }
    shapes.sort_by_key(|(r, _)| (r.column, r.row));
    finish(t.name(), n, cols, &reference, shapes)
}

/// Resource state for a rule with `T(Z) = Z`: links `Z_i Z_i` between neighbouring
/// columns and the string `X_i^(0) prod_{c>=1} T(X_i)^(c)`.
pub fn build_ghz_case(t: &Cqca, n: usize, depth: usize) -> Result<LatticeCode> {
    if depth == 0 {
        return Err(CaqcError::Geometry("depth must be at least 1".into()));
    }
    if *t.z_image() != LocalPauliPattern::single(Letter::Z) {
        return Err(CaqcError::Hypothesis(format!("{} does not fix Z", t.name())));
    }
    let steps = theorem3_steps(t, n, depth)?;
    let reference = evolved_code(n, &steps)?;
    let ring = &steps[0].ring;
    let cols = depth + 1;
    let mut shapes = Vec::with_capacity(n * cols);
    for i in 0..n {
        let xi = PauliProduct::x(n, i);
        let tx = ring.image_x(i).unsigned();
        let mut parts = vec![(0, &xi)];
        parts.extend((1..cols).map(|c| (c, &tx)));
        shapes.push((role(Family::Left, 0, i), place(n, cols, &parts)));
        let zi = PauliProduct::z(n, i);
        for c in 1..cols {
            let fam = if c == depth { Family::Right } else { Family::Bulk };
            shapes.push((role(fam, c, i), place(n, cols, &[(c - 1, &zi), (c, &zi)])));
        }
    }
    shapes.sort_by_key(|(r, _)| (r.column, r.row));
    finish(t.name(), n, cols, &reference, shapes)
}

/// `n` independent GHZ states, one per row, each spanning `cols` columns.
pub fn row_ghz_code(n: usize, cols: usize) -> Result<StabilizerCode> {
    let total = n * cols;
    let mut gens = Vec::with_capacity(total);
    for i in 0..n {
        gens.push(PauliProduct::from_letters(total, &(0..cols).map(|c| (c * n + i, Letter::X)).collect::<Vec<_>>()));
        for c in 1..cols {
            gens.push(PauliProduct::from_letters(total, &[((c - 1) * n + i, Letter::Z), (c * n + i, Letter::Z)]));
        }
    }
    StabilizerCode::new(total, gens, Vec::new())
}

/// Local generators of the `n x (2 depth + 1)` resource state for the alternating
/// `U_{T'}, U_{T_1}` sequence, `T' = T_1 T`, for a non-simple `T`.
///
/// For the periodic cluster rule the odd-column family is replaced by its
/// three-column form `Z_i (Z_{i-1} X_i Z_{i+1}) Z_i`.
pub fn build_prop2(t: &Cqca, n: usize, depth: usize) -> Result<LatticeCode> {
    let periodic = t.x_image() == Cqca::periodic_cluster().x_image() && t.z_image() == Cqca::periodic_cluster().z_image();
    build_prop2_form(t, n, depth, periodic)
}

/// As [`build_prop2`], choosing the odd-column family explicitly. The general form
/// `Z_i X_i T'(X_i) prod_{k in Xsupp T'(X_0)} Z_{i+k}` spans four columns.
pub fn build_prop2_form(t: &Cqca, n: usize, depth: usize, periodic: bool) -> Result<LatticeCode> {
    if depth == 0 {
        return Err(CaqcError::Geometry("depth must be at least 1".into()));
    }
    if t.is_simple() {
        return Err(CaqcError::Hypothesis(format!("{} is simple", t.name())));
    }
    let steps = extended_resource_steps(t, n, depth)?;
    let reference = evolved_code(n, &steps)?;
    let tp = &steps[0].ring;
    if tp.image_z(0).same_letters(&PauliProduct::z(n, 0)) {
        return Err(CaqcError::Hypothesis("T' fixes Z".into()));
    }
    let cols = 2 * depth + 1;
    let mut shapes = Vec::with_capacity(n * cols);
    for i in 0..n {
        let zi = PauliProduct::z(n, i);
        let xi = PauliProduct::x(n, i);
        let tz = tp.image_z(i).unsigned();
        let tx = tp.image_x(i).unsigned();
        let tinv = preimage(tp, &zi);
        shapes.push((role(Family::Left, 0, i), place(n, cols, &[(0, &tinv), (1, &zi)])));
        let zx = z_on_x_support(&tz);
        for j in 1..=depth {
            shapes.push((role(Family::Bulk, 2 * j - 1, i), place(n, cols, &[(2 * j - 2, &zi), (2 * j - 1, &tz), (2 * j, &zx)])));
        }
        let zxx = z_on_x_support(&tx);
        let dressed = xi
            .mul_unchecked(&PauliProduct::z(n, (i + n - 1) % n))
            .mul_unchecked(&PauliProduct::z(n, (i + 1) % n));
        for j in 1..depth {
            let shape = if periodic {
                place(n, cols, &[(2 * j - 1, &zi), (2 * j, &dressed), (2 * j + 1, &zi)])
            } else {
                place(n, cols, &[(2 * j - 1, &zi), (2 * j, &xi), (2 * j + 1, &tx), (2 * j + 2, &zxx)])
            };
            shapes.push((role(Family::Bulk, 2 * j, i), shape));
        }
        shapes.push((role(Family::Right, 2 * depth, i), place(n, cols, &[(2 * depth - 1, &zi), (2 * depth, &xi)])));
    }
    shapes.sort_by_key(|(r, _)| (r.column, r.row));
    finish(t.name(), n, cols, &reference, shapes)
}

impl LatticeCode {
    pub fn qubit(&self, column: usize, row: usize) -> usize {
        column * self.rows + row
    }

    pub fn generator(&self, column: usize, row: usize) -> Option<&PauliProduct> {
        self.roles
            .iter()
            .position(|r| r.column == column && r.row == row)
            .map(|k| &self.code.stabilizers()[k])
    }

    /// Number of consecutive columns spanned by `p`.
    pub fn column_span(&self, p: &PauliProduct) -> usize {
        let cols: Vec<usize> = p.support().into_iter().map(|q| q / self.rows).collect();
        match (cols.iter().min(), cols.iter().max()) {
            (Some(a), Some(b)) => b - a + 1,
            _ => 0,
        }
    }

    pub fn max_column_span(&self) -> usize {
        self.code.stabilizers().iter().map(|p| self.column_span(p)).max().unwrap_or(0)
    }

    /// One Pauli as a grid: rows top to bottom, columns left to right, `.` for identity.
    pub fn render(&self, p: &PauliProduct) -> String {
        let mut s = String::new();
        let sign = match p.phase_exp() {
            0 => '+',
            2 => '-',
            _ => '?',
        };
        for row in 0..self.rows {
            s.push(if row == 0 { sign } else { ' ' });
            s.push(' ');
            for c in 0..self.cols {
                let l = p.letter(self.qubit(c, row));
                s.push(if l == Letter::I { '.' } else { l.as_char() });
            }
            s.push('\n');
        }
        s
    }

    pub fn render_all(&self) -> String {
        let mut s = String::new();
        for (role, g) in self.roles.iter().zip(self.code.stabilizers()) {
            let _ = writeln!(s, "S[col {}, row {}] {:?}", role.column, role.row, role.family);
            s.push_str(&self.render(g));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gens: Vec<_> = self
            .roles
            .iter()
            .zip(self.code.stabilizers())
            .map(|(r, g)| serde_json::json!({"column": r.column, "row": r.row, "family": r.family, "pauli": g.to_string()}))
            .collect();
        serde_json::json!({"rule": self.rule, "rows": self.rows, "cols": self.cols, "generators": gens})
    }

    /// `Z_i^(c) S_i^(c+1)`: the operator that undoes outcome 1 on `(c, i)`.
    pub fn mbqc_correction(&self, row: usize, c: usize) -> Result<PauliProduct> {
        let s = self.generator(c + 1, row).ok_or(CaqcError::Index { index: c + 1, n: self.cols })?;
        let corr = PauliProduct::z(self.rows * self.cols, self.qubit(c, row)).mul_unchecked(s);
        if corr.support().iter().any(|&q| q / self.rows <= c) {
            return Err(CaqcError::Hypothesis(format!("S at column {} acts on column {c} beyond Z", c + 1)));
        }
        Ok(corr)
    }
}

/// Graph-state edges `(a, b)`, `a < b`, if the code is a graph state with `+` signs.
pub fn recognize_graph_state(code: &StabilizerCode) -> Option<Vec<(usize, usize)>> {
    let n = code.n_qubits();
    if !code.is_full_rank() {
        return None;
    }
    let rows = code.canonical_generators();
    if rows.len() != n {
        return None;
    }
    let mut adj = vec![vec![false; n]; n];
    for (q, row) in rows.iter().enumerate() {
        if row.phase_exp() != 0 || row.letter(q) != Letter::X {
            return None;
        }
        for p in 0..n {
            if p != q {
                if row.x_bit(p) {
                    return None;
                }
                adj[q][p] = row.z_bit(p);
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if adj[a][b] != adj[b][a] {
                return None;
            }
            if adj[a][b] {
                edges.push((a, b));
            }
        }
    }
    Some(edges)
}

/// Graphviz rendering with node `c_r` pinned at `(c, -r)`.
pub fn graph_to_dot(rows: usize, cols: usize, edges: &[(usize, usize)]) -> String {
    let mut s = String::from("graph resource {\n  node [shape=circle];\n");
    for c in 0..cols {
        for r in 0..rows {
            let _ = writeln!(s, "  q{c}_{r} [pos=\"{c},-{r}!\"];");
        }
    }
    for &(a, b) in edges {
        let _ = writeln!(s, "  q{}_{} -- q{}_{};", a / rows, a % rows, b / rows, b % rows);
    }
    s.push_str("}\n");
    s
}

/// Expected `T_c` graph on `n x (depth+1)`: ring edges in columns `0..depth` and
/// row edges between neighbouring columns.
pub fn cluster_lattice_edges(n: usize, depth: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for c in 0..depth {
        for i in 0..n {
            let (a, b) = (c * n + i, c * n + (i + 1) % n);
            if a != b {
                edges.push((a.min(b), a.max(b)));
            }
            edges.push((c * n + i, (c + 1) * n + i));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Column-by-column measurement of the dense resource state with the stabilizer
/// corrections; returns the last column and the outcomes.
pub fn run_on_resource(t: &Cqca, n: usize, depth: usize, angles: &[Vec<f64>], cfg: &MbqcConfig) -> Result<(DenseState, Vec<Vec<bool>>)> {
    if angles.len() != depth || angles.iter().any(|r| r.len() != n) {
        return Err(CaqcError::Dimension { expected: depth * n, actual: angles.iter().map(Vec::len).sum() });
    }
    let lattice = build_theorem3(t, n, depth)?;
    let mut s = dense_resource(n, &theorem3_steps(t, n, depth)?)?;
    let total = n * (depth + 1);
    let mut rng = rng::stream(cfg.seed, "outcomes");
    let mut outcomes = Vec::with_capacity(depth);
    for c in 0..depth {
        let mut m = Vec::with_capacity(n);
        for i in 0..n {
            let q = lattice.qubit(c, i);
            s.apply_pauli_rotation(&PauliProduct::z(total, q), angles[c][i])?;
            let forced = cfg.forced_outcomes.as_ref().map(|f| f[c][i]);
            let (bit, _) = s.measure_projective(&PauliProduct::x(total, q), forced, &mut rng)?;
            m.push(bit);
        }
        for (i, &bit) in m.iter().enumerate() {
            if bit && cfg.corrected {
                s.apply_pauli(&lattice.mbqc_correction(i, c)?)?;
            }
        }
        outcomes.push(m);
    }
    let measured: Vec<usize> = (0..depth * n).collect();
    let flat: Vec<bool> = outcomes.iter().flatten().copied().collect();
    Ok((s.discard_x_qubits(&measured, &flat)?, outcomes))
}

/// Random `±` outcome grid, used to exercise every correction path.
pub fn random_outcomes<R: Rng>(rows: usize, n: usize, rng: &mut R) -> Vec<Vec<bool>> {
    (0..rows).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
}

/// `T^{-1}(Z_site)` letters on a ring of `n`.
pub fn inverse_z_letters(t: &Cqca, n: usize, site: usize) -> Result<PauliProduct> {
    let ring = t.ring_map(n)?;
    Ok(preimage(&ring, &PauliProduct::z(n, site)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbqc::run_algorithm1;

    fn dense_agrees(l: &LatticeCode, steps: &[UtMap]) {
        let s = dense_resource(l.rows, steps).unwrap();
        for g in l.code.stabilizers() {
            let e = s.expectation(g).unwrap();
            assert!((e - 1.0).abs() < 1e-9, "{g}: {e}");
        }
    }

    #[test]
    fn cluster_lattice_is_graph_state() {
        let t = Cqca::cluster();
        let l = build_theorem3(&t, 3, 3).unwrap();
        let steps = theorem3_steps(&t, 3, 3).unwrap();
        assert!(StabilizerCode::codes_equal(&l.code, &evolved_code(3, &steps).unwrap()));
        dense_agrees(&l, &steps);
        assert_eq!(recognize_graph_state(&l.code).unwrap(), cluster_lattice_edges(3, 3));
        assert!(l.max_column_span() <= 3);
    }

    #[test]
    fn fractal_lattice_matches_evolution() {
        let t = Cqca::fractal_cluster();
        let steps = theorem3_steps(&t, 4, 2).unwrap();
        let l = build_theorem3(&t, 4, 2).unwrap();
        assert!(StabilizerCode::codes_equal(&l.code, &evolved_code(4, &steps).unwrap()));
        dense_agrees(&l, &steps);
        assert!(l.max_column_span() <= 3);
    }

    #[test]
    fn small_ring_cluster_is_chain() {
        let l = build_theorem3(&Cqca::cluster(), 2, 2).unwrap();
        let edges = recognize_graph_state(&l.code).unwrap();
        assert_eq!(edges, vec![(0, 2), (1, 3), (2, 4), (3, 5)]);
    }

    #[test]
    fn ghz_rows_for_even_depth() {
        let t = Cqca::periodic_cluster();
        for depth in 1..=4 {
            let l = build_ghz_case(&t, 3, depth).unwrap();
            let steps = theorem3_steps(&t, 3, depth).unwrap();
            assert!(StabilizerCode::codes_equal(&l.code, &evolved_code(3, &steps).unwrap()));
            let ghz = StabilizerCode::codes_equal(&l.code, &row_ghz_code(3, depth + 1).unwrap());
            assert_eq!(ghz, depth % 2 == 0, "depth {depth}");
        }
        assert!(build_theorem3(&t, 3, 2).is_err());
    }

    #[test]
    fn extended_periodic_lattice() {
        let t = Cqca::periodic_cluster();
        let steps = extended_resource_steps(&t, 3, 2).unwrap();
        let l = build_prop2(&t, 3, 2).unwrap();
        assert_eq!(l.cols, 5);
        assert!(StabilizerCode::codes_equal(&l.code, &evolved_code(3, &steps).unwrap()));
        dense_agrees(&l, &steps);
        assert!(l.max_column_span() <= 3);
    }

    #[test]
    fn extended_general_form_matches_evolution() {
        let t = Cqca::periodic_cluster();
        let general = build_prop2_form(&t, 4, 2, false).unwrap();
        let simplified = build_prop2(&t, 4, 2).unwrap();
        let steps = extended_resource_steps(&t, 4, 2).unwrap();
        assert!(StabilizerCode::codes_equal(&general.code, &evolved_code(4, &steps).unwrap()));
        assert!(StabilizerCode::codes_equal(&general.code, &simplified.code));
        assert_eq!(general.max_column_span(), 4);
        assert!(build_prop2(&Cqca::cluster(), 3, 1).is_err());
    }

    #[test]
    fn resource_mbqc_matches_algorithm1() {
        let t = Cqca::cluster();
        let mut r = rng::stream(7, "test");
        for _ in 0..4 {
            let angles = crate::mbqc::random_angles(2, 2, &mut r);
            let outcomes = random_outcomes(2, 2, &mut r);
            let cfg = MbqcConfig { forced_outcomes: Some(outcomes), ..MbqcConfig::corrected(1) };
            let (psi, _) = run_on_resource(&t, 2, 2, &angles, &cfg).unwrap();
            let reference = run_algorithm1(&t, 2, 2, &angles, &MbqcConfig::corrected(1)).unwrap();
            assert!((psi.fidelity(&reference.final_state).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dot_and_render() {
        let l = build_theorem3(&Cqca::cluster(), 3, 1).unwrap();
        let txt = l.render(&l.code.stabilizers()[0]);
        assert_eq!(txt.lines().count(), 3);
        let dot = graph_to_dot(3, 2, &recognize_graph_state(&l.code).unwrap());
        assert!(dot.contains("q0_0 -- q1_0"));
    }
}
