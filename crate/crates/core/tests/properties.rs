use caqc_core::cqca::enumerate_radius1_rules;
use caqc_core::*;
use proptest::prelude::*;

const LETTERS: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

fn word(codes: &[u8], phase: u8) -> PauliProduct {
    let mut p = PauliProduct::identity(codes.len());
    for (q, &k) in codes.iter().enumerate() {
        p.set_letter(q, LETTERS[k as usize]);
    }
    p.with_phase(phase)
}

/// Three words on the same `n`, up to 130 qubits so that multi-word masks are covered.
fn triple() -> impl Strategy<Value = (PauliProduct, PauliProduct, PauliProduct)> {
    (1usize..130).prop_flat_map(|n| {
        let w = || (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(c, ph)| word(&c, ph));
        (w(), w(), w())
    })
}

fn symplectic(a: &PauliProduct, b: &PauliProduct) -> bool {
    (0..a.n_qubits()).filter(|&q| (a.x_bit(q) && b.z_bit(q)) != (a.z_bit(q) && b.x_bit(q))).count() % 2 == 1
}

proptest! {
    #[test]
    fn multiplication_is_associative((a, b, c) in triple()) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_is_the_symplectic_form((a, b, _c) in triple()) {
        let ab = a.commutes(&b).unwrap();
        prop_assert_eq!(ab, b.commutes(&a).unwrap());
        prop_assert_eq!(!ab, symplectic(&a, &b));
        // ab = ±ba with the sign given by commutation.
        let x = a.multiply(&b).unwrap();
        let y = b.multiply(&a).unwrap();
        prop_assert!(x.same_letters(&y));
        let diff = (4 + x.phase_exp() - y.phase_exp()) % 4;
        prop_assert_eq!(diff, if ab { 0 } else { 2 });
    }

    #[test]
    fn weight_is_subadditive((a, b, _c) in triple()) {
        let ab = a.multiply(&b).unwrap();
        prop_assert!(ab.weight() <= a.weight() + b.weight());
        prop_assert!(a.multiply(&a).unwrap().is_identity_letters());
    }

    #[test]
    fn display_round_trips((a, _b, _c) in triple()) {
        let parsed: PauliProduct = a.to_string().parse().unwrap();
        prop_assert_eq!(parsed, a);
    }

    #[test]
    fn rules_commute_with_translation(rule in 0usize..5, n in 3usize..12, shift in -20i64..20, codes in prop::collection::vec(0u8..4, 12)) {
        let t = Cqca::builtin(cqca::BUILTIN_RULES[rule]).unwrap();
        let p = word(&codes[..n], 0);
        let lhs = t.apply(&p.translate(shift)).unwrap();
        let rhs = t.apply(&p).unwrap().translate(shift);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ring_maps_are_clifford(rule in 0usize..5, n in 1usize..10) {
        let t = Cqca::builtin(cqca::BUILTIN_RULES[rule]).unwrap();
        prop_assert!(t.ring_map(n).unwrap().check_relations().is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `T^m = id` exactly when the period divides `m`.
    #[test]
    fn period_divides_identity_powers(k in 0usize..64, n in 3usize..9) {
        let rules = enumerate_radius1_rules(n);
        let t = &rules[k % rules.len()];
        if let Ok(l) = t.period_with_cap(n, 64) {
            let map = t.ring_map(n).unwrap();
            let gens: Vec<PauliProduct> = (0..n).flat_map(|q| [PauliProduct::x(n, q), PauliProduct::z(n, q)]).collect();
            let mut cur = gens.clone();
            for m in 1..=2 * l {
                cur = cur.iter().map(|p| map.conjugate(p).unwrap()).collect();
                prop_assert_eq!(cur == gens, m % l == 0, "m = {}, L = {}", m, l);
            }
        }
    }

    /// Measuring a group element is deterministic with the group's sign.
    #[test]
    fn measuring_a_stabilizer_is_deterministic(n in 1usize..6, edges in prop::collection::vec((0usize..6, 0usize..6), 0..8), pick in prop::collection::vec(any::<bool>(), 6)) {
        let edges: std::collections::BTreeSet<(usize, usize)> = edges.into_iter().filter(|(a, b)| a != b && *a < n && *b < n).map(|(a, b)| (a.min(b), a.max(b))).collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let mut code = StabilizerCode::graph_state(n, &edges).unwrap();
        let mut g = PauliProduct::identity(n);
        for (s, on) in code.stabilizers().to_vec().iter().zip(&pick) {
            if *on {
                g = g.multiply(s).unwrap();
            }
        }
        let before = code.clone();
        let mut rng = rng::stream(0, "prop");
        if g.is_identity_letters() {
            return Ok(());
        }
        let rec = code.measure_pauli(&g, None, &mut rng).unwrap();
        prop_assert!(rec.deterministic);
        prop_assert!(!rec.outcome);
        prop_assert!(StabilizerCode::codes_equal(&code, &before));
        prop_assert!(code.measure_pauli(&g, Some(true), &mut rng).is_err());
    }
}
