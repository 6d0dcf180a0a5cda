use logcoh::groebner::{buchberger, syzygy_module};
use logcoh::h2fast::{h2_basis, syzygy_operators};
use logcoh::pipeline::{frame_for, full_pipeline};
use logcoh::poly::{rat_int, check_reduced};
use logcoh::weyl::{weyl_gb, Exp, WeightVector, WeylOp, DEFAULT_B_DEGREE_CAP};
use logcoh::{Mono, Poly, Vars};
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((0u16..4, 0u16..4, -3i64..=3), 1..5).prop_map(|terms| {
        let vars = Vars::xy();
        Poly::from_terms(&vars, terms.into_iter().map(|(a, b, c)| (Mono([a, b, 0]), rat_int(c))))
    })
}

fn op() -> impl Strategy<Value = WeylOp> {
    prop::collection::vec((0u16..3, 0u16..3, 0u16..3, 0u16..3, -3i64..=3), 1..4).prop_map(|terms| {
        WeylOp::from_terms(2, terms.into_iter().map(|(a, b, c, d, k)| (Exp::new([a, b], [c, d]), rat_int(k))))
    })
}

/// Product of `n` lines through the origin with pairwise distinct slopes.
fn arrangement(max_lines: usize) -> impl Strategy<Value = (usize, Poly)> {
    prop::collection::btree_set((-3i64..=3, 1i64..=3), 2..=max_lines).prop_filter_map("parallel lines", |dirs| {
        let slopes: std::collections::BTreeSet<(i64, i64)> = dirs
            .iter()
            .map(|&(a, b)| {
                let g = num_integer::gcd(a, b);
                (a / g, b / g)
            })
            .collect();
        if slopes.len() != dirs.len() {
            return None;
        }
        let vars = Vars::xy();
        let mut f = Poly::one(&vars);
        for (a, b) in &dirs {
            let line = Poly::from_terms(&vars, [(Mono([1, 0, 0]), rat_int(*a)), (Mono([0, 1, 0]), rat_int(*b))]);
            f = &f * &line;
        }
        Some((dirs.len(), f))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn leibniz_rule(a in poly(), b in poly()) {
        for v in 0..2 {
            let lhs = (&a * &b).derive_index(v);
            let rhs = &(&a.derive_index(v) * &b) + &(&a * &b.derive_index(v));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn exact_division_and_gcd(a in poly(), b in poly()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!((&a * &b).div_exact(&b), Some(a.clone()));
        let g = a.gcd(&b);
        prop_assert!(a.div_exact(&g).is_some());
        prop_assert!(b.div_exact(&g).is_some());
    }

    #[test]
    fn weyl_associativity(p in op(), q in op(), r in op()) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
    }

    #[test]
    fn adjoint_is_an_involutive_anti_homomorphism(p in op(), q in op()) {
        prop_assert_eq!(p.adjoint().adjoint(), p.clone());
        prop_assert_eq!((&p * &q).adjoint(), &q.adjoint() * &p.adjoint());
    }

    #[test]
    fn action_is_a_module_structure(p in op(), q in op(), g in poly()) {
        prop_assert_eq!((&p * &q).apply(&g), p.apply(&q.apply(&g)));
    }

    #[test]
    fn commuting_past_a_variable(g in poly()) {
        for i in 0..2 {
            let c = WeylOp::d(2, i).commutator(&WeylOp::x(2, i));
            prop_assert_eq!(c.apply(&g), g.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn groebner_basis_is_closed(a in poly(), b in poly()) {
        let gb = buchberger(&[a.clone(), b.clone()]);
        prop_assert!(gb.s_pairs_reduce_to_zero());
        prop_assert!(gb.contains_poly(&a));
        prop_assert!(gb.contains_poly(&b));
        prop_assert!(gb.contains_poly(&(&a * &b)));
    }

    #[test]
    fn syzygies_annihilate(a in poly(), b in poly(), c in poly()) {
        let gens = [a, b, c];
        for s in syzygy_module(&gens) {
            prop_assert!(s.dot(&gens).is_zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn arrangement_h2_counts_lines((n, f) in arrangement(4)) {
        prop_assert!(check_reduced(&f).unwrap());
        let h = h2_basis(&f).unwrap();
        prop_assert_eq!(h.dim, n - 1);
        // L(f) = (q_x − p_y)·f for the operator of a syzygy (p, q, r)
        for l in syzygy_operators(&f).unwrap() {
            prop_assert!(l.apply(&f).div_exact(&f).is_some());
        }
        let adj: Vec<WeylOp> = h.operators.iter().map(WeylOp::adjoint).collect();
        prop_assert!(weyl_gb(&adj, &WeightVector::integration(2)).s_pairs_reduce_to_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn arrangement_betti_numbers((n, f) in arrangement(4)) {
        let (frame, _) = frame_for(&f, None).unwrap();
        let full = full_pipeline(&frame, DEFAULT_B_DEGREE_CAP).unwrap();
        prop_assert_eq!(full.dims(), [1, n, n - 1]);
    }
}
