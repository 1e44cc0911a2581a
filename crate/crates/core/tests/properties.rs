//! Randomized invariants of the combinatorial layer.

use critset::arrangement::{ArrangementFamily, DiscriminantMembership, FiberPoint};
use critset::linalg::QMat;
use critset::rational::CQ;
use proptest::prelude::*;

fn family_strategy() -> impl Strategy<Value = ArrangementFamily> {
    (1usize..=2, 0usize..=1)
        .prop_flat_map(|(k, extra)| {
            let n = k + 1 + extra;
            (
                Just(k),
                Just(n),
                proptest::collection::vec(-2i64..=2, k * n),
            )
        })
        .prop_filter_map("B must have full rank and no zero column", |(k, n, ent)| {
            let mut b = QMat::zeros(k, n);
            for i in 0..k {
                for j in 0..n {
                    b[(i, j)] = CQ::from_int(ent[i * n + j]);
                }
            }
            ArrangementFamily::new(k, n, b, None).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_are_minimal_dependencies(fam in family_strategy()) {
        for c in fam.circuits() {
            // The member set itself is dependent...
            prop_assert!(!fam.is_independent(&c.members));
            // ...while every proper subset is independent.
            for drop in 0..c.members.len() {
                let mut sub = c.members.clone();
                sub.remove(drop);
                prop_assert!(fam.is_independent(&sub));
            }
            // lambda is supported on the circuit, normalized, and lies in
            // the kernel of B.
            let first = c.members[0];
            prop_assert_eq!(c.lambda[first].clone(), CQ::one());
            for j in 0..fam.n {
                if !c.members.contains(&j) {
                    prop_assert!(c.lambda[j].is_zero());
                }
            }
            for i in 0..fam.k {
                let mut s = CQ::zero();
                for j in 0..fam.n {
                    let t = &fam.b[(i, j)] * &c.lambda[j];
                    s += &t;
                }
                prop_assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn no_circuit_contains_another(fam in family_strategy()) {
        let circuits = fam.circuits();
        for (i, c) in circuits.iter().enumerate() {
            for (j, d) in circuits.iter().enumerate() {
                if i != j {
                    prop_assert!(!c.members.iter().all(|m| d.members.contains(m)));
                }
            }
        }
    }

    #[test]
    fn discriminant_detects_vanishing_forms(fam in family_strategy(), base in -5i64..=5) {
        let circuits = fam.circuits();
        if circuits.is_empty() {
            return Ok(());
        }
        // Force the first circuit's form to vanish: its members all share
        // x_j = 0 except the pivot, which we solve for (here everything is
        // zero, so f_C = 0 trivially).
        let x = FiberPoint { x: vec![CQ::zero(); fam.n] };
        match fam.discriminant_membership(&x) {
            DiscriminantMembership::On { violating } => {
                prop_assert!(!violating.is_empty());
            }
            DiscriminantMembership::Off => prop_assert!(false, "zero fiber must be on the discriminant"),
        }

        // A point where every f_C is nonzero must be classified as off.
        let mut x = Vec::with_capacity(fam.n);
        for j in 0..fam.n {
            x.push(CQ::from_int(base + (j as i64 + 2) * (j as i64 + 3)));
        }
        let x = FiberPoint { x };
        let all_nonzero = circuits.iter().all(|c| !c.f_c(&x.x).is_zero());
        if all_nonzero {
            prop_assert_eq!(fam.discriminant_membership(&x), DiscriminantMembership::Off);
        }
    }

    #[test]
    fn chi_has_the_sign_of_minus_one_to_the_k(fam in family_strategy()) {
        // |chi| counts bounded chambers of a real generic fiber, so
        // (-1)^k chi is never negative.
        let chi = fam.euler_characteristic();
        let signed = if fam.k % 2 == 0 { chi } else { -chi };
        prop_assert!(signed >= 0, "chi = {} for k = {}", chi, fam.k);
        prop_assert_eq!(chi.unsigned_abs() as usize, fam.abs_chi());
    }
}
