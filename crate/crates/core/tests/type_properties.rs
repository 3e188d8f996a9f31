mod common;

use common::{consistent_oracle, random_hierarchy, random_type};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tracegen_core::types::GradualType;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn consistency_matches_closure_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 8);
        for _ in 0..50 {
            let s = random_type(&mut rng, &h, 2);
            let t = random_type(&mut rng, &h, 2);
            prop_assert_eq!(h.is_consistent(&s, &t), consistent_oracle(&h, &s, &t), "{:?} ~ {:?}", s, t);
        }
    }

    #[test]
    fn reflexive_and_any_bilateral(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 8);
        let t = random_type(&mut rng, &h, 2);
        prop_assert!(h.is_consistent(&t, &t));
        prop_assert!(h.is_consistent(&t, &GradualType::Any));
        prop_assert!(h.is_consistent(&GradualType::Any, &t));
    }

    #[test]
    fn unify_is_idempotent_and_preserves_consistency(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 8);
        let s = random_type(&mut rng, &h, 3);
        let t = random_type(&mut rng, &h, 2);
        let u = h.unify(&s);
        prop_assert_eq!(h.unify(&u), u.clone());
        prop_assert_eq!(h.is_consistent(&u, &t), h.is_consistent(&s, &t));
    }

    #[test]
    fn union_cap_bounds_members(seed in any::<u64>(), cap in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 8);
        let mut acc = GradualType::Any;
        for _ in 0..12 {
            let t = random_type(&mut rng, &h, 1);
            let next = h.union_with_cap(&acc, &t, cap);
            prop_assert!(next.members().len() <= cap);
            // existing members survive
            if !acc.is_any() {
                for m in h.unify(&acc).members() {
                    prop_assert!(next.members().contains(m));
                }
            }
            acc = next;
        }
    }
}
