mod common;

use cat_teleport::fock::truncation_rule;
use cat_teleport::protocol::seeded_rng;
use common::{backend_fidelity, random_pipeline};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_pipelines_agree(seed in any::<u64>()) {
        let (input, ops) = random_pipeline(&mut seeded_rng(seed, 0));
        let f = backend_fidelity(&input, &ops, truncation_rule(3.0) + 6);
        prop_assert!(f > 1.0 - 1e-8, "fidelity {} for {:?}", f, ops);
    }
}
