mod common;

use common::{fuzz, rng};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_tactic_sequences_are_sound(seed in any::<u64>()) {
        let run = fuzz::run(&mut rng(seed), 12);
        prop_assert!(run.reached_end);
        prop_assert!(run.valid, "extracted program violates the root: {}", run.program);
    }
}

#[test]
fn fuzzer_exercises_tactics() {
    let mut accepted = 0;
    let mut rejected = 0;
    for seed in 0..20 {
        let run = fuzz::run(&mut rng(seed), 12);
        accepted += run.accepted;
        rejected += run.rejected;
    }
    assert!(accepted > 20, "only {accepted} tactics accepted");
    assert!(rejected > 0);
}
