mod common;

use common::*;
use proptest::prelude::*;
use qrefine::lattice::Tolerances;

fn check_family(seed: u64, d: usize) -> Result<(), TestCaseError> {
    let o = Ops::new(Tolerances::default());
    let mut r = rng(seed);
    let [a, b, c] = rand_triple(&mut r, d);
    for (name, f) in sasaki_identities() {
        for (k, claim) in f(&o, &a, &b, &c).iter().enumerate() {
            prop_assert!(claim.holds(&o), "{name} #{k} fails in dim {d} (seed {seed})");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sasaki_identities_dim2(seed in any::<u64>()) { check_family(seed, 2)?; }

    #[test]
    fn sasaki_identities_dim4(seed in any::<u64>()) { check_family(seed, 4)?; }

    #[test]
    fn sasaki_identities_dim8(seed in any::<u64>()) { check_family(seed, 8)?; }
}
