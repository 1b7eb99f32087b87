mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reach_core::ldd::{LddStore, StoreConfig, FALSE_NODE, TRUE_NODE};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn algebra_matches_reference_sets(seed in any::<u64>()) {
        let r = common::ldd_oracle::check_instance(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn cache_does_not_change_results(vs in prop::collection::vec(prop::collection::vec(0u32..4, 3), 0..30),
                                     ws in prop::collection::vec(prop::collection::vec(0u32..4, 3), 0..30)) {
        let run = |cache_enabled: bool| {
            let mut st = LddStore::new(StoreConfig { cache_enabled, ..StoreConfig::default() }).unwrap();
            let a = st.from_vectors(vs.iter().map(|v| v.as_slice())).unwrap();
            let b = st.from_vectors(ws.iter().map(|v| v.as_slice())).unwrap();
            let u = st.union(a, b).unwrap();
            let m = st.minus(u, b).unwrap();
            (st.enumerate(u), st.enumerate(m))
        };
        prop_assert_eq!(run(true), run(false));
    }
}

#[test]
fn terminals() {
    let mut st = LddStore::default();
    assert_eq!(st.sat_count(FALSE_NODE), 0);
    assert_eq!(st.sat_count(TRUE_NODE), 1);
    assert_eq!(st.union(FALSE_NODE, TRUE_NODE).unwrap(), TRUE_NODE);
    assert_eq!(st.minus(TRUE_NODE, TRUE_NODE).unwrap(), FALSE_NODE);
    assert_eq!(st.enumerate(TRUE_NODE), vec![Vec::<u32>::new()]);
}

#[test]
fn large_set_builds_without_garbage() {
    let mut st = LddStore::default();
    let vs: Vec<Vec<u32>> = (0..100u32).flat_map(|x| (0..100u32).map(move |y| vec![x, y])).collect();
    let s = st.from_vectors(vs.iter().map(|v| v.as_slice())).unwrap();
    assert_eq!(st.sat_count(s), 10_000);
    // one shared inner chain of 100 nodes plus the top chain
    assert_eq!(st.stats().nodes, 200);
}
