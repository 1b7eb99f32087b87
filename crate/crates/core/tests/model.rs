mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reach_core::model::{elaborate, parse_machine, print_machine, ModelError};
use reach_core::semantics::successors_of;

use common::*;

fn corpus_sources() -> Vec<String> {
    ["mutex.blite", "philosophers5.blite", "counters3.blite"]
        .iter()
        .map(|f| std::fs::read_to_string(models_dir().join(f)).unwrap())
        .collect()
}

fn round_trip(src: &str) {
    let m = parse_machine(src).unwrap();
    let printed = print_machine(&m);
    let again = parse_machine(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(again, m, "{printed}");
    assert_eq!(print_machine(&again), printed, "printer is not stable");
    let none = BTreeMap::new();
    assert_eq!(elaborate(&again, &none).unwrap(), elaborate(&m, &none).unwrap());
}

#[test]
fn corpus_round_trips() {
    for src in corpus_sources() {
        round_trip(&src);
    }
}

#[test]
fn normalization_preserves_successors_on_corpus() {
    for (name, em) in corpus() {
        if all_states(&em).len() > 50_000 {
            continue;
        }
        for s in all_states(&em) {
            for (g, o) in em.groups.iter().zip(&em.original_groups) {
                let a = successors_of(&em, g, &s);
                let b = successors_of(&em, o, &s);
                assert_eq!(a.is_ok(), b.is_ok(), "{name} {}", g.name);
                if let (Ok(a), Ok(b)) = (a, b) {
                    assert_eq!(a, b, "{name} {} at {s:?}", g.name);
                }
            }
        }
    }
}

#[test]
fn philosophers_shape() {
    let em = load("philosophers5.blite", &[]);
    assert_eq!(em.num_vars(), 10);
    assert_eq!(em.num_groups(), 15);
    assert_eq!(em.initial_states.len(), 1);
}

#[test]
fn errors_carry_positions() {
    let err = parse_machine("MACHINE M\nVARIABLES x\nINVARIANT x : 0..1\nINITIALISATION x := y\nOPERATIONS\nEND")
        .unwrap_err();
    match err {
        ModelError::UnknownIdentifier { pos, name } => {
            assert_eq!(name, "y");
            assert_eq!(pos.line, 4);
        }
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_machines_round_trip(seed in any::<u64>()) {
        round_trip(&random_machine_source(&mut ChaCha8Rng::seed_from_u64(seed)));
    }

    #[test]
    fn normalization_preserves_successors(seed in any::<u64>()) {
        let (_, em) = random_machine(&mut ChaCha8Rng::seed_from_u64(seed));
        for s in all_states(&em) {
            for (g, o) in em.groups.iter().zip(&em.original_groups) {
                prop_assert_eq!(successors_of(&em, g, &s).unwrap(), successors_of(&em, o, &s).unwrap());
            }
        }
    }
}
