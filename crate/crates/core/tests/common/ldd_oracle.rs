//! Random LDD instances checked against `BTreeSet` reference semantics.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reach_core::ldd::{LddStore, NodeRef, PartialRelation, FALSE_NODE};

type Set = BTreeSet<Vec<u32>>;

fn random_set(rng: &mut ChaCha8Rng, len: usize, max: u32) -> Set {
    let count = rng.gen_range(0..24);
    (0..count)
        .map(|_| (0..len).map(|_| rng.gen_range(0..max)).collect())
        .collect()
}

fn build(store: &mut LddStore, s: &Set) -> NodeRef {
    store.from_vectors(s.iter().map(|v| v.as_slice())).unwrap()
}

fn check(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn project_one(v: &[u32], mask: &[bool]) -> Vec<u32> {
    v.iter().zip(mask).filter(|(_, &m)| m).map(|(&x, _)| x).collect()
}

fn project(s: &Set, mask: &[bool]) -> Set {
    s.iter().map(|v| project_one(v, mask)).collect()
}

/// One random instance: canonicity, set laws, counting, projection,
/// matching and the relational product.
pub fn check_instance(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let len = rng.gen_range(1..=4);
    let max = rng.gen_range(1..=5);
    let a = random_set(rng, len, max);
    let b = random_set(rng, len, max);
    let mut st = LddStore::default();
    let la = build(&mut st, &a);
    let lb = build(&mut st, &b);

    // canonicity: insertion order does not matter
    let mut shuffled: Vec<&Vec<u32>> = a.iter().collect();
    shuffled.shuffle(rng);
    let mut one_by_one = FALSE_NODE;
    for v in shuffled {
        one_by_one = st.insert(one_by_one, v).map_err(|e| e.to_string())?;
    }
    check(one_by_one == la, "insertion order changed the node")?;
    check((la == lb) == (a == b), "node equality differs from set equality")?;

    let u = st.union(la, lb).unwrap();
    let m = st.minus(la, lb).unwrap();
    let i = st.intersect(la, lb).unwrap();
    check(st.enumerate(u).into_iter().collect::<Set>() == &a | &b, "union")?;
    check(st.enumerate(m).into_iter().collect::<Set>() == &a - &b, "minus")?;
    check(st.enumerate(i).into_iter().collect::<Set>() == &a & &b, "intersect")?;
    check(st.union(lb, la).unwrap() == u, "union commutes")?;
    check(st.union(la, la).unwrap() == la, "union idempotent")?;
    check(st.minus(la, la).unwrap() == FALSE_NODE, "a minus a")?;
    let back = st.union(m, i).unwrap();
    check(back == la, "(a-b) ∪ (a∩b) = a")?;
    let mb = st.minus(m, lb).unwrap();
    check(mb == m, "(a-b)-b = a-b")?;

    check(st.sat_count(u) == (&a | &b).len() as u128, "sat_count")?;
    check(
        st.enumerate(la) == a.iter().cloned().collect::<Vec<_>>(),
        "enumerate order",
    )?;
    for v in &b {
        check(st.member(la, v) == a.contains(v), "member")?;
    }

    let mask: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
    let p = st.project(la, &mask).unwrap();
    let pa = project(&a, &mask);
    check(st.enumerate(p).into_iter().collect::<Set>() == pa, "project")?;

    let pb = project(&b, &mask);
    let lpb = build(&mut st, &pb);
    let hit = st.match_proj(la, lpb, &mask).unwrap();
    let want: Set = a
        .iter()
        .filter(|v| pb.contains(&project_one(v, &mask)))
        .cloned()
        .collect();
    check(st.enumerate(hit).into_iter().collect::<Set>() == want, "match_proj")?;

    // relational product
    let read: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
    let write: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
    let (nr, nw) = (
        read.iter().filter(|&&x| x).count(),
        write.iter().filter(|&&x| x).count(),
    );
    let mut pr = PartialRelation::new(&mut st, 0, &read, &write);
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..10) {
        let src: Vec<u32> = (0..nr).map(|_| rng.gen_range(0..max)).collect();
        let dsts: Vec<Vec<u32>> = (0..rng.gen_range(0..3))
            .map(|_| (0..nw).map(|_| rng.gen_range(0..max)).collect())
            .collect();
        pr.insert(&mut st, &src, &dsts).map_err(|e| e.to_string())?;
        pairs.extend(dsts.into_iter().map(|d| (src.clone(), d)));
    }
    let got: Set = {
        let n = st.next(la, &pr).unwrap();
        st.enumerate(n).into_iter().collect()
    };
    let mut want = Set::new();
    for s in &a {
        let sp = project_one(s, &read);
        for (src, d) in &pairs {
            if *src == sp {
                let mut t = s.clone();
                let mut it = d.iter();
                for k in 0..len {
                    if write[k] {
                        t[k] = *it.next().unwrap();
                    }
                }
                want.insert(t);
            }
        }
    }
    check(got == want, "next")?;
    Ok(())
}
