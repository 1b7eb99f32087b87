use super::store::{LddStore, NodeRef, FALSE_NODE, OP_NEXT, TRUE_NODE};
use super::LddError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    /// Neither read nor written: copied from the source.
    Copy,
    /// Read only: the source value must match and is kept.
    Read,
    /// Written only: any source value, replaced by the target value.
    Write,
    /// Read and written: matched, then replaced.
    ReadWrite,
}

/// The learned part of one group's transition relation.
///
/// `rel` holds source projections concatenated with target projections.
/// A second, interleaved copy (per position: source value if read, then
/// target value if written) drives the relational product in
/// [`LddStore::next`].
#[derive(Clone, Debug)]
pub struct PartialRelation {
    pub group: usize,
    pub rel: NodeRef,
    pub visited_sources: NodeRef,
    pub read_mask: Vec<bool>,
    pub write_mask: Vec<bool>,
    interleaved: NodeRef,
    slots: Vec<Slot>,
    metas: Vec<u32>,
    pairs: u64,
}

impl PartialRelation {
    pub fn new(store: &mut LddStore, group: usize, read_mask: &[bool], write_mask: &[bool]) -> Self {
        assert_eq!(read_mask.len(), write_mask.len(), "mask lengths differ");
        let slots: Vec<Slot> = read_mask
            .iter()
            .zip(write_mask)
            .map(|(&r, &w)| match (r, w) {
                (false, false) => Slot::Copy,
                (true, false) => Slot::Read,
                (false, true) => Slot::Write,
                (true, true) => Slot::ReadWrite,
            })
            .collect();
        let mut key = vec![OP_NEXT];
        key.extend(slots.iter().map(|s| *s as u8));
        let metas = store.level_metas(key, slots.len());
        Self {
            group,
            rel: FALSE_NODE,
            visited_sources: FALSE_NODE,
            read_mask: read_mask.to_vec(),
            write_mask: write_mask.to_vec(),
            interleaved: FALSE_NODE,
            slots,
            metas,
            pairs: 0,
        }
    }

    pub fn source_len(&self) -> usize {
        self.read_mask.iter().filter(|&&b| b).count()
    }

    pub fn target_len(&self) -> usize {
        self.write_mask.iter().filter(|&&b| b).count()
    }

    /// Number of (source, target) pairs inserted, duplicates included.
    pub fn inserted_pairs(&self) -> u64 {
        self.pairs
    }

    /// Adds `src → dst` for every `dst`. Visited sources are tracked separately.
    pub fn insert(&mut self, store: &mut LddStore, src: &[u32], dsts: &[Vec<u32>]) -> Result<(), LddError> {
        self.insert_all(store, &[(src.to_vec(), dsts.to_vec())])
    }

    /// Adds a batch of `(src, targets)` entries with one union per encoding.
    pub fn insert_all(&mut self, store: &mut LddStore, entries: &[(Vec<u32>, Vec<Vec<u32>>)]) -> Result<(), LddError> {
        let (sl, tl) = (self.source_len(), self.target_len());
        let mut concat = Vec::new();
        let mut inter = Vec::new();
        for (src, dsts) in entries {
            if src.len() != sl {
                return Err(LddError::LengthMismatch {
                    expected: sl,
                    found: src.len(),
                });
            }
            for d in dsts {
                if d.len() != tl {
                    return Err(LddError::LengthMismatch {
                        expected: tl,
                        found: d.len(),
                    });
                }
                let mut c = src.clone();
                c.extend_from_slice(d);
                concat.push(c);

                let mut v = Vec::with_capacity(sl + tl);
                let (mut si, mut ti) = (0, 0);
                for slot in &self.slots {
                    if matches!(slot, Slot::Read | Slot::ReadWrite) {
                        v.push(src[si]);
                        si += 1;
                    }
                    if matches!(slot, Slot::Write | Slot::ReadWrite) {
                        v.push(d[ti]);
                        ti += 1;
                    }
                }
                inter.push(v);
                self.pairs += 1;
            }
        }
        if concat.is_empty() {
            return Ok(());
        }
        for (set, vs) in [(&mut self.rel, &mut concat), (&mut self.interleaved, &mut inter)] {
            vs.sort_unstable();
            vs.dedup();
            let fresh = store.from_sorted(vs)?;
            *set = store.union(*set, fresh)?;
        }
        Ok(())
    }

    /// Records read projections as learned, enabled or not.
    pub fn mark_visited(&mut self, store: &mut LddStore, sources: NodeRef) -> Result<(), LddError> {
        self.visited_sources = store.union(self.visited_sources, sources)?;
        Ok(())
    }

    /// The learned sources that have at least one target.
    pub fn enabled_sources(&self, store: &mut LddStore) -> Result<NodeRef, LddError> {
        let n = self.source_len() + self.target_len();
        let mask: Vec<bool> = (0..n).map(|k| k < self.source_len()).collect();
        store.project(self.rel, &mask)
    }
}

impl LddStore {
    /// Successors of `set` under the learned relation; positions the group
    /// neither reads nor writes are copied from the source vector.
    pub fn next(&mut self, set: NodeRef, pr: &PartialRelation) -> Result<NodeRef, LddError> {
        self.check_len(set, pr.slots.len())?;
        self.next_rec(set, pr.interleaved, pr, 0)
    }

    fn next_rec(&mut self, s: NodeRef, r: NodeRef, pr: &PartialRelation, level: usize) -> Result<NodeRef, LddError> {
        if s == FALSE_NODE || r == FALSE_NODE {
            return Ok(FALSE_NODE);
        }
        if r == TRUE_NODE && pr.slots[level..].iter().all(|x| *x == Slot::Copy) {
            return Ok(s);
        }
        let key = (OP_NEXT, pr.metas[level], s, r);
        if let Some(res) = self.cache_get(key) {
            return Ok(res);
        }
        let mut items = Vec::new();
        let result = match pr.slots[level] {
            Slot::Copy => {
                let mut p = s;
                while p != FALSE_NODE {
                    let n = self.node(p);
                    let d = self.next_rec(n.down, r, pr, level + 1)?;
                    items.push((n.value, d));
                    p = n.right;
                }
                self.chain(&items, FALSE_NODE)?
            }
            Slot::Read => {
                let (mut p, mut q) = (s, r);
                while p != FALSE_NODE && q != FALSE_NODE {
                    let (x, y) = (self.node(p), self.node(q));
                    if x.value < y.value {
                        p = x.right;
                    } else if y.value < x.value {
                        q = y.right;
                    } else {
                        let d = self.next_rec(x.down, y.down, pr, level + 1)?;
                        items.push((x.value, d));
                        p = x.right;
                        q = y.right;
                    }
                }
                self.chain(&items, FALSE_NODE)?
            }
            Slot::Write => {
                let mut below = FALSE_NODE;
                let mut p = s;
                while p != FALSE_NODE {
                    let n = self.node(p);
                    below = self.union_rec(below, n.down)?;
                    p = n.right;
                }
                let mut q = r;
                while q != FALSE_NODE {
                    let t = self.node(q);
                    let d = self.next_rec(below, t.down, pr, level + 1)?;
                    items.push((t.value, d));
                    q = t.right;
                }
                self.chain(&items, FALSE_NODE)?
            }
            Slot::ReadWrite => {
                // target value -> union of results over matching source values
                let mut acc: std::collections::BTreeMap<u32, NodeRef> = Default::default();
                let (mut p, mut q) = (s, r);
                while p != FALSE_NODE && q != FALSE_NODE {
                    let (x, y) = (self.node(p), self.node(q));
                    if x.value < y.value {
                        p = x.right;
                    } else if y.value < x.value {
                        q = y.right;
                    } else {
                        let mut t = y.down;
                        while t != FALSE_NODE {
                            let tn = self.node(t);
                            let d = self.next_rec(x.down, tn.down, pr, level + 1)?;
                            let e = acc.entry(tn.value).or_insert(FALSE_NODE);
                            *e = self.union_rec(*e, d)?;
                            t = tn.right;
                        }
                        p = x.right;
                        q = y.right;
                    }
                }
                items.extend(acc);
                self.chain(&items, FALSE_NODE)?
            }
        };
        self.cache_put(key, result);
        Ok(result)
    }
}
