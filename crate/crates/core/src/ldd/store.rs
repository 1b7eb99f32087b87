use std::collections::HashMap;

use serde::Serialize;

use super::LddError;

/// Handle to a hash-consed node. Equal handles denote equal sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(pub(crate) u32);

/// The empty set.
pub const FALSE_NODE: NodeRef = NodeRef(0);
/// The set holding only the empty vector.
pub const TRUE_NODE: NodeRef = NodeRef(1);

impl NodeRef {
    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub value: u32,
    pub down: NodeRef,
    pub right: NodeRef,
}

pub const MIN_TABLE_SIZE: u64 = 1 << 18;
pub const MAX_TABLE_SIZE: u64 = 1 << 32;
pub const DEFAULT_NODE_TABLE: u64 = 1 << 22;
pub const DEFAULT_CACHE: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreConfig {
    pub node_table: u64,
    pub cache: u64,
    pub cache_enabled: bool,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            node_table: DEFAULT_NODE_TABLE,
            cache: DEFAULT_CACHE,
            cache_enabled: true,
        }
    }
}

impl StoreConfig {
    pub fn validate(&self) -> Result<(), LddError> {
        for (what, v) in [("node table", self.node_table), ("operation cache", self.cache)] {
            if !(MIN_TABLE_SIZE..=MAX_TABLE_SIZE).contains(&v) {
                return Err(LddError::InvalidConfig(format!("{what} size {v} outside [2^18, 2^32]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StoreStats {
    pub nodes: u64,
    pub cache_entries: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_clears: u64,
}

pub(crate) const OP_UNION: u8 = 1;
pub(crate) const OP_MINUS: u8 = 2;
pub(crate) const OP_INTERSECT: u8 = 3;
pub(crate) const OP_PROJECT: u8 = 4;
pub(crate) const OP_MATCH: u8 = 5;
pub(crate) const OP_NEXT: u8 = 6;

type CacheKey = (u8, u32, NodeRef, NodeRef);

/// Owner of all nodes of one run. Nodes are never freed individually.
pub struct LddStore {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeRef>,
    cache: HashMap<CacheKey, NodeRef>,
    metas: HashMap<Vec<u8>, Vec<u32>>,
    next_meta: u32,
    config: StoreConfig,
    stats: StoreStats,
}

impl Default for LddStore {
    fn default() -> Self {
        Self::new(StoreConfig::default()).unwrap()
    }
}

impl LddStore {
    pub fn new(config: StoreConfig) -> Result<Self, LddError> {
        config.validate()?;
        let terminal = Node {
            value: 0,
            down: FALSE_NODE,
            right: FALSE_NODE,
        };
        Ok(Self {
            nodes: vec![terminal, terminal],
            unique: HashMap::new(),
            cache: HashMap::new(),
            metas: HashMap::new(),
            next_meta: 0,
            config,
            stats: StoreStats::default(),
        })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn stats(&self) -> StoreStats {
        StoreStats {
            nodes: self.nodes.len() as u64 - 2,
            cache_entries: self.cache.len() as u64,
            ..self.stats
        }
    }

    pub(crate) fn node(&self, r: NodeRef) -> Node {
        debug_assert!(!r.is_terminal());
        self.nodes[r.0 as usize]
    }

    /// Value, down and right of a non-terminal node.
    pub fn parts(&self, r: NodeRef) -> (u32, NodeRef, NodeRef) {
        assert!(!r.is_terminal(), "terminal node has no parts");
        let n = self.node(r);
        (n.value, n.down, n.right)
    }

    pub fn mk(&mut self, value: u32, down: NodeRef, right: NodeRef) -> Result<NodeRef, LddError> {
        assert!(down != FALSE_NODE, "mk: down edge must not be the empty set");
        assert!(right != TRUE_NODE, "mk: right edge cannot be the terminal TRUE");
        if right != FALSE_NODE {
            let rv = self.node(right).value;
            assert!(value < rv, "mk: value {value} not below right value {rv}");
        }
        let key = Node { value, down, right };
        if let Some(&r) = self.unique.get(&key) {
            return Ok(r);
        }
        let limit = self.config.node_table.min(u32::MAX as u64);
        if self.nodes.len() as u64 >= limit {
            return Err(LddError::NodeTableFull(self.config.node_table));
        }
        let r = NodeRef(self.nodes.len() as u32);
        self.nodes.push(key);
        self.unique.insert(key, r);
        Ok(r)
    }

    /// Builds a right chain from ascending `(value, down)` pairs ending in `tail`.
    pub(crate) fn chain(&mut self, items: &[(u32, NodeRef)], tail: NodeRef) -> Result<NodeRef, LddError> {
        let mut r = tail;
        for &(v, d) in items.iter().rev() {
            if d != FALSE_NODE {
                r = self.mk(v, d, r)?;
            }
        }
        Ok(r)
    }

    pub(crate) fn cache_get(&mut self, key: CacheKey) -> Option<NodeRef> {
        if !self.config.cache_enabled {
            return None;
        }
        match self.cache.get(&key) {
            Some(&r) => {
                self.stats.cache_hits += 1;
                Some(r)
            }
            None => {
                self.stats.cache_misses += 1;
                None
            }
        }
    }

    pub(crate) fn cache_put(&mut self, key: CacheKey, r: NodeRef) {
        if !self.config.cache_enabled {
            return;
        }
        if self.cache.len() as u64 >= self.config.cache {
            self.cache.clear();
            self.stats.cache_clears += 1;
        }
        self.cache.insert(key, r);
    }

    /// Per-level cache discriminators for an operation parameterized by `key`.
    pub(crate) fn level_metas(&mut self, key: Vec<u8>, levels: usize) -> Vec<u32> {
        if let Some(m) = self.metas.get(&key) {
            return m.clone();
        }
        let ids: Vec<u32> = (0..levels as u32).map(|k| self.next_meta + k).collect();
        self.next_meta += levels as u32;
        self.metas.insert(key, ids.clone());
        ids
    }

    /// Vector length of a non-empty set; `None` for the empty set.
    pub fn depth(&self, mut r: NodeRef) -> Option<usize> {
        if r == FALSE_NODE {
            return None;
        }
        let mut d = 0;
        while r != TRUE_NODE {
            r = self.node(r).down;
            d += 1;
        }
        Some(d)
    }

    pub(crate) fn check_len(&self, r: NodeRef, len: usize) -> Result<(), LddError> {
        match self.depth(r) {
            Some(d) if d != len => Err(LddError::LengthMismatch {
                expected: len,
                found: d,
            }),
            _ => Ok(()),
        }
    }

    fn check_same(&self, a: NodeRef, b: NodeRef) -> Result<(), LddError> {
        match (self.depth(a), self.depth(b)) {
            (Some(x), Some(y)) if x != y => Err(LddError::LengthMismatch { expected: x, found: y }),
            _ => Ok(()),
        }
    }

    pub fn singleton(&mut self, v: &[u32]) -> Result<NodeRef, LddError> {
        let mut r = TRUE_NODE;
        for &x in v.iter().rev() {
            r = self.mk(x, r, FALSE_NODE)?;
        }
        Ok(r)
    }

    pub fn from_vectors<'a>(&mut self, vs: impl IntoIterator<Item = &'a [u32]>) -> Result<NodeRef, LddError> {
        let mut all: Vec<Vec<u32>> = vs.into_iter().map(<[u32]>::to_vec).collect();
        all.sort_unstable();
        all.dedup();
        self.from_sorted(&all)
    }

    /// Builds a set bottom-up from strictly ascending vectors of equal length,
    /// allocating only the nodes of the result.
    pub fn from_sorted(&mut self, vs: &[Vec<u32>]) -> Result<NodeRef, LddError> {
        let Some(first) = vs.first() else {
            return Ok(FALSE_NODE);
        };
        let len = first.len();
        if let Some(v) = vs.iter().find(|v| v.len() != len) {
            return Err(LddError::LengthMismatch {
                expected: len,
                found: v.len(),
            });
        }
        assert!(
            vs.windows(2).all(|w| w[0] < w[1]),
            "from_sorted: input not strictly ascending"
        );
        self.build_sorted(vs, 0)
    }

    fn build_sorted(&mut self, vs: &[Vec<u32>], depth: usize) -> Result<NodeRef, LddError> {
        if depth == vs[0].len() {
            return Ok(TRUE_NODE);
        }
        let mut items = Vec::new();
        let mut start = 0;
        while start < vs.len() {
            let v = vs[start][depth];
            let end = start + vs[start..].partition_point(|x| x[depth] == v);
            let d = self.build_sorted(&vs[start..end], depth + 1)?;
            items.push((v, d));
            start = end;
        }
        self.chain(&items, FALSE_NODE)
    }

    pub fn insert(&mut self, set: NodeRef, v: &[u32]) -> Result<NodeRef, LddError> {
        self.check_len(set, v.len())?;
        let s = self.singleton(v)?;
        self.union_rec(set, s)
    }

    pub fn member(&self, set: NodeRef, v: &[u32]) -> bool {
        let mut r = set;
        for &x in v {
            loop {
                if r.is_terminal() {
                    return false;
                }
                let n = self.node(r);
                if n.value == x {
                    r = n.down;
                    break;
                }
                if n.value > x {
                    return false;
                }
                r = n.right;
            }
        }
        r == TRUE_NODE
    }

    pub fn union(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        self.check_same(a, b)?;
        self.union_rec(a, b)
    }

    pub(crate) fn union_rec(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        if a == b || b == FALSE_NODE {
            return Ok(a);
        }
        if a == FALSE_NODE {
            return Ok(b);
        }
        let key = (OP_UNION, 0, a.min(b), a.max(b));
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let mut items = Vec::new();
        let (mut p, mut q) = (a, b);
        let tail = loop {
            if p == FALSE_NODE {
                break q;
            }
            if q == FALSE_NODE {
                break p;
            }
            let (x, y) = (self.node(p), self.node(q));
            if x.value < y.value {
                items.push((x.value, x.down));
                p = x.right;
            } else if y.value < x.value {
                items.push((y.value, y.down));
                q = y.right;
            } else {
                let d = self.union_rec(x.down, y.down)?;
                items.push((x.value, d));
                p = x.right;
                q = y.right;
            }
        };
        let r = self.chain(&items, tail)?;
        self.cache_put(key, r);
        Ok(r)
    }

    pub fn minus(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        self.check_same(a, b)?;
        self.minus_rec(a, b)
    }

    pub(crate) fn minus_rec(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        if a == b || a == FALSE_NODE {
            return Ok(FALSE_NODE);
        }
        if b == FALSE_NODE {
            return Ok(a);
        }
        let key = (OP_MINUS, 0, a, b);
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let mut items = Vec::new();
        let (mut p, mut q) = (a, b);
        let tail = loop {
            if p == FALSE_NODE || q == FALSE_NODE {
                break p;
            }
            let (x, y) = (self.node(p), self.node(q));
            if x.value < y.value {
                items.push((x.value, x.down));
                p = x.right;
            } else if y.value < x.value {
                q = y.right;
            } else {
                let d = self.minus_rec(x.down, y.down)?;
                items.push((x.value, d));
                p = x.right;
                q = y.right;
            }
        };
        let r = self.chain(&items, tail)?;
        self.cache_put(key, r);
        Ok(r)
    }

    pub fn intersect(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        self.check_same(a, b)?;
        self.intersect_rec(a, b)
    }

    fn intersect_rec(&mut self, a: NodeRef, b: NodeRef) -> Result<NodeRef, LddError> {
        if a == b {
            return Ok(a);
        }
        if a == FALSE_NODE || b == FALSE_NODE {
            return Ok(FALSE_NODE);
        }
        let key = (OP_INTERSECT, 0, a.min(b), a.max(b));
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let mut items = Vec::new();
        let (mut p, mut q) = (a, b);
        while p != FALSE_NODE && q != FALSE_NODE {
            let (x, y) = (self.node(p), self.node(q));
            if x.value < y.value {
                p = x.right;
            } else if y.value < x.value {
                q = y.right;
            } else {
                let d = self.intersect_rec(x.down, y.down)?;
                items.push((x.value, d));
                p = x.right;
                q = y.right;
            }
        }
        let r = self.chain(&items, FALSE_NODE)?;
        self.cache_put(key, r);
        Ok(r)
    }

    /// Restricts every vector to the positions where `mask` is set.
    pub fn project(&mut self, set: NodeRef, mask: &[bool]) -> Result<NodeRef, LddError> {
        self.check_len(set, mask.len())?;
        let mut key = vec![OP_PROJECT];
        key.extend(mask.iter().map(|&b| b as u8));
        let metas = self.level_metas(key, mask.len());
        // Position after which no mask bit is set.
        let last = mask.iter().rposition(|&b| b).map_or(0, |k| k + 1);
        self.project_rec(set, mask, 0, last, &metas)
    }

    fn project_rec(
        &mut self,
        a: NodeRef,
        mask: &[bool],
        level: usize,
        last: usize,
        metas: &[u32],
    ) -> Result<NodeRef, LddError> {
        if a == FALSE_NODE {
            return Ok(FALSE_NODE);
        }
        if level >= last {
            return Ok(TRUE_NODE);
        }
        let key = (OP_PROJECT, metas[level], a, FALSE_NODE);
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let mut p = a;
        let r = if mask[level] {
            let mut items = Vec::new();
            while p != FALSE_NODE {
                let n = self.node(p);
                let d = self.project_rec(n.down, mask, level + 1, last, metas)?;
                items.push((n.value, d));
                p = n.right;
            }
            self.chain(&items, FALSE_NODE)?
        } else {
            let mut acc = FALSE_NODE;
            while p != FALSE_NODE {
                let n = self.node(p);
                let d = self.project_rec(n.down, mask, level + 1, last, metas)?;
                acc = self.union_rec(acc, d)?;
                p = n.right;
            }
            acc
        };
        self.cache_put(key, r);
        Ok(r)
    }

    /// Vectors of `set` whose restriction to `mask` lies in `proj`.
    pub fn match_proj(&mut self, set: NodeRef, proj: NodeRef, mask: &[bool]) -> Result<NodeRef, LddError> {
        self.check_len(set, mask.len())?;
        self.check_len(proj, mask.iter().filter(|&&b| b).count())?;
        let mut key = vec![OP_MATCH];
        key.extend(mask.iter().map(|&b| b as u8));
        let metas = self.level_metas(key, mask.len());
        let last = mask.iter().rposition(|&b| b).map_or(0, |k| k + 1);
        self.match_rec(set, proj, mask, 0, last, &metas)
    }

    fn match_rec(
        &mut self,
        a: NodeRef,
        p: NodeRef,
        mask: &[bool],
        level: usize,
        last: usize,
        metas: &[u32],
    ) -> Result<NodeRef, LddError> {
        if a == FALSE_NODE || p == FALSE_NODE {
            return Ok(FALSE_NODE);
        }
        if level >= last {
            return Ok(a);
        }
        let key = (OP_MATCH, metas[level], a, p);
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let mut items = Vec::new();
        let mut x = a;
        if mask[level] {
            let mut y = p;
            while x != FALSE_NODE && y != FALSE_NODE {
                let (m, n) = (self.node(x), self.node(y));
                if m.value < n.value {
                    x = m.right;
                } else if n.value < m.value {
                    y = n.right;
                } else {
                    let d = self.match_rec(m.down, n.down, mask, level + 1, last, metas)?;
                    items.push((m.value, d));
                    x = m.right;
                    y = n.right;
                }
            }
        } else {
            while x != FALSE_NODE {
                let m = self.node(x);
                let d = self.match_rec(m.down, p, mask, level + 1, last, metas)?;
                items.push((m.value, d));
                x = m.right;
            }
        }
        let r = self.chain(&items, FALSE_NODE)?;
        self.cache_put(key, r);
        Ok(r)
    }

    pub fn sat_count(&self, set: NodeRef) -> u128 {
        fn count(s: &LddStore, r: NodeRef, memo: &mut HashMap<NodeRef, u128>) -> u128 {
            if r == FALSE_NODE {
                return 0;
            }
            if r == TRUE_NODE {
                return 1;
            }
            if let Some(&c) = memo.get(&r) {
                return c;
            }
            let mut total = 0;
            let mut p = r;
            while p != FALSE_NODE {
                let n = s.node(p);
                total += count(s, n.down, memo);
                p = n.right;
            }
            memo.insert(r, total);
            total
        }
        count(self, set, &mut HashMap::new())
    }

    /// Calls `f` on each vector in lexicographic order; stops early on `false`.
    pub fn for_each(&self, set: NodeRef, f: &mut dyn FnMut(&[u32]) -> bool) {
        fn walk(s: &LddStore, r: NodeRef, prefix: &mut Vec<u32>, f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
            if r == TRUE_NODE {
                return f(prefix);
            }
            let mut p = r;
            while p != FALSE_NODE {
                let n = s.node(p);
                prefix.push(n.value);
                let go_on = walk(s, n.down, prefix, f);
                prefix.pop();
                if !go_on {
                    return false;
                }
                p = n.right;
            }
            true
        }
        walk(self, set, &mut Vec::new(), f);
    }

    pub fn enumerate(&self, set: NodeRef) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        self.for_each(set, &mut |v| {
            out.push(v.to_vec());
            true
        });
        out
    }

    /// The lexicographically smallest `limit` vectors.
    pub fn enumerate_first(&self, set: NodeRef, limit: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        if limit == 0 {
            return out;
        }
        self.for_each(set, &mut |v| {
            out.push(v.to_vec());
            out.len() < limit
        });
        out
    }

    /// Number of distinct non-terminal nodes reachable from `set`.
    pub fn node_count(&self, set: NodeRef) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![set];
        while let Some(r) = stack.pop() {
            if r.is_terminal() || !seen.insert(r) {
                continue;
            }
            let n = self.node(r);
            stack.push(n.down);
            stack.push(n.right);
        }
        seen.len()
    }
}
