use std::collections::HashSet;
use std::fmt::Write;

use super::store::{LddStore, NodeRef, FALSE_NODE, TRUE_NODE};

impl LddStore {
    /// Graphviz rendering: value-labelled boxes, solid down edges, dashed
    /// right edges. Node ids are store indices, so output is stable.
    pub fn to_dot(&self, root: NodeRef) -> String {
        let mut out = String::from("digraph ldd {\n  node [shape=box];\n");
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        let mut nodes = Vec::new();
        while let Some(r) = stack.pop() {
            if r.is_terminal() || !seen.insert(r) {
                continue;
            }
            nodes.push(r);
            let (_, down, right) = self.parts(r);
            stack.push(right);
            stack.push(down);
        }
        nodes.sort();
        if root == FALSE_NODE {
            writeln!(out, "  n0 [label=\"∅\"];").unwrap();
        }
        let mut uses_true = root == TRUE_NODE;
        for &n in &nodes {
            let (value, down, right) = self.parts(n);
            writeln!(out, "  n{} [label=\"{value}\"];", n.index()).unwrap();
            writeln!(out, "  n{} -> n{};", n.index(), down.index()).unwrap();
            if right != FALSE_NODE {
                writeln!(out, "  n{} -> n{} [style=dashed];", n.index(), right.index()).unwrap();
                writeln!(out, "  {{ rank=same; n{}; n{}; }}", n.index(), right.index()).unwrap();
            }
            uses_true |= down == TRUE_NODE;
        }
        if uses_true {
            writeln!(out, "  n1 [label=\"{{ε}}\", shape=plaintext];").unwrap();
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_lists_every_node_once() {
        let mut s = LddStore::default();
        let set = s
            .from_vectors([&[0, 1, 0][..], &[1, 0, 0], &[0, 0, 1], &[0, 0, 0]])
            .unwrap();
        let dot = s.to_dot(set);
        assert_eq!(dot.matches("[label=\"").count(), s.node_count(set) + 1);
        assert_eq!(dot, s.to_dot(set));
        assert!(dot.contains("style=dashed"));
    }
}
