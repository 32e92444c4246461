// SPDX-License-Identifier: Apache-2.0

//! Sibling-first recursive numbering and the spanning tree it induces.
//!
//! SFR(v) first numbers every unnumbered successor of `v` as a child, in
//! out-edge order, and only then recurses into those children in the same
//! order. The root is numbered 1 before the first call. A classic pre-order
//! DFS numbering is provided alongside for comparison.
//!
//! Both traversals run on an explicit stack so long chains cannot overflow the
//! call stack; the visiting order is identical to the recursive formulation.

use std::sync::Arc;

use crate::graph::{NodeId, NodeIndex, OrderedDigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Traversal {
    Sfr,
    Dfs,
}

impl std::str::FromStr for Traversal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sfr" => Ok(Traversal::Sfr),
            "dfs" => Ok(Traversal::Dfs),
            other => Err(format!("unknown traversal {other:?} (expected sfr or dfs)")),
        }
    }
}

/// Numbering plus rooted ordered spanning tree over the reachable nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SfrResult {
    index: Arc<NodeIndex>,
    /// 0 marks an unnumbered (unreachable) node.
    number: Vec<u32>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
}

pub fn sfr_number(g: &OrderedDigraph) -> SfrResult {
    number(g, Traversal::Sfr)
}

pub fn dfs_number(g: &OrderedDigraph) -> SfrResult {
    number(g, Traversal::Dfs)
}

pub fn number(g: &OrderedDigraph, traversal: Traversal) -> SfrResult {
    let n = g.len();
    let mut t = SfrResult {
        index: g.index().clone(),
        number: vec![0; n],
        parent: vec![None; n],
        children: vec![Vec::new(); n],
        order: Vec::with_capacity(n),
    };
    match traversal {
        Traversal::Sfr => t.run_sfr(g),
        Traversal::Dfs => t.run_dfs(g),
    }
    t
}

impl SfrResult {
    fn assign(&mut self, v: usize) {
        self.order.push(v);
        self.number[v] = self.order.len() as u32;
    }

    fn run_sfr(&mut self, g: &OrderedDigraph) {
        let root = g.root_ix();
        self.assign(root);
        self.number_children(g, root);
        // (node, next child position to recurse into)
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if next == self.children[v].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let w = self.children[v][next];
            self.number_children(g, w);
            stack.push((w, 0));
        }
    }

    fn number_children(&mut self, g: &OrderedDigraph, v: usize) {
        for &w in g.successors(v) {
            if self.number[w] == 0 {
                self.parent[w] = Some(v);
                self.children[v].push(w);
                self.assign(w);
            }
        }
    }

    fn run_dfs(&mut self, g: &OrderedDigraph) {
        let root = g.root_ix();
        self.assign(root);
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            let succ = g.successors(v);
            if next == succ.len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let w = succ[next];
            if self.number[w] == 0 {
                self.parent[w] = Some(v);
                self.children[v].push(w);
                self.assign(w);
                stack.push((w, 0));
            }
        }
    }

    /// Count of numbered nodes.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn index(&self) -> &Arc<NodeIndex> {
        &self.index
    }

    pub fn number(&self, id: NodeId) -> Option<u32> {
        self.index.ix(id).and_then(|i| self.number_ix(i))
    }

    pub fn number_ix(&self, ix: usize) -> Option<u32> {
        match self.number[ix] {
            0 => None,
            k => Some(k),
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        let ix = self.index.ix(id)?;
        self.parent[ix].map(|p| self.index.id(p))
    }

    pub fn parent_ix(&self, ix: usize) -> Option<usize> {
        self.parent[ix]
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.index
            .ix(id)
            .map(|i| self.children[i].iter().map(|&c| self.index.id(c)).collect())
            .unwrap_or_default()
    }

    pub fn children_ix(&self, ix: usize) -> &[usize] {
        &self.children[ix]
    }

    /// Node ids in numbering order.
    pub fn order(&self) -> Vec<NodeId> {
        self.order.iter().map(|&i| self.index.id(i)).collect()
    }

    pub fn order_ix(&self) -> &[usize] {
        &self.order
    }

    pub fn root_ix(&self) -> usize {
        self.order[0]
    }

    /// The node numbered `k` (1-based).
    pub fn node_numbered(&self, k: u32) -> Option<NodeId> {
        let k = usize::try_from(k).ok()?;
        (k >= 1).then(|| self.order.get(k - 1)).flatten().map(|&i| self.index.id(i))
    }

    pub fn is_tree_edge_ix(&self, src: usize, dst: usize) -> bool {
        self.parent[dst] == Some(src)
    }

    /// Whether `a` is an ancestor of (or equal to) `b` in the tree.
    pub fn is_ancestor_ix(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parent[c];
        }
        false
    }

    /// Dense indices of the subtree rooted at `ix`, in pre-order.
    pub fn subtree_ix(&self, ix: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![ix];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }
}
