// SPDX-License-Identifier: Apache-2.0

//! Deterministic control-flow graph fixtures.
//!
//! Construct fixtures mirror how a compiler orders successors: the true
//! branch before the false one, the loop exit before the loop body, switch
//! cases in code order. Random generators use a seeded ChaCha stream so the
//! same seed yields the same graph on every platform.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeRecord, GraphDocument, NodeRecord, OrderedDigraph};

pub const METHOD: &str = "main";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureKind {
    IfElse,
    /// `fallthrough[i]` makes branch `i + 1` flow into branch `i + 2`.
    Switch { branches: usize, fallthrough: Vec<bool> },
    WhileLoop,
    DoWhile,
    NestedLoops { depth: usize },
    Duplicated { fragment: Box<FixtureKind>, copies: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("a switch needs at least 2 branches, got {0}")]
    TooFewBranches(usize),
    #[error("a switch with {branches} branches takes {} fall-through flags, got {flags}", branches - 1)]
    FallthroughArity { branches: usize, flags: usize },
    #[error("loop nesting depth must be at least 1")]
    ZeroDepth,
    #[error("duplicated fixtures need at least 2 copies, got {0}")]
    TooFewCopies(usize),
    #[error("duplicated fixtures cannot nest")]
    NestedDuplicate,
}

/// Nodes are (name, out-edges by local position); local 0 is the entry.
struct Fragment {
    names: Vec<String>,
    succ: Vec<Vec<usize>>,
    code: Vec<String>,
}

impl Fragment {
    fn new() -> Self {
        Fragment { names: Vec::new(), succ: Vec::new(), code: Vec::new() }
    }

    fn add(&mut self, name: &str, code: &str) -> usize {
        self.names.push(name.to_string());
        self.code.push(code.to_string());
        self.succ.push(Vec::new());
        self.names.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.succ[a].push(b);
    }
}

fn construct(kind: &FixtureKind) -> Result<Fragment, FixtureError> {
    let mut f = Fragment::new();
    match kind {
        FixtureKind::IfElse => {
            let c = f.add("cond", "if (x > 0) {");
            let t = f.add("t", "  y = x;");
            let e = f.add("f", "} else { y = -x; }");
            let j = f.add("j", "return y;");
            f.edge(c, t);
            f.edge(c, e);
            f.edge(t, j);
            f.edge(e, j);
        }
        FixtureKind::Switch { branches, fallthrough } => {
            if *branches < 2 {
                return Err(FixtureError::TooFewBranches(*branches));
            }
            if fallthrough.len() != branches - 1 {
                return Err(FixtureError::FallthroughArity { branches: *branches, flags: fallthrough.len() });
            }
            let s = f.add("S", "switch (k) {");
            let cases: Vec<usize> = (1..=*branches)
                .map(|i| f.add(&format!("b{i}"), &format!("  case {i}: r = {i};")))
                .collect();
            for &b in &cases {
                f.edge(s, b);
            }
            for (i, &falls) in fallthrough.iter().enumerate() {
                if falls {
                    f.edge(cases[i], cases[i + 1]);
                }
            }
        }
        FixtureKind::WhileLoop => {
            let c = f.add("C", "while (i < n) {");
            let e = f.add("E", "return i;");
            let b = f.add("B", "  i++; }");
            f.edge(c, e);
            f.edge(c, b);
            f.edge(b, c);
        }
        FixtureKind::DoWhile => {
            let s = f.add("start", "do {");
            let b = f.add("body", "  i++;");
            let c = f.add("cond", "} while (i < n);");
            f.edge(s, b);
            f.edge(b, c);
            f.edge(c, s);
        }
        FixtureKind::NestedLoops { depth } => {
            if *depth == 0 {
                return Err(FixtureError::ZeroDepth);
            }
            // Bubblesort-like: entry, one header per level, an innermost body
            // that jumps back to the inner headers, and the outer exit.
            let entry = f.add("entry", "int i = 0;");
            let headers: Vec<usize> = (0..*depth)
                .map(|d| f.add(&format!("h{}", d + 1), &format!("{}for (...) {{", "  ".repeat(d))))
                .collect();
            let body = f.add("body", &format!("{}swap(a, j);", "  ".repeat(*depth)));
            let exit = f.add("exit", "return a;");
            f.edge(entry, headers[0]);
            for d in 0..*depth {
                let next = if d + 1 < *depth { headers[d + 1] } else { body };
                f.edge(headers[d], next);
                if d == 0 {
                    f.edge(headers[d], exit);
                }
            }
            for d in (0..*depth).rev() {
                f.edge(body, headers[d]);
            }
        }
        FixtureKind::Duplicated { .. } => return Err(FixtureError::NestedDuplicate),
    }
    Ok(f)
}

/// First node id of a construct; nested-loop fixtures count from 1.
fn base_id(kind: &FixtureKind) -> u64 {
    match kind {
        FixtureKind::NestedLoops { .. } => 1,
        _ => 0,
    }
}

pub fn generate(spec: &FixtureSpec) -> Result<OrderedDigraph, FixtureError> {
    generate_document(spec).map(|doc| {
        OrderedDigraph::from_document(doc).expect("fixtures are valid graphs").graph
    })
}

pub fn generate_kind(kind: &FixtureKind) -> Result<OrderedDigraph, FixtureError> {
    generate(&FixtureSpec { kind: kind.clone(), seed: 0 })
}

pub fn generate_document(spec: &FixtureSpec) -> Result<GraphDocument, FixtureError> {
    let (frag, base) = match &spec.kind {
        FixtureKind::Duplicated { fragment, copies } => (duplicated(fragment, *copies, spec.seed)?, 0),
        kind => (construct(kind)?, base_id(kind)),
    };
    Ok(to_document(&frag, base))
}

/// A dispatcher fanning out to `copies` identical fragments, each behind its
/// own padding chain of 1 to 3 nodes (lengths drawn from `seed`).
fn duplicated(fragment: &FixtureKind, copies: usize, seed: u64) -> Result<Fragment, FixtureError> {
    if copies < 2 {
        return Err(FixtureError::TooFewCopies(copies));
    }
    let piece = construct(fragment)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Fragment::new();
    let d = f.add("dispatch", "switch (mode) {");
    for copy in 1..=copies {
        let pads = rng.gen_range(1..=3);
        let mut prev = d;
        for p in 0..pads {
            let pad = f.add(&format!("pad{copy}.{p}"), &format!("  prep{copy}_{p}();"));
            f.edge(prev, pad);
            prev = pad;
        }
        let offset = f.names.len();
        for (name, code) in piece.names.iter().zip(&piece.code) {
            f.add(&format!("{name}{copy}"), code);
        }
        for (local, targets) in piece.succ.iter().enumerate() {
            for &t in targets {
                f.edge(offset + local, offset + t);
            }
        }
        f.edge(prev, offset);
    }
    Ok(f)
}

fn to_document(f: &Fragment, base: u64) -> GraphDocument {
    let nodes = f
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| NodeRecord {
            id: base + i as u64,
            method: METHOD.to_string(),
            index: i as u32,
            text: name.clone(),
            line: Some(i as u32 + 1),
            library: false,
        })
        .collect();
    let edges = f
        .succ
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(i, s)| EdgeRecord { src: base + i as u64, dst: s.iter().map(|&t| base + t as u64).collect() })
        .collect();
    GraphDocument {
        root: Some(base),
        nodes,
        edges,
        methods: BTreeMap::from([(METHOD.to_string(), f.code.clone())]),
    }
}

pub fn single_node() -> OrderedDigraph {
    from_edge_vecs(&[], 0)
}

/// A graph whose nodes are every id mentioned, all in one method, with no
/// source lines.
pub fn from_edges(edges: &[(u64, &[u64])], root: u64) -> OrderedDigraph {
    let owned: Vec<(u64, Vec<u64>)> = edges.iter().map(|(s, d)| (*s, d.to_vec())).collect();
    from_edge_vecs(&owned, root)
}

pub fn from_edge_vecs(edges: &[(u64, Vec<u64>)], root: u64) -> OrderedDigraph {
    let mut ids: Vec<u64> = vec![root];
    for (s, d) in edges {
        ids.push(*s);
        ids.extend(d);
    }
    ids.sort_unstable();
    ids.dedup();
    let doc = GraphDocument {
        root: Some(root),
        nodes: ids
            .iter()
            .map(|&id| NodeRecord {
                id,
                method: METHOD.to_string(),
                index: id as u32,
                text: format!("n{id}"),
                line: None,
                library: false,
            })
            .collect(),
        edges: edges.iter().map(|(s, d)| EdgeRecord { src: *s, dst: d.clone() }).collect(),
        methods: BTreeMap::new(),
    };
    OrderedDigraph::from_document(doc).expect("edge lists name only listed nodes").graph
}

/// Seeded generators for property tests and scale runs.
pub mod random {
    use super::*;

    /// Random ordered digraph with 1..=`max_nodes` nodes and at most
    /// `max_edges_per_node * n` edge slots (before deduplication). Node 0 is
    /// the root; nodes may be unreachable.
    pub fn digraph(seed: u64, max_nodes: usize, max_edges_per_node: usize) -> OrderedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_nodes);
        let budget = rng.gen_range(0..=max_edges_per_node * n);
        let mut succ: Vec<Vec<u64>> = vec![Vec::new(); n];
        for _ in 0..budget {
            let s = rng.gen_range(0..n);
            let d = rng.gen_range(0..n) as u64;
            succ[s].push(d);
        }
        let edges: Vec<(u64, Vec<u64>)> = (0..n as u64).zip(succ).collect();
        from_edge_vecs(&edges, 0)
    }

    /// Random digraph where every node is reachable from 0: a random
    /// spanning arborescence plus extra random edges, with shuffled lists.
    pub fn connected_digraph(seed: u64, max_nodes: usize, max_extra_per_node: usize) -> OrderedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_nodes);
        let mut succ: Vec<Vec<u64>> = vec![Vec::new(); n];
        for v in 1..n {
            let p = rng.gen_range(0..v);
            succ[p].push(v as u64);
        }
        let extra = rng.gen_range(0..=max_extra_per_node * n);
        for _ in 0..extra {
            let s = rng.gen_range(0..n);
            succ[s].push(rng.gen_range(0..n) as u64);
        }
        for list in &mut succ {
            list.shuffle(&mut rng);
        }
        let edges: Vec<(u64, Vec<u64>)> = (0..n as u64).zip(succ).collect();
        from_edge_vecs(&edges, 0)
    }

    /// Random rooted ordered tree with 1..=`max_nodes` nodes, as a graph
    /// whose only edges are tree edges.
    pub fn tree(seed: u64, max_nodes: usize) -> OrderedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=max_nodes);
        let mut succ: Vec<Vec<u64>> = vec![Vec::new(); n];
        for v in 1..n {
            // Bias towards recent nodes for deeper trees.
            let lo = v.saturating_sub(rng.gen_range(1..=8));
            let p = rng.gen_range(lo..v);
            succ[p].push(v as u64);
        }
        for list in &mut succ {
            list.shuffle(&mut rng);
        }
        let edges: Vec<(u64, Vec<u64>)> = (0..n as u64).zip(succ).collect();
        from_edge_vecs(&edges, 0)
    }

    /// Random structured program (sequences, if/else, switches, while and
    /// do-while loops, early breaks out of loops). Always reducible.
    pub fn structured(seed: u64, target_nodes: usize) -> OrderedDigraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = Builder { succ: Vec::new(), rng: &mut rng };
        let entry = b.node();
        b.block(entry, target_nodes.max(2), &mut Vec::new());
        let edges: Vec<(u64, Vec<u64>)> = b.succ.iter().cloned().enumerate().map(|(i, s)| (i as u64, s)).collect();
        from_edge_vecs(&edges, 0)
    }

    struct Builder<'a> {
        succ: Vec<Vec<u64>>,
        rng: &'a mut ChaCha8Rng,
    }

    impl Builder<'_> {
        fn node(&mut self) -> usize {
            self.succ.push(Vec::new());
            self.succ.len() - 1
        }

        fn edge(&mut self, a: usize, b: usize) {
            self.succ[a].push(b as u64);
        }

        /// Grows a statement sequence from `start` using about `budget`
        /// nodes; returns the node control falls out of. `breaks` collects
        /// loop-exit sources for the innermost enclosing loop.
        fn block(&mut self, start: usize, budget: usize, breaks: &mut Vec<usize>) -> usize {
            let mut cur = start;
            let mut used = 1;
            while used < budget {
                let remaining = budget - used;
                let before = self.succ.len();
                cur = match self.rng.gen_range(0..10) {
                    0..=2 => {
                        let n = self.node();
                        self.edge(cur, n);
                        n
                    }
                    3 | 4 if remaining >= 4 => {
                        // if/else: cur -> [t, f] -> join
                        let inner = (remaining - 3) / 2;
                        let t = self.node();
                        let f = self.node();
                        self.edge(cur, t);
                        self.edge(cur, f);
                        let te = self.block(t, inner.max(1), breaks);
                        let fe = self.block(f, inner.max(1), breaks);
                        let j = self.node();
                        self.edge(te, j);
                        self.edge(fe, j);
                        j
                    }
                    5 if remaining >= 5 => {
                        let k = self.rng.gen_range(2..=4);
                        let j = self.node();
                        let mut prev_end: Option<usize> = None;
                        for _ in 0..k {
                            let c = self.node();
                            self.edge(cur, c);
                            if let Some(p) = prev_end {
                                // fall-through from the previous case
                                if self.rng.gen_bool(0.3) {
                                    self.edge(p, c);
                                } else {
                                    self.edge(p, j);
                                }
                            }
                            prev_end = Some(self.block(c, (remaining / (k + 1)).max(1), breaks));
                        }
                        self.edge(prev_end.unwrap(), j);
                        j
                    }
                    6 | 7 if remaining >= 3 => {
                        // while: cur -> h -> [exit, body]; body ... -> h
                        let h = self.node();
                        self.edge(cur, h);
                        let e = self.node();
                        let body = self.node();
                        self.edge(h, e);
                        self.edge(h, body);
                        let mut inner_breaks = Vec::new();
                        let be = self.block(body, (remaining - 3).max(1), &mut inner_breaks);
                        self.edge(be, h);
                        for src in inner_breaks {
                            self.edge(src, e);
                        }
                        e
                    }
                    8 if remaining >= 3 => {
                        // do-while: cur -> s ... -> c -> [s, exit]
                        let s = self.node();
                        self.edge(cur, s);
                        let mut inner_breaks = Vec::new();
                        let se = self.block(s, (remaining - 2).max(1), &mut inner_breaks);
                        let c = self.node();
                        self.edge(se, c);
                        let e = self.node();
                        self.edge(c, s);
                        self.edge(c, e);
                        for src in inner_breaks {
                            self.edge(src, e);
                        }
                        e
                    }
                    9 => {
                        let n = self.node();
                        self.edge(cur, n);
                        if self.rng.gen_bool(0.5) {
                            breaks.push(n);
                        }
                        n
                    }
                    _ => {
                        let n = self.node();
                        self.edge(cur, n);
                        n
                    }
                };
                used += self.succ.len() - before;
            }
            cur
        }
    }

    /// A program-shaped graph with exactly `nodes` nodes and `edges` edges:
    /// a structured backbone split into methods of about 200 nodes, with
    /// library-call runs, padded by random forward jumps.
    pub fn synthetic(seed: u64, nodes: usize, edges: usize) -> GraphDocument {
        let g = structured(seed, nodes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut succ: Vec<Vec<u64>> = (0..g.len()).map(|i| g.successors(i).iter().map(|&t| t as u64).collect()).collect();
        succ.truncate(nodes);
        for list in &mut succ {
            list.retain(|&t| (t as usize) < nodes);
        }
        while succ.len() < nodes {
            let prev = succ.len() - 1;
            let next = succ.len() as u64;
            succ[prev].push(next);
            succ.push(Vec::new());
        }
        let mut count: usize = succ.iter().map(Vec::len).sum();
        while count < edges {
            let s = rng.gen_range(0..nodes - 1);
            let t = rng.gen_range(s + 1..nodes.min(s + 64)) as u64;
            if !succ[s].contains(&t) {
                succ[s].push(t);
                count += 1;
            }
        }
        while count > edges {
            let s = rng.gen_range(0..nodes);
            if succ[s].len() > 1 {
                succ[s].pop();
                count -= 1;
            }
        }

        let mut methods = BTreeMap::new();
        let mut records = Vec::with_capacity(nodes);
        let mut library_run: usize = 0;
        for i in 0..nodes {
            let method = format!("m{}", i / 200);
            let listing: &mut Vec<String> = methods.entry(method.clone()).or_default();
            listing.push(format!("stmt_{i};"));
            if library_run == 0 && rng.gen_ratio(1, 50) {
                library_run = rng.gen_range(1..=4);
            }
            let library = library_run > 0;
            library_run = library_run.saturating_sub(1);
            records.push(NodeRecord {
                id: i as u64,
                method: if library { "java.util.ArrayList.add".to_string() } else { method },
                index: (i % 200) as u32,
                text: if library { format!("invokevirtual lib{i}") } else { format!("op{i}") },
                line: (!library).then_some(listing.len() as u32),
                library,
            });
        }
        GraphDocument {
            root: Some(0),
            nodes: records,
            edges: succ
                .into_iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(i, dst)| EdgeRecord { src: i as u64, dst })
                .collect(),
            methods,
        }
    }
}
