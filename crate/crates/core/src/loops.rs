// SPDX-License-Identifier: Apache-2.0

//! Loop-nesting forest over a numbered graph, and nesting-depth scores.
//!
//! Outermost loops are the maximal strongly connected components of the
//! reachable graph. A loop's header is its member with the smallest number in
//! the supplied traversal. Inner loops are the maximal strongly connected
//! components left after removing the header, recursively. A single node with
//! a self-edge is a loop of one.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, NodeIndex, OrderedDigraph};
use crate::sfr::SfrResult;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub header: NodeId,
    /// Ascending ids, header included.
    pub body: Vec<NodeId>,
    /// Index into [`LoopForest::loops`].
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopForest {
    index: Arc<NodeIndex>,
    /// Sorted by header number; parents precede their children.
    pub loops: Vec<Loop>,
    depth: Vec<u32>,
    pub max_depth: u32,
}

impl LoopForest {
    pub fn depth(&self, id: NodeId) -> Option<u32> {
        self.index.ix(id).map(|i| self.depth[i])
    }

    pub fn depth_ix(&self, ix: usize) -> u32 {
        self.depth[ix]
    }

    /// Loops as (header, body, parent header), independent of numbering order.
    pub fn canonical(&self) -> BTreeSet<(NodeId, Vec<NodeId>, Option<NodeId>)> {
        self.loops
            .iter()
            .map(|l| (l.header, l.body.clone(), l.parent.map(|p| self.loops[p].header)))
            .collect()
    }
}

/// Iterative Tarjan over the nodes whose `region` stamp equals `stamp`.
/// Returns components in completion order.
struct SccFinder {
    index: Vec<u32>,
    low: Vec<u32>,
    on_stack: Vec<bool>,
}

impl SccFinder {
    fn new(n: usize) -> Self {
        SccFinder { index: vec![0; n], low: vec![0; n], on_stack: vec![false; n] }
    }

    fn run(&mut self, g: &OrderedDigraph, nodes: &[usize], region: &[u32], stamp: u32) -> Vec<Vec<usize>> {
        for &v in nodes {
            self.index[v] = 0;
            self.on_stack[v] = false;
        }
        let mut next = 1u32;
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut work: Vec<(usize, usize)> = Vec::new();
        for &start in nodes {
            if self.index[start] != 0 {
                continue;
            }
            work.push((start, 0));
            self.index[start] = next;
            self.low[start] = next;
            next += 1;
            stack.push(start);
            self.on_stack[start] = true;
            while let Some(&mut (v, ref mut edge)) = work.last_mut() {
                let succ = g.successors(v);
                if *edge < succ.len() {
                    let w = succ[*edge];
                    *edge += 1;
                    if region[w] != stamp {
                        continue;
                    }
                    if self.index[w] == 0 {
                        self.index[w] = next;
                        self.low[w] = next;
                        next += 1;
                        stack.push(w);
                        self.on_stack[w] = true;
                        work.push((w, 0));
                    } else if self.on_stack[w] {
                        self.low[v] = self.low[v].min(self.index[w]);
                    }
                    continue;
                }
                work.pop();
                if let Some(&(p, _)) = work.last() {
                    self.low[p] = self.low[p].min(self.low[v]);
                }
                if self.low[v] == self.index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("component root is on the stack");
                        self.on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
            }
        }
        out
    }
}

/// Builds the loop-nesting forest. Headers are chosen by the numbering in
/// `t`, which may come from either traversal.
pub fn loop_forest(g: &OrderedDigraph, t: &SfrResult) -> LoopForest {
    let n = g.len();
    let reachable: Vec<usize> = t.order_ix().to_vec();
    let mut region = vec![0u32; n];
    let mut stamp = 0u32;
    let mut finder = SccFinder::new(n);

    // (header ix, body ixs, parent position in `found`)
    let mut found: Vec<(usize, Vec<usize>, Option<usize>)> = Vec::new();
    let mut work: Vec<(Vec<usize>, Option<usize>)> = vec![(reachable, None)];
    while let Some((nodes, parent)) = work.pop() {
        stamp += 1;
        for &v in &nodes {
            region[v] = stamp;
        }
        for comp in finder.run(g, &nodes, &region, stamp) {
            let is_loop = comp.len() > 1 || g.successors(comp[0]).contains(&comp[0]);
            if !is_loop {
                continue;
            }
            let header = *comp
                .iter()
                .min_by_key(|&&v| t.number_ix(v).expect("loop members are numbered"))
                .unwrap();
            let me = found.len();
            let rest: Vec<usize> = comp.iter().copied().filter(|&v| v != header).collect();
            found.push((header, comp, parent));
            if !rest.is_empty() {
                work.push((rest, Some(me)));
            }
        }
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by_key(|&i| t.number_ix(found[i].0));
    let mut position = vec![0usize; found.len()];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }

    let mut depth = vec![0u32; n];
    let mut loops = Vec::with_capacity(found.len());
    for &i in &order {
        let (header, ref body, parent) = found[i];
        for &v in body {
            depth[v] += 1;
        }
        let mut body_ids: Vec<NodeId> = body.iter().map(|&v| g.id_of(v)).collect();
        body_ids.sort();
        loops.push(Loop { header: g.id_of(header), body: body_ids, parent: parent.map(|p| position[p]) });
    }
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    LoopForest { index: g.index().clone(), loops, depth, max_depth }
}

/// Every loop is entered from outside its body only through its header.
/// Edges from unreachable nodes are ignored.
pub fn is_reducible(g: &OrderedDigraph, f: &LoopForest) -> bool {
    let reachable = g.reachable();
    let pred = g.predecessors();
    let mut inside = vec![usize::MAX; g.len()];
    for (li, lp) in f.loops.iter().enumerate() {
        for &m in &lp.body {
            inside[g.ix(m).expect("loop body ids come from this graph")] = li;
        }
        for &m in &lp.body {
            if m == lp.header {
                continue;
            }
            let w = g.ix(m).unwrap();
            if pred[w].iter().any(|&p| reachable[p] && inside[p] != li) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

/// Hue in degrees on the green (120) to red (0) ramp.
pub fn ramp_hue(score: u32, max_depth: u32) -> f64 {
    if max_depth == 0 {
        return 120.0;
    }
    120.0 * (1.0 - f64::from(score) / f64::from(max_depth))
}

/// HSV to RGB with full saturation and value.
pub fn hue_to_rgb(hue: f64) -> Rgb {
    let h = hue.rem_euclid(360.0) / 60.0;
    let sector = h.floor();
    let f = h - sector;
    let up = (255.0 * f).round() as u8;
    let down = (255.0 * (1.0 - f)).round() as u8;
    let (r, g, b) = match sector as u32 {
        0 => (255, up, 0),
        1 => (down, 255, 0),
        2 => (0, 255, up),
        3 => (0, down, 255),
        4 => (up, 0, 255),
        _ => (255, 0, down),
    };
    Rgb { r, g, b }
}

pub fn ramp_color(score: u32, max_depth: u32) -> Rgb {
    hue_to_rgb(ramp_hue(score, max_depth))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeScore {
    index: Arc<NodeIndex>,
    score: Vec<u32>,
    color: Vec<Rgb>,
    pub max_depth: u32,
}

impl NodeScore {
    pub fn score(&self, id: NodeId) -> Option<u32> {
        self.index.ix(id).map(|i| self.score[i])
    }

    pub fn score_ix(&self, ix: usize) -> u32 {
        self.score[ix]
    }

    pub fn color(&self, id: NodeId) -> Option<Rgb> {
        self.index.ix(id).map(|i| self.color[i])
    }

    pub fn color_ix(&self, ix: usize) -> Rgb {
        self.color[ix]
    }
}

pub fn score_nodes(f: &LoopForest) -> NodeScore {
    let score = f.depth.clone();
    let color = score.iter().map(|&s| ramp_color(s, f.max_depth)).collect();
    NodeScore { index: f.index.clone(), score, color, max_depth: f.max_depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FixtureKind};
    use crate::sfr::sfr_number;

    fn forest(g: &OrderedDigraph) -> LoopForest {
        loop_forest(g, &sfr_number(g))
    }

    fn ids(v: &[u64]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn nested_fixture() {
        let g = fixtures::generate_kind(&FixtureKind::NestedLoops { depth: 2 }).unwrap();
        let f = forest(&g);
        assert_eq!(f.loops.len(), 2);
        assert_eq!(f.loops[0], Loop { header: NodeId(2), body: ids(&[2, 3, 4]), parent: None });
        assert_eq!(f.loops[1], Loop { header: NodeId(3), body: ids(&[3, 4]), parent: Some(0) });
        let depths: Vec<u32> = (1..=5).map(|i| f.depth(NodeId(i)).unwrap()).collect();
        assert_eq!(depths, vec![0, 1, 2, 2, 0]);
        assert!(is_reducible(&g, &f));
        assert_eq!(f.max_depth, 2);
    }

    #[test]
    fn acyclic_has_no_loops() {
        let g = fixtures::generate_kind(&FixtureKind::IfElse).unwrap();
        let f = forest(&g);
        assert!(f.loops.is_empty());
        assert_eq!(f.max_depth, 0);
        assert!(is_reducible(&g, &f));
    }

    #[test]
    fn self_loop_is_a_loop_of_one() {
        let g = fixtures::from_edges(&[(0, &[1]), (1, &[1, 2])], 0);
        let f = forest(&g);
        assert_eq!(f.loops, vec![Loop { header: NodeId(1), body: ids(&[1]), parent: None }]);
        assert_eq!(f.depth(NodeId(1)), Some(1));
    }

    #[test]
    fn two_entry_loop_is_irreducible() {
        let g = fixtures::from_edges(&[(1, &[2, 3]), (2, &[3]), (3, &[2])], 1);
        let f = forest(&g);
        assert_eq!(f.loops.len(), 1);
        assert!(!is_reducible(&g, &f));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_hue(0, 2), 120.0);
        assert_eq!(ramp_hue(2, 2), 0.0);
        assert_eq!(ramp_hue(1, 2), 60.0);
        assert_eq!(ramp_hue(0, 0), 120.0);
        assert_eq!(ramp_color(0, 2), Rgb { r: 0, g: 255, b: 0 });
        assert_eq!(ramp_color(2, 2), Rgb { r: 255, g: 0, b: 0 });
        assert_eq!(ramp_color(1, 2), Rgb { r: 255, g: 255, b: 0 });
        assert_eq!(ramp_color(1, 4).hex(), "#80ff00");
    }

    #[test]
    fn deepest_nodes_are_red() {
        let g = fixtures::generate_kind(&FixtureKind::NestedLoops { depth: 2 }).unwrap();
        let s = score_nodes(&forest(&g));
        assert_eq!(s.color(NodeId(4)), Some(Rgb { r: 255, g: 0, b: 0 }));
        assert_eq!(s.color(NodeId(1)), Some(Rgb { r: 0, g: 255, b: 0 }));
        assert_eq!(s.score(NodeId(2)), Some(1));
    }
}
