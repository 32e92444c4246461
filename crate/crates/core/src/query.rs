// SPDX-License-Identifier: Apache-2.0

//! Search and node/code-line mapping.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, OrderedDigraph};
use crate::loops::NodeScore;
use crate::sfr::SfrResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Sfr,
    Method,
    Instruction,
}

impl std::str::FromStr for SearchKind {
    type Err = QueryError;
    fn from_str(s: &str) -> Result<Self, QueryError> {
        match s.to_ascii_lowercase().as_str() {
            "sfr" => Ok(SearchKind::Sfr),
            "method" => Ok(SearchKind::Method),
            "instruction" => Ok(SearchKind::Instruction),
            other => Err(QueryError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("SFR query {0:?} is not a positive integer")]
    BadNumber(String),
    #[error("unknown search kind {0:?}")]
    UnknownKind(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
}

/// Numbered nodes matching `q`, in SFR order. Text matching is a
/// case-insensitive substring test.
pub fn search(g: &OrderedDigraph, t: &SfrResult, kind: SearchKind, q: &str) -> Result<Vec<NodeId>, QueryError> {
    if kind == SearchKind::Sfr {
        let k: u32 = q.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| QueryError::BadNumber(q.to_string()))?;
        return Ok(t.node_numbered(k).into_iter().collect());
    }
    let needle = q.to_lowercase();
    Ok(t
        .order_ix()
        .iter()
        .map(|&ix| g.node_at(ix))
        .filter(|n| {
            let hay = match kind {
                SearchKind::Method => &n.method_id,
                _ => &n.instruction_text,
            };
            hay.to_lowercase().contains(&needle)
        })
        .map(|n| n.id)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeEdges {
    /// Sorted by source number; unnumbered sources last, in node order.
    pub incoming: Vec<NodeId>,
    /// Stored out-edge order.
    pub outgoing: Vec<NodeId>,
    pub unreachable: bool,
}

pub fn edges_of(g: &OrderedDigraph, t: &SfrResult, v: NodeId) -> Result<NodeEdges, QueryError> {
    let ix = g.ix(v).ok_or(QueryError::UnknownNode(v))?;
    let mut incoming: Vec<usize> = (0..g.len()).filter(|&s| g.successors(s).contains(&ix)).collect();
    incoming.sort_by_key(|&s| (t.number_ix(s).unwrap_or(u32::MAX), s));
    Ok(NodeEdges {
        incoming: incoming.into_iter().map(|s| g.id_of(s)).collect(),
        outgoing: g.out_edges(v),
        unreachable: t.number_ix(ix).is_none(),
    })
}

pub type LineMap = BTreeMap<String, BTreeSet<u32>>;

/// Source lines of the selected nodes, per method. Nodes without a source
/// line contribute nothing.
pub fn nodes_to_lines(g: &OrderedDigraph, sel: &BTreeSet<NodeId>) -> Result<LineMap, QueryError> {
    let mut out = LineMap::new();
    for &id in sel {
        let n = g.node(id).ok_or(QueryError::UnknownNode(id))?;
        if let Some(line) = n.source_line {
            out.entry(n.method_id.clone()).or_default().insert(line);
        }
    }
    Ok(out)
}

pub fn lines_to_nodes(g: &OrderedDigraph, method: &str, lines: &BTreeSet<u32>) -> Result<BTreeSet<NodeId>, QueryError> {
    if g.listing(method).is_none() {
        return Err(QueryError::UnknownMethod(method.to_string()));
    }
    Ok(g
        .nodes()
        .iter()
        .filter(|n| n.method_id == method && n.source_line.is_some_and(|l| lines.contains(&l)))
        .map(|n| n.id)
        .collect())
}

/// Lines of the most deeply nested nodes of each method (methods with no
/// loops are omitted).
pub fn innermost_loop_lines(g: &OrderedDigraph, scores: &NodeScore) -> LineMap {
    let mut best: BTreeMap<&str, u32> = BTreeMap::new();
    for (ix, n) in g.nodes().iter().enumerate() {
        let s = scores.score_ix(ix);
        if s > 0 && n.source_line.is_some() {
            let e = best.entry(n.method_id.as_str()).or_insert(0);
            *e = (*e).max(s);
        }
    }
    let mut out = LineMap::new();
    for (ix, n) in g.nodes().iter().enumerate() {
        if let (Some(line), Some(&b)) = (n.source_line, best.get(n.method_id.as_str())) {
            if scores.score_ix(ix) == b {
                out.entry(n.method_id.clone()).or_default().insert(line);
            }
        }
    }
    out
}
