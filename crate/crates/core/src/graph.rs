// SPDX-License-Identifier: Apache-2.0

//! Ordered control-flow graph model.
//!
//! A graph is a set of [`CfgNode`]s, one ordered successor list per node and a
//! single root. Successor order follows the order of the corresponding
//! instructions in the method listing and is preserved verbatim by every
//! transformation in this crate, including [`quotient`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

/// First id of the range reserved for super-nodes produced by [`quotient`].
pub const SUPER_NODE_BASE: u64 = 1 << 52;
/// Exclusive upper bound of every node id; keeps ids exact as IEEE doubles.
pub const NODE_ID_LIMIT: u64 = 1 << 53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl NodeId {
    pub fn is_super(self) -> bool {
        self.0 >= SUPER_NODE_BASE
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfgNode {
    pub id: NodeId,
    pub method_id: String,
    pub instruction_index: u32,
    pub instruction_text: String,
    /// 1-based line in the method listing.
    pub source_line: Option<u32>,
    pub is_library: bool,
}

/// Dense position of every node id. Shared by a graph and the analyses
/// computed from it so results can be queried by [`NodeId`].
#[derive(Debug, PartialEq, Eq)]
pub struct NodeIndex {
    ids: Vec<NodeId>,
    pos: HashMap<NodeId, usize>,
}

impl NodeIndex {
    fn new(ids: Vec<NodeId>) -> Self {
        let pos = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        NodeIndex { ids, pos }
    }

    pub fn ix(&self, id: NodeId) -> Option<usize> {
        self.pos.get(&id).copied()
    }

    pub fn id(&self, ix: usize) -> NodeId {
        self.ids[ix]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedDigraph {
    nodes: Vec<CfgNode>,
    index: Arc<NodeIndex>,
    succ: Vec<Vec<usize>>,
    root: usize,
    methods: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed document at {location}: {message}")]
    Malformed { location: String, message: String },
    #[error("missing root")]
    MissingRoot,
    #[error("missing root: node {root} is not in the graph")]
    UnknownRoot { root: NodeId },
    #[error("duplicate root at {location}")]
    DuplicateRoot { location: String },
    #[error("duplicate node id {id} at {location}")]
    DuplicateNode { id: NodeId, location: String },
    #[error("unknown edge source {src} at {location}")]
    UnknownSource { src: NodeId, location: String },
    #[error("unknown edge target {target} at {location}")]
    UnknownTarget { target: NodeId, location: String },
    #[error("node id {id} at {location} is outside the input id range")]
    ReservedId { id: NodeId, location: String },
    #[error("source line {line} of node {id} at {location} is not a line of method {method:?}")]
    InvalidSourceLine { id: NodeId, line: u32, method: String, location: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GraphWarning {
    DuplicateEdge { src: NodeId, dst: NodeId },
    Unreachable { node: NodeId },
}

impl fmt::Display for GraphWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphWarning::DuplicateEdge { src, dst } => {
                write!(f, "duplicate edge {src} -> {dst} removed")
            }
            GraphWarning::Unreachable { node } => write!(f, "node {node} is unreachable from the root"),
        }
    }
}

impl GraphWarning {
    pub fn kind(&self) -> &'static str {
        match self {
            GraphWarning::DuplicateEdge { .. } => "duplicate-edge",
            GraphWarning::Unreachable { .. } => "unreachable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: OrderedDigraph,
    pub warnings: Vec<GraphWarning>,
}

/// Wire form of a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GraphDocument {
    pub root: Option<u64>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub methods: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: u64,
    pub method: String,
    pub index: u32,
    pub text: String,
    #[serde(default)]
    pub line: Option<u32>,
    #[serde(default)]
    pub library: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: u64,
    pub dst: Vec<u64>,
}

/// Top-level object entries in document order, so repeated keys survive
/// parsing and can be reported.
struct Entries(Vec<(String, serde_json::Value)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;
        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a graph document object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = map.next_entry::<String, serde_json::Value>()? {
                    out.push(entry);
                }
                Ok(Entries(out))
            }
        }
        deserializer.deserialize_map(EntriesVisitor)
    }
}

fn malformed(location: impl Into<String>, message: impl fmt::Display) -> GraphError {
    GraphError::Malformed { location: location.into(), message: message.to_string() }
}

impl GraphDocument {
    pub fn parse(bytes: &[u8]) -> Result<GraphDocument, GraphError> {
        let Entries(entries) = serde_json::from_slice(bytes).map_err(|e| {
            malformed(format!("line {} column {}", e.line(), e.column()), e)
        })?;
        let mut doc = GraphDocument::default();
        let mut seen_root = false;
        for (key, value) in entries {
            match key.as_str() {
                "root" => {
                    if seen_root {
                        return Err(GraphError::DuplicateRoot { location: "root".into() });
                    }
                    seen_root = true;
                    if !value.is_null() {
                        doc.root = Some(
                            serde_json::from_value(value).map_err(|e| malformed("root", e))?,
                        );
                    }
                }
                "nodes" => doc.nodes = parse_array(value, "nodes")?,
                "edges" => doc.edges = parse_array(value, "edges")?,
                "methods" => {
                    doc.methods = serde_json::from_value(value).map_err(|e| malformed("methods", e))?
                }
                other => return Err(malformed(other, "unknown field")),
            }
        }
        Ok(doc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents always serialize")
    }
}

fn parse_array<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
    field: &str,
) -> Result<Vec<T>, GraphError> {
    let serde_json::Value::Array(items) = value else {
        return Err(malformed(field, "expected an array"));
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| serde_json::from_value(item).map_err(|e| malformed(format!("{field}[{i}]"), e)))
        .collect()
}

impl<'de> Deserialize<'de> for GraphDocument {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let bytes = serde_json::to_vec(&value).map_err(serde::de::Error::custom)?;
        GraphDocument::parse(&bytes).map_err(serde::de::Error::custom)
    }
}

/// Parses and validates an input document.
pub fn load_graph(bytes: &[u8]) -> Result<LoadedGraph, GraphError> {
    OrderedDigraph::from_document(GraphDocument::parse(bytes)?)
}

impl OrderedDigraph {
    pub fn from_document(doc: GraphDocument) -> Result<LoadedGraph, GraphError> {
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut pos: HashMap<NodeId, usize> = HashMap::with_capacity(doc.nodes.len());
        for (i, rec) in doc.nodes.into_iter().enumerate() {
            let id = NodeId(rec.id);
            let location = format!("nodes[{i}]");
            if rec.id >= SUPER_NODE_BASE {
                return Err(GraphError::ReservedId { id, location });
            }
            if pos.insert(id, i).is_some() {
                return Err(GraphError::DuplicateNode { id, location });
            }
            if let Some(line) = rec.line {
                let len = doc.methods.get(&rec.method).map_or(0, Vec::len);
                if line == 0 || line as usize > len {
                    return Err(GraphError::InvalidSourceLine {
                        id,
                        line,
                        method: rec.method,
                        location,
                    });
                }
            }
            nodes.push(CfgNode {
                id,
                method_id: rec.method,
                instruction_index: rec.index,
                instruction_text: rec.text,
                source_line: rec.line,
                is_library: rec.library,
            });
        }

        let root_id = NodeId(doc.root.ok_or(GraphError::MissingRoot)?);
        let root = *pos.get(&root_id).ok_or(GraphError::UnknownRoot { root: root_id })?;

        let mut warnings = Vec::new();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, edge) in doc.edges.iter().enumerate() {
            let src_id = NodeId(edge.src);
            let src = *pos.get(&src_id).ok_or_else(|| GraphError::UnknownSource {
                src: src_id,
                location: format!("edges[{i}].src"),
            })?;
            for (j, &dst) in edge.dst.iter().enumerate() {
                let dst_id = NodeId(dst);
                let target = *pos.get(&dst_id).ok_or_else(|| GraphError::UnknownTarget {
                    target: dst_id,
                    location: format!("edges[{i}].dst[{j}]"),
                })?;
                if succ[src].contains(&target) {
                    warnings.push(GraphWarning::DuplicateEdge { src: src_id, dst: dst_id });
                } else {
                    succ[src].push(target);
                }
            }
        }

        let ids = nodes.iter().map(|n| n.id).collect();
        let graph = OrderedDigraph {
            nodes,
            index: Arc::new(NodeIndex { ids, pos }),
            succ,
            root,
            methods: doc.methods,
        };
        warnings.extend(graph.unreachable_nodes().into_iter().map(|node| GraphWarning::Unreachable { node }));
        Ok(LoadedGraph { graph, warnings })
    }

    /// Builds a graph from already-validated parts. Targets are dense indices.
    fn from_parts(
        nodes: Vec<CfgNode>,
        succ: Vec<Vec<usize>>,
        root: usize,
        methods: BTreeMap<String, Vec<String>>,
    ) -> Self {
        let index = Arc::new(NodeIndex::new(nodes.iter().map(|n| n.id).collect()));
        OrderedDigraph { nodes, index, succ, root, methods }
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            root: Some(self.root().0),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    method: n.method_id.clone(),
                    index: n.instruction_index,
                    text: n.instruction_text.clone(),
                    line: n.source_line,
                    library: n.is_library,
                })
                .collect(),
            edges: self
                .succ
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_empty())
                .map(|(i, s)| EdgeRecord {
                    src: self.nodes[i].id.0,
                    dst: s.iter().map(|&t| self.nodes[t].id.0).collect(),
                })
                .collect(),
            methods: self.methods.clone(),
        }
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.to_document().to_json_pretty().into_bytes()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> &[CfgNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&CfgNode> {
        self.ix(id).map(|i| &self.nodes[i])
    }

    pub fn node_at(&self, ix: usize) -> &CfgNode {
        &self.nodes[ix]
    }

    pub fn ix(&self, id: NodeId) -> Option<usize> {
        self.index.ix(id)
    }

    pub fn id_of(&self, ix: usize) -> NodeId {
        self.nodes[ix].id
    }

    pub fn index(&self) -> &Arc<NodeIndex> {
        &self.index
    }

    pub fn root(&self) -> NodeId {
        self.nodes[self.root].id
    }

    pub fn root_ix(&self) -> usize {
        self.root
    }

    /// Dense successor indices of `ix`, in stored order.
    pub fn successors(&self, ix: usize) -> &[usize] {
        &self.succ[ix]
    }

    /// Ordered out-edge targets of `id`; empty for unknown ids.
    pub fn out_edges(&self, id: NodeId) -> Vec<NodeId> {
        self.ix(id)
            .map(|i| self.succ[i].iter().map(|&t| self.nodes[t].id).collect())
            .unwrap_or_default()
    }

    pub fn methods(&self) -> &BTreeMap<String, Vec<String>> {
        &self.methods
    }

    pub fn listing(&self, method: &str) -> Option<&[String]> {
        self.methods.get(method).map(Vec::as_slice)
    }

    /// Predecessor lists; each list is in ascending source index order.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (src, targets) in self.succ.iter().enumerate() {
            for &t in targets {
                pred[t].push(src);
            }
        }
        pred
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn unreachable_nodes(&self) -> Vec<NodeId> {
        self.reachable()
            .iter()
            .enumerate()
            .filter(|(_, &r)| !r)
            .map(|(i, _)| self.nodes[i].id)
            .collect()
    }

    /// Whether `members` induce a weakly connected subgraph. Unknown ids make
    /// the set disconnected.
    pub fn is_weakly_connected(&self, members: &BTreeSet<NodeId>) -> bool {
        let Some(&first) = members.iter().next() else {
            return false;
        };
        let mut inside = vec![false; self.len()];
        for &m in members {
            match self.ix(m) {
                Some(i) => inside[i] = true,
                None => return false,
            }
        }
        let mut undirected: HashMap<usize, Vec<usize>> = HashMap::new();
        for &m in members {
            let i = self.ix(m).unwrap();
            for &t in &self.succ[i] {
                if inside[t] {
                    undirected.entry(i).or_default().push(t);
                    undirected.entry(t).or_default().push(i);
                }
            }
        }
        let start = self.ix(first).unwrap();
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in undirected.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == members.len()
    }
}

/// A set of nodes to contract into one super-node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedGroup {
    pub label: String,
    pub members: BTreeSet<NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuotientError {
    #[error("overlapping groups: node {node} is in more than one group")]
    Overlapping { node: NodeId },
    #[error("group {label:?} is not weakly connected")]
    NotConnected { label: String },
    #[error("group {label:?} is empty")]
    Empty { label: String },
    #[error("group {label:?} contains unknown node {node}")]
    UnknownMember { label: String, node: NodeId },
    #[error("super-node id {id} is already in use")]
    IdCollision { id: NodeId },
}

/// Result of contracting groups, with the mapping back to the input graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub graph: OrderedDigraph,
    /// Super-node id to contracted member ids (ascending).
    pub members: BTreeMap<NodeId, Vec<NodeId>>,
    image: Vec<usize>,
}

impl Quotient {
    /// The visible node that input node `ix` was mapped to, as a dense index
    /// into `self.graph`.
    pub fn image_ix(&self, ix: usize) -> usize {
        self.image[ix]
    }

    pub fn image(&self, source: &OrderedDigraph, id: NodeId) -> Option<NodeId> {
        source.ix(id).map(|i| self.graph.id_of(self.image[i]))
    }

    pub fn is_collapsed(&self, id: NodeId) -> bool {
        self.members.contains_key(&id)
    }

    /// Input nodes represented by visible node `id`.
    pub fn expand(&self, id: NodeId) -> Vec<NodeId> {
        self.members.get(&id).cloned().unwrap_or_else(|| vec![id])
    }
}

/// Stable id for the super-node of a member set: FNV-1a over the sorted ids,
/// folded into the reserved range.
pub fn super_node_id(members: &BTreeSet<NodeId>) -> NodeId {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for m in members {
        for b in m.0.to_le_bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    }
    NodeId(SUPER_NODE_BASE + hash % SUPER_NODE_BASE)
}

/// Contracts each group to a super-node.
pub fn quotient(g: &OrderedDigraph, groups: &[NamedGroup]) -> Result<OrderedDigraph, QuotientError> {
    quotient_with_map(g, groups).map(|q| q.graph)
}

pub fn quotient_with_map(g: &OrderedDigraph, groups: &[NamedGroup]) -> Result<Quotient, QuotientError> {
    let n = g.len();
    let mut group_of: Vec<Option<usize>> = vec![None; n];
    for (gi, group) in groups.iter().enumerate() {
        if group.members.is_empty() {
            return Err(QuotientError::Empty { label: group.label.clone() });
        }
        for &m in &group.members {
            let ix = g.ix(m).ok_or_else(|| QuotientError::UnknownMember {
                label: group.label.clone(),
                node: m,
            })?;
            if group_of[ix].replace(gi).is_some() {
                return Err(QuotientError::Overlapping { node: m });
            }
        }
    }
    for group in groups {
        if !g.is_weakly_connected(&group.members) {
            return Err(QuotientError::NotConnected { label: group.label.clone() });
        }
    }

    // Members contribute out-edges in ascending SFR-number order of the input
    // graph; unreachable members follow in node order.
    let numbering = crate::sfr::sfr_number(g);
    let rank = |ix: usize| (numbering.number_ix(ix).unwrap_or(u32::MAX), ix);

    let mut image = vec![usize::MAX; n];
    let mut new_nodes = Vec::new();
    let mut sources: Vec<Vec<usize>> = Vec::new();
    let mut placed: Vec<Option<usize>> = vec![None; groups.len()];
    let mut members_out = BTreeMap::new();
    for ix in 0..n {
        match group_of[ix] {
            None => {
                image[ix] = new_nodes.len();
                new_nodes.push(g.nodes[ix].clone());
                sources.push(vec![ix]);
            }
            Some(gi) => {
                if let Some(slot) = placed[gi] {
                    image[ix] = slot;
                    continue;
                }
                let group = &groups[gi];
                let mut member_ix: Vec<usize> = group.members.iter().map(|&m| g.ix(m).unwrap()).collect();
                member_ix.sort_by_key(|&i| rank(i));
                let lead = &g.nodes[member_ix[0]];
                let id = super_node_id(&group.members);
                if g.ix(id).is_some() || members_out.contains_key(&id) {
                    return Err(QuotientError::IdCollision { id });
                }
                let slot = new_nodes.len();
                placed[gi] = Some(slot);
                image[ix] = slot;
                new_nodes.push(CfgNode {
                    id,
                    method_id: lead.method_id.clone(),
                    instruction_index: lead.instruction_index,
                    instruction_text: group.label.clone(),
                    source_line: None,
                    is_library: member_ix.iter().all(|&i| g.nodes[i].is_library),
                });
                members_out.insert(id, group.members.iter().copied().collect());
                sources.push(member_ix);
            }
        }
    }

    let mut succ = Vec::with_capacity(new_nodes.len());
    for (slot, src_ixs) in sources.iter().enumerate() {
        let grouped = new_nodes[slot].id.is_super();
        let mut out: Vec<usize> = Vec::new();
        for &s in src_ixs {
            for &t in &g.succ[s] {
                let t = image[t];
                if grouped && t == slot {
                    continue;
                }
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        succ.push(out);
    }

    let root = image[g.root];
    Ok(Quotient {
        graph: OrderedDigraph::from_parts(new_nodes, succ, root, g.methods.clone()),
        members: members_out,
        image,
    })
}
