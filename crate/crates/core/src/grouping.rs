// SPDX-License-Identifier: Apache-2.0

//! Node groups, the view state built from them, and view rendering.
//!
//! Groups are kept as sets of input-graph node ids and may nest (a chain of
//! methods contains its method groups). The visible graph contracts the
//! maximal collapsed groups, and everything drawn is recomputed from that
//! quotient. Two views with the same collapsed set therefore render
//! identically no matter which actions produced them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edges::{route_edges, EdgeRoute};
use crate::graph::{quotient_with_map, NamedGroup, NodeId, OrderedDigraph, Quotient, QuotientError};
use crate::layout::{layout_tree, LayoutResult};
use crate::loops::{is_reducible, loop_forest, score_nodes, LoopForest, NodeScore};
use crate::sfr::{sfr_number, SfrResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Library,
    Method,
    Chain,
    User,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub members: BTreeSet<NodeId>,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl GroupSpec {
    pub fn user(members: impl IntoIterator<Item = NodeId>, label: impl Into<String>) -> Self {
        GroupSpec { kind: GroupKind::User, members: members.into_iter().collect(), label: label.into(), comment: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group has no members")]
    Empty,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("group is not connected")]
    NotConnected,
    #[error("multiple tree entries: {}", fmt_ids(.0))]
    MultipleTreeEntries(Vec<NodeId>),
    #[error("node {0} is not reachable in the current view")]
    Unreachable(NodeId),
    #[error("group partially overlaps collapsed node {0}")]
    PartialOverlap(NodeId),
    #[error("unknown group")]
    UnknownGroup,
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

fn fmt_ids(ids: &[NodeId]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

type GroupKey = BTreeSet<NodeId>;

/// Active groups keyed by their member set, and which of them are open.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ViewDocument", from = "ViewDocument")]
pub struct ViewState {
    groups: BTreeMap<GroupKey, GroupSpec>,
    expanded: BTreeSet<GroupKey>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct ViewDocument {
    groups: Vec<GroupSpec>,
    #[serde(default)]
    expanded: Vec<BTreeSet<NodeId>>,
}

impl From<ViewState> for ViewDocument {
    fn from(v: ViewState) -> Self {
        ViewDocument { groups: v.groups.into_values().collect(), expanded: v.expanded.into_iter().collect() }
    }
}

impl From<ViewDocument> for ViewState {
    fn from(d: ViewDocument) -> Self {
        let groups: BTreeMap<_, _> = d.groups.into_iter().map(|g| (g.members.clone(), g)).collect();
        let expanded = d.expanded.into_iter().filter(|k| groups.contains_key(k)).collect();
        ViewState { groups, expanded }
    }
}

impl ViewState {
    pub fn new() -> Self {
        ViewState::default()
    }

    pub fn groups(&self) -> impl Iterator<Item = &GroupSpec> {
        self.groups.values()
    }

    pub fn is_expanded(&self, spec: &GroupSpec) -> bool {
        self.expanded.contains(&spec.members)
    }

    pub fn collapsed(&self) -> impl Iterator<Item = &GroupSpec> {
        self.groups.iter().filter(|(k, _)| !self.expanded.contains(*k)).map(|(_, g)| g)
    }

    /// Collapsed groups not contained in another collapsed group.
    pub fn maximal_collapsed(&self) -> Vec<&GroupSpec> {
        let collapsed: Vec<&GroupSpec> = self.collapsed().collect();
        collapsed
            .iter()
            .filter(|g| {
                !collapsed
                    .iter()
                    .any(|o| o.members.len() > g.members.len() && g.members.is_subset(&o.members))
            })
            .copied()
            .collect()
    }

    /// The visible graph of this view.
    pub fn visible(&self, g: &OrderedDigraph) -> Result<Quotient, GroupError> {
        let groups: Vec<NamedGroup> = self
            .maximal_collapsed()
            .into_iter()
            .map(|spec| NamedGroup { label: spec.label.clone(), members: spec.members.clone() })
            .collect();
        Ok(quotient_with_map(g, &groups)?)
    }

    /// Member ids with visible super-nodes replaced by what they contain.
    fn flatten(&self, g: &OrderedDigraph, visible: &Quotient, members: &BTreeSet<NodeId>) -> Result<GroupKey, GroupError> {
        let mut out = BTreeSet::new();
        for &m in members {
            if let Some(inner) = visible.members.get(&m) {
                out.extend(inner.iter().copied());
            } else if g.ix(m).is_some() {
                out.insert(m);
            } else {
                return Err(GroupError::UnknownNode(m));
            }
        }
        Ok(out)
    }

    /// Adds `spec` as a collapsed group, or re-collapses it if it is already
    /// active. Members may name visible super-nodes; a new group must cover
    /// every visible node it touches.
    pub fn collapse(&self, g: &OrderedDigraph, spec: GroupSpec) -> Result<ViewState, GroupError> {
        if spec.members.is_empty() {
            return Err(GroupError::Empty);
        }
        let visible = self.visible(g)?;
        let key = self.flatten(g, &visible, &spec.members)?;
        if self.groups.contains_key(&key) {
            let mut next = self.clone();
            next.expanded.remove(&key);
            return Ok(next);
        }

        let mut images: BTreeSet<NodeId> = BTreeSet::new();
        for &m in &key {
            let image = visible.image(g, m).expect("flattened members are graph nodes");
            images.insert(image);
        }
        for &image in &images {
            if let Some(inner) = visible.members.get(&image) {
                if !inner.iter().all(|m| key.contains(m)) {
                    return Err(GroupError::PartialOverlap(image));
                }
            }
        }
        if !g.is_weakly_connected(&key) {
            return Err(GroupError::NotConnected);
        }

        if spec.kind == GroupKind::User {
            let vg = &visible.graph;
            let t = sfr_number(vg);
            let mut entries = Vec::new();
            for &v in &images {
                let ix = vg.ix(v).unwrap();
                if t.number_ix(ix).is_none() {
                    return Err(GroupError::Unreachable(v));
                }
                let inside_parent = t.parent_ix(ix).is_some_and(|p| images.contains(&vg.id_of(p)));
                if !inside_parent {
                    entries.push(v);
                }
            }
            if entries.len() != 1 {
                return Err(GroupError::MultipleTreeEntries(entries));
            }
        }

        let mut next = self.clone();
        next.groups.insert(key.clone(), GroupSpec { members: key, ..spec });
        Ok(next)
    }

    /// Opens an active group. Members are matched after flattening visible
    /// super-nodes, so a collapsed node's own id opens it.
    pub fn expand(&self, g: &OrderedDigraph, spec: &GroupSpec) -> Result<ViewState, GroupError> {
        let visible = self.visible(g)?;
        let key = self.flatten(g, &visible, &spec.members)?;
        if !self.groups.contains_key(&key) {
            return Err(GroupError::UnknownGroup);
        }
        let mut next = self.clone();
        next.expanded.insert(key);
        Ok(next)
    }

    /// Inserts a group without validation, collapsed or open.
    pub fn with_group(mut self, spec: GroupSpec, collapsed: bool) -> ViewState {
        let key = spec.members.clone();
        if collapsed {
            self.expanded.remove(&key);
        } else {
            self.expanded.insert(key.clone());
        }
        self.groups.insert(key, spec);
        self
    }
}

/// The initial grouping: library-call components collapsed, same-method
/// components open, and chains of method groups collapsed.
pub fn default_view(g: &OrderedDigraph, _t: &SfrResult) -> ViewState {
    let library = components(g, |i| g.node_at(i).is_library, |a, b| g.node_at(a).is_library && g.node_at(b).is_library);
    let methods = components(
        g,
        |i| !g.node_at(i).is_library,
        |a, b| {
            let (na, nb) = (g.node_at(a), g.node_at(b));
            !na.is_library && !nb.is_library && na.method_id == nb.method_id
        },
    );

    let mut view = ViewState::new();
    let mut level: Vec<NamedGroup> = Vec::new();
    for comp in library {
        let members: BTreeSet<NodeId> = comp.iter().map(|&i| g.id_of(i)).collect();
        let label = format!("library: {}", g.node_at(comp[0]).method_id);
        level.push(NamedGroup { label: label.clone(), members: members.clone() });
        view = view.with_group(GroupSpec { kind: GroupKind::Library, members, label, comment: None }, true);
    }
    let mut method_groups: HashMap<NodeId, (String, BTreeSet<NodeId>)> = HashMap::new();
    let mut method_members = Vec::new();
    for comp in methods {
        let members: BTreeSet<NodeId> = comp.iter().map(|&i| g.id_of(i)).collect();
        let label = g.node_at(comp[0]).method_id.clone();
        level.push(NamedGroup { label: label.clone(), members: members.clone() });
        method_members.push(members.clone());
        view = view.with_group(GroupSpec { kind: GroupKind::Method, members, label, comment: None }, false);
    }

    let q = quotient_with_map(g, &level).expect("default groups are disjoint connected components");
    for members in method_members {
        let id = q.image(g, *members.iter().next().unwrap()).unwrap();
        let label = q.graph.node(id).unwrap().instruction_text.clone();
        method_groups.insert(id, (label, members));
    }

    for chain in method_chains(&q.graph, &method_groups) {
        let mut members = BTreeSet::new();
        let mut labels = Vec::new();
        for id in &chain {
            let (label, m) = &method_groups[id];
            members.extend(m.iter().copied());
            labels.push(label.as_str());
        }
        let label = format!("chain: {}", labels.join(" -> "));
        view = view.with_group(GroupSpec { kind: GroupKind::Chain, members, label, comment: None }, true);
    }
    view
}

/// Weakly connected components of the nodes accepted by `keep`, linked by
/// edges accepted by `link`; each component in ascending index order,
/// components ordered by their first index.
fn components(
    g: &OrderedDigraph,
    keep: impl Fn(usize) -> bool,
    link: impl Fn(usize, usize) -> bool,
) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut undirected = vec![Vec::new(); n];
    for a in 0..n {
        for &b in g.successors(a) {
            if a != b && link(a, b) {
                undirected[a].push(b);
                undirected[b].push(a);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || !keep(start) {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &undirected[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Maximal paths (length >= 2) of method nodes with in-degree and out-degree
/// exactly 1 in the method-level quotient.
fn method_chains(q: &OrderedDigraph, methods: &HashMap<NodeId, (String, BTreeSet<NodeId>)>) -> Vec<Vec<NodeId>> {
    let pred = q.predecessors();
    let candidate = |ix: usize| {
        methods.contains_key(&q.id_of(ix)) && q.successors(ix).len() == 1 && pred[ix].len() == 1
    };
    let mut chains = Vec::new();
    for (ix, preds) in pred.iter().enumerate() {
        if !candidate(ix) || candidate(preds[0]) {
            continue;
        }
        let mut chain = vec![q.id_of(ix)];
        let mut cur = ix;
        loop {
            let next = q.successors(cur)[0];
            if !candidate(next) || next == ix {
                break;
            }
            chain.push(q.id_of(next));
            cur = next;
        }
        if chain.len() >= 2 {
            chains.push(chain);
        }
    }
    chains
}

/// Everything drawn for one view.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedView {
    pub visible: Quotient,
    pub sfr: SfrResult,
    pub layout: LayoutResult,
    pub routes: Vec<EdgeRoute>,
    pub forest: LoopForest,
    pub scores: NodeScore,
    pub reducible: bool,
}

impl RenderedView {
    pub fn graph(&self) -> &OrderedDigraph {
        &self.visible.graph
    }
}

/// Runs the full pipeline on the visible graph of `view`.
pub fn render_view(g: &OrderedDigraph, view: &ViewState) -> Result<RenderedView, GroupError> {
    let visible = view.visible(g)?;
    Ok(render_quotient(visible))
}

pub fn render_quotient(visible: Quotient) -> RenderedView {
    let vg = &visible.graph;
    let sfr = sfr_number(vg);
    let layout = layout_tree(&sfr);
    let routes = route_edges(vg, &sfr, &layout);
    let forest = loop_forest(vg, &sfr);
    let scores = score_nodes(&forest);
    let reducible = is_reducible(vg, &forest);
    RenderedView { visible, sfr, layout, routes, forest, scores, reducible }
}
