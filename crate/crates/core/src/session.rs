// SPDX-License-Identifier: Apache-2.0

//! Analyst sessions: a graph, its view state, the current selection and a
//! revision counter, plus the session file that saves them.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::export::LayoutExport;
use crate::graph::{GraphDocument, GraphError, GraphWarning, NodeId, OrderedDigraph};
use crate::grouping::{default_view, render_view, GroupError, GroupSpec, RenderedView, ViewState};
use crate::query::{lines_to_nodes, nodes_to_lines, LineMap, QueryError};
use crate::sfr::sfr_number;

/// Saved form of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub graph: GraphDocument,
    pub view: ViewState,
    #[serde(default)]
    pub revision: u64,
}

impl SessionFile {
    pub fn parse(bytes: &[u8]) -> Result<SessionFile, SessionError> {
        serde_json::from_slice(bytes).map_err(|e| SessionError::Malformed(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("session files always serialize")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("malformed session file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("stale revision {given}; current revision is {current}")]
    StaleRevision { given: u64, current: u64 },
    #[error("node {0} is not visible")]
    NotVisible(NodeId),
}

/// Selected visible nodes and the code lines they map to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub nodes: BTreeSet<NodeId>,
    pub lines: LineMap,
}

/// An immutable snapshot of one session at one revision. Mutations return a
/// new snapshot.
#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    pub graph: Arc<OrderedDigraph>,
    pub warnings: Arc<Vec<GraphWarning>>,
    pub view: ViewState,
    pub revision: u64,
    pub selection: Selection,
    pub rendered: Arc<RenderedView>,
}

impl Session {
    /// A fresh session on `doc` with the default grouping.
    pub fn create(id: String, doc: GraphDocument) -> Result<Session, SessionError> {
        let loaded = OrderedDigraph::from_document(doc)?;
        let view = default_view(&loaded.graph, &sfr_number(&loaded.graph));
        Session::assemble(id, loaded.graph, loaded.warnings, view, 0)
    }

    pub fn restore(id: String, file: SessionFile) -> Result<Session, SessionError> {
        let loaded = OrderedDigraph::from_document(file.graph)?;
        Session::assemble(id, loaded.graph, loaded.warnings, file.view, file.revision)
    }

    fn assemble(
        id: String,
        graph: OrderedDigraph,
        warnings: Vec<GraphWarning>,
        view: ViewState,
        revision: u64,
    ) -> Result<Session, SessionError> {
        let rendered = render_view(&graph, &view)?;
        Ok(Session {
            id,
            graph: Arc::new(graph),
            warnings: Arc::new(warnings),
            view,
            revision,
            selection: Selection::default(),
            rendered: Arc::new(rendered),
        })
    }

    pub fn save(&self) -> SessionFile {
        SessionFile { graph: self.graph.to_document(), view: self.view.clone(), revision: self.revision }
    }

    pub fn export(&self) -> LayoutExport {
        LayoutExport::build(&self.rendered, self.revision, &self.warnings)
    }

    pub fn check_revision(&self, given: Option<u64>) -> Result<(), SessionError> {
        match given {
            Some(given) if given != self.revision => {
                Err(SessionError::StaleRevision { given, current: self.revision })
            }
            _ => Ok(()),
        }
    }

    fn with_view(&self, view: ViewState) -> Result<Session, SessionError> {
        let rendered = render_view(&self.graph, &view)?;
        let visible = &rendered.visible;
        // Drop selected nodes that no longer exist in the visible graph.
        let nodes: BTreeSet<NodeId> =
            self.selection.nodes.iter().copied().filter(|&n| visible.graph.node(n).is_some()).collect();
        let lines = self.lines_for(visible, &nodes)?;
        Ok(Session {
            view,
            revision: self.revision + 1,
            selection: Selection { nodes, lines },
            rendered: Arc::new(rendered),
            ..self.clone()
        })
    }

    pub fn collapse(&self, spec: GroupSpec) -> Result<Session, SessionError> {
        let view = self.view.collapse(&self.graph, spec)?;
        self.with_view(view)
    }

    pub fn expand(&self, spec: &GroupSpec) -> Result<Session, SessionError> {
        let view = self.view.expand(&self.graph, spec)?;
        self.with_view(view)
    }

    fn lines_for(&self, visible: &crate::graph::Quotient, nodes: &BTreeSet<NodeId>) -> Result<LineMap, SessionError> {
        let originals: BTreeSet<NodeId> = nodes.iter().flat_map(|&n| visible.expand(n)).collect();
        Ok(nodes_to_lines(&self.graph, &originals)?)
    }

    /// Selects visible nodes directly.
    pub fn select_nodes(&self, nodes: BTreeSet<NodeId>) -> Result<Session, SessionError> {
        let visible = &self.rendered.visible;
        if let Some(&missing) = nodes.iter().find(|&&n| visible.graph.node(n).is_none()) {
            return Err(SessionError::NotVisible(missing));
        }
        let lines = self.lines_for(visible, &nodes)?;
        Ok(Session { revision: self.revision + 1, selection: Selection { nodes, lines }, ..self.clone() })
    }

    /// Selects the visible nodes whose code is on `lines` of `method`.
    pub fn select_lines(&self, method: &str, lines: &BTreeSet<u32>) -> Result<Session, SessionError> {
        let originals = lines_to_nodes(&self.graph, method, lines)?;
        let visible = &self.rendered.visible;
        let nodes: BTreeSet<NodeId> =
            originals.iter().filter_map(|&n| visible.image(&self.graph, n)).collect();
        let mut selected = LineMap::new();
        if !lines.is_empty() {
            selected.insert(method.to_string(), lines.clone());
        }
        Ok(Session { revision: self.revision + 1, selection: Selection { nodes, lines: selected }, ..self.clone() })
    }
}
