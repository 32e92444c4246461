// SPDX-License-Identifier: Apache-2.0

//! Canonical drawing engine for program control-flow graphs.
//!
//! The pipeline numbers the graph with a sibling-first recursive traversal,
//! places the resulting spanning tree on exclusive vertical lanes, routes the
//! remaining edges, scores every node by loop-nesting depth and lets an
//! analyst collapse and expand groups of nodes without disturbing the rest of
//! the drawing. The visible drawing is always a pure function of the graph and
//! the set of collapsed groups.

pub mod edges;
pub mod export;
pub mod fixtures;
pub mod graph;
pub mod grouping;
pub mod layout;
pub mod loops;
pub mod query;
pub mod server;
pub mod session;
pub mod sfr;
pub mod svg;

pub use edges::{route_edges, EdgeKind, EdgeRoute, EdgeShape, Point};
pub use export::LayoutExport;
pub use graph::{
    load_graph, quotient, CfgNode, GraphDocument, GraphError, GraphWarning, LoadedGraph,
    NamedGroup, NodeId, OrderedDigraph, Quotient, QuotientError,
};
pub use grouping::{default_view, render_view, GroupError, GroupKind, GroupSpec, RenderedView, ViewState};
pub use layout::{layout_tree, sublayout_of, Cell, LayoutError, LayoutResult};
pub use loops::{is_reducible, loop_forest, score_nodes, Loop, LoopForest, NodeScore, Rgb};
pub use query::{edges_of, lines_to_nodes, nodes_to_lines, search, QueryError, SearchKind};
pub use sfr::{dfs_number, number, sfr_number, SfrResult, Traversal};
