// SPDX-License-Identifier: Apache-2.0

//! Edge classification and routing.
//!
//! Downward edges are straight segments from the bottom-center anchor of the
//! source cell to the top-center anchor of the target. Everything else
//! (back edges, same-row edges, self-loops) is a quadratic curve whose single
//! control point sits to the right of the rightmost endpoint, so curves never
//! lie on top of straight segments.

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, OrderedDigraph};
use crate::layout::{Cell, LayoutResult};
use crate::sfr::SfrResult;

/// Half of a node cell's height, in grid units.
pub const NODE_HALF_HEIGHT: f64 = 0.25;
pub const CURVE_BASE_OFFSET: f64 = 0.4;
pub const CURVE_DEPTH_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Tree,
    ForwardDown,
    Upward,
    Lateral,
    #[serde(rename = "self")]
    SelfLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Point { x: self.x + dx, y: self.y + dy }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeShape {
    Straight { from: Point, to: Point },
    Curve { from: Point, control: Point, to: Point },
}

impl EdgeShape {
    pub fn is_straight(&self) -> bool {
        matches!(self, EdgeShape::Straight { .. })
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        match self {
            EdgeShape::Straight { from, to } => {
                EdgeShape::Straight { from: from.translate(dx, dy), to: to.translate(dx, dy) }
            }
            EdgeShape::Curve { from, control, to } => EdgeShape::Curve {
                from: from.translate(dx, dy),
                control: control.translate(dx, dy),
                to: to.translate(dx, dy),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRoute {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub shape: EdgeShape,
}

/// Horizontal distance between a curve's control point and its rightmost
/// endpoint.
pub fn curve_offset(depth_delta: u32) -> f64 {
    CURVE_BASE_OFFSET + CURVE_DEPTH_STEP * f64::from(1 + depth_delta)
}

fn top(c: Cell) -> Point {
    let (x, y) = c.position();
    Point::new(x, y - NODE_HALF_HEIGHT)
}

fn bottom(c: Cell) -> Point {
    let (x, y) = c.position();
    Point::new(x, y + NODE_HALF_HEIGHT)
}

/// One route per edge between numbered nodes, sorted by the SFR numbers of
/// (source, target).
pub fn route_edges(g: &OrderedDigraph, t: &SfrResult, l: &LayoutResult) -> Vec<EdgeRoute> {
    let mut routes = Vec::with_capacity(g.edge_count());
    for &src in t.order_ix() {
        let sc = l.cell_ix(src).expect("numbered nodes are placed");
        let mut targets: Vec<usize> = g.successors(src).to_vec();
        targets.sort_by_key(|&d| t.number_ix(d));
        for dst in targets {
            let dc = l.cell_ix(dst).expect("successors of numbered nodes are numbered");
            routes.push(route(g.id_of(src), g.id_of(dst), t.is_tree_edge_ix(src, dst), sc, dc));
        }
    }
    routes
}

fn route(src: NodeId, dst: NodeId, tree: bool, sc: Cell, dc: Cell) -> EdgeRoute {
    let kind = if tree {
        EdgeKind::Tree
    } else if src == dst {
        EdgeKind::SelfLoop
    } else if dc.depth > sc.depth {
        EdgeKind::ForwardDown
    } else if dc.depth < sc.depth {
        EdgeKind::Upward
    } else {
        EdgeKind::Lateral
    };

    let shape = if dc.depth > sc.depth {
        EdgeShape::Straight { from: bottom(sc), to: top(dc) }
    } else {
        let (from, to) = match kind {
            EdgeKind::SelfLoop => (bottom(sc), top(dc)),
            EdgeKind::Lateral => (top(sc), top(dc)),
            _ => (top(sc), bottom(dc)),
        };
        let offset = curve_offset(sc.depth.abs_diff(dc.depth));
        let control = Point::new(from.x.max(to.x) + offset, (from.y + to.y) / 2.0);
        EdgeShape::Curve { from, control, to }
    };
    EdgeRoute { src, dst, kind, shape }
}
