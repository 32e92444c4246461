// SPDX-License-Identifier: Apache-2.0

//! Canonical layout export.
//!
//! Nodes appear in SFR order, edges in (source number, target number) order,
//! and every object's keys are declared alphabetically so serde emits them
//! sorted. Equal views therefore export to equal bytes.

use serde::{Deserialize, Serialize};

use crate::edges::{EdgeKind, EdgeShape};
use crate::graph::{GraphWarning, NodeId};
use crate::grouping::RenderedView;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutExport {
    pub edges: Vec<EdgeExport>,
    pub nodes: Vec<NodeExport>,
    pub revision: u64,
    pub warnings: Vec<WarningExport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub collapsed: bool,
    pub color: String,
    pub depth: u32,
    pub id: NodeId,
    pub label: String,
    pub lane: u32,
    pub score: u32,
    pub sfr: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeExport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<[f64; 2]>,
    pub dst: NodeId,
    pub from: [f64; 2],
    pub kind: EdgeKind,
    /// `straight` or `curve`.
    pub shape: String,
    pub src: NodeId,
    pub to: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarningExport {
    pub kind: String,
    pub message: String,
}

/// Exported coordinates are rounded to this many decimals so that the text
/// form parses back to the same values.
const COORD_DECIMALS: i32 = 6;

fn coord(v: f64) -> f64 {
    let scale = 10f64.powi(COORD_DECIMALS);
    let r = (v * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn pair(x: f64, y: f64) -> [f64; 2] {
    [coord(x), coord(y)]
}

impl From<&GraphWarning> for WarningExport {
    fn from(w: &GraphWarning) -> Self {
        WarningExport { kind: w.kind().to_string(), message: w.to_string() }
    }
}

impl LayoutExport {
    /// Builds the export of a rendered view. `load_warnings` are issues found
    /// when the input graph was read; unreachable visible nodes are added.
    pub fn build(view: &RenderedView, revision: u64, load_warnings: &[GraphWarning]) -> LayoutExport {
        let g = view.graph();
        let nodes = view
            .sfr
            .order_ix()
            .iter()
            .map(|&ix| {
                let node = g.node_at(ix);
                let cell = view.layout.cell_ix(ix).expect("numbered nodes are placed");
                let (x, y) = cell.position();
                NodeExport {
                    collapsed: view.visible.is_collapsed(node.id),
                    color: view.scores.color_ix(ix).hex(),
                    depth: cell.depth,
                    id: node.id,
                    label: node.instruction_text.clone(),
                    lane: cell.lane,
                    score: view.scores.score_ix(ix),
                    sfr: view.sfr.number_ix(ix).unwrap(),
                    x: coord(x),
                    y: coord(y),
                }
            })
            .collect();
        let edges = view
            .routes
            .iter()
            .map(|r| {
                let (shape, from, control, to) = match r.shape {
                    EdgeShape::Straight { from, to } => ("straight", from, None, to),
                    EdgeShape::Curve { from, control, to } => ("curve", from, Some(pair(control.x, control.y)), to),
                };
                EdgeExport {
                    control,
                    dst: r.dst,
                    from: pair(from.x, from.y),
                    kind: r.kind,
                    shape: shape.to_string(),
                    src: r.src,
                    to: pair(to.x, to.y),
                }
            })
            .collect();

        let mut warnings: Vec<GraphWarning> = load_warnings.to_vec();
        for (ix, _) in g.nodes().iter().enumerate() {
            if view.sfr.number_ix(ix).is_none() {
                let w = GraphWarning::Unreachable { node: g.id_of(ix) };
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
        warnings.retain(|w| match w {
            GraphWarning::Unreachable { node } => g.node(*node).is_some(),
            GraphWarning::DuplicateEdge { .. } => true,
        });
        warnings.sort();
        LayoutExport { edges, nodes, revision, warnings: warnings.iter().map(WarningExport::from).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("layout exports always serialize")
    }

    pub fn from_json(s: &str) -> Result<LayoutExport, serde_json::Error> {
        serde_json::from_str(s)
    }
}
