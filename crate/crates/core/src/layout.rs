// SPDX-License-Identifier: Apache-2.0

//! Lane-reserving placement of the spanning tree.
//!
//! Every subtree owns an exclusive interval of vertical lanes from its root
//! down to the bottom of the drawing. A leaf is one lane wide, an internal
//! node is as wide as the sum of its children, children take consecutive
//! intervals left to right in tree order, and each node sits in the first
//! lane of its interval (directly above its first child). Rows are tree
//! depths. No space is ever reused between subtrees, so collapsing a path
//! never forces unrelated nodes to move sideways.

use std::sync::Arc;

use thiserror::Error;

use crate::graph::{NodeId, NodeIndex};
use crate::sfr::SfrResult;

/// Abstract grid spacing; renderers scale.
pub const UNIT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub lane: u32,
    pub depth: u32,
    /// Lane count of the subtree rooted here.
    pub width: u32,
}

impl Cell {
    pub fn position(&self) -> (f64, f64) {
        (f64::from(self.lane) * UNIT, f64::from(self.depth) * UNIT)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutResult {
    index: Arc<NodeIndex>,
    cells: Vec<Option<Cell>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("node {0} is not reachable from the root")]
    Unreachable(NodeId),
}

pub fn layout_tree(t: &SfrResult) -> LayoutResult {
    let n = t.index().len();
    let mut cells: Vec<Option<Cell>> = vec![None; n];
    if t.is_empty() {
        return LayoutResult { index: t.index().clone(), cells };
    }

    // Children always carry larger numbers than their parent, so reverse
    // numbering order is a valid post-order for widths.
    let mut width = vec![0u32; n];
    for &v in t.order_ix().iter().rev() {
        let kids = t.children_ix(v);
        width[v] = if kids.is_empty() { 1 } else { kids.iter().map(|&c| width[c]).sum() };
    }

    let root = t.root_ix();
    cells[root] = Some(Cell { lane: 0, depth: 0, width: width[root] });
    for &v in t.order_ix() {
        let Cell { lane, depth, .. } = cells[v].expect("parents are placed before children");
        let mut start = lane;
        for &c in t.children_ix(v) {
            cells[c] = Some(Cell { lane: start, depth: depth + 1, width: width[c] });
            start += width[c];
        }
    }
    LayoutResult { index: t.index().clone(), cells }
}

/// The layout of the subtree rooted at `v`, translated so its lane interval
/// starts at 0 and `v` sits on row 0. Other nodes are absent.
pub fn sublayout_of(l: &LayoutResult, t: &SfrResult, v: NodeId) -> Result<LayoutResult, LayoutError> {
    let ix = l.index.ix(v).ok_or(LayoutError::Unreachable(v))?;
    let origin = l.cells[ix].ok_or(LayoutError::Unreachable(v))?;
    let mut cells = vec![None; l.cells.len()];
    for w in t.subtree_ix(ix) {
        let c = l.cells[w].expect("subtree nodes are placed");
        cells[w] = Some(Cell { lane: c.lane - origin.lane, depth: c.depth - origin.depth, width: c.width });
    }
    Ok(LayoutResult { index: l.index.clone(), cells })
}

impl LayoutResult {
    pub fn cell(&self, id: NodeId) -> Option<Cell> {
        self.index.ix(id).and_then(|i| self.cells[i])
    }

    pub fn cell_ix(&self, ix: usize) -> Option<Cell> {
        self.cells[ix]
    }

    pub fn lane(&self, id: NodeId) -> Option<u32> {
        self.cell(id).map(|c| c.lane)
    }

    pub fn depth(&self, id: NodeId) -> Option<u32> {
        self.cell(id).map(|c| c.depth)
    }

    pub fn width(&self, id: NodeId) -> Option<u32> {
        self.cell(id).map(|c| c.width)
    }

    pub fn position(&self, id: NodeId) -> Option<(f64, f64)> {
        self.cell(id).map(|c| c.position())
    }

    /// Placed nodes with their cells, in dense index order.
    pub fn placed(&self) -> impl Iterator<Item = (NodeId, Cell)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (self.index.id(i), c)))
    }

    /// Lane count of the whole drawing.
    pub fn total_width(&self) -> u32 {
        self.cells.iter().flatten().map(|c| c.lane + c.width).max().unwrap_or(0)
    }

    pub fn max_depth(&self) -> u32 {
        self.cells.iter().flatten().map(|c| c.depth).max().unwrap_or(0)
    }
}
