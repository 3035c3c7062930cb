//! Non-recursive refinement and coarsening.
//!
//! Refinement quadrisects every marked element around a new center node
//! (flagged newest). The four children are stored so that child `i` keeps the
//! parent's vertex `i` at local position `i` and the center at position
//! `i + 2 (mod 4)`. That ordering, together with the node and edge flags, is
//! all coarsening needs to rebuild the parent: no tree is kept.

mod coarsen;
mod marks;
mod refine;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::mesh::MeshError;

pub use coarsen::{coarsen, coarsen_unchecked, find_good_nodes, good_patch, CoarsenEdgeType, CoarsenSummary};
pub use marks::{post_mark, MarkSet};
pub use refine::{classify_refine_edges, refine, refine_unchecked, RefineSummary};

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("edge {edge} cannot be classified: {reason}")]
    Unclassifiable { edge: usize, reason: String },
    #[error("mark references element {0}, which does not exist")]
    DeadElement(usize),
    #[error("mesh invalid after adaptation: {0}")]
    Mesh(#[from] MeshError),
}

/// Refinement category of an edge of a marked element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefineEdgeType {
    /// Regular interior edge; exactly one adjacent element is marked.
    One = 1,
    /// Regular edge with both neighbors marked, or a boundary edge.
    Two = 2,
    /// Child edge with the smaller index of its sibling pair (odd flag).
    Three = 3,
    /// Child edge with the larger index (even flag).
    Four = 4,
    /// Live parent edge carrying a hanging node of the marked element.
    Five = 5,
}

/// Edge index to refinement type, for all edges of the (closed) mark set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineEdgeClass(pub BTreeMap<usize, RefineEdgeType>);

impl RefineEdgeClass {
    pub fn get(&self, edge: usize) -> Option<RefineEdgeType> {
        self.0.get(&edge).copied()
    }

    pub fn edges_of(&self, t: RefineEdgeType) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().filter(move |(_, &v)| v == t).map(|(&e, _)| e)
    }

    /// `edge,type` CSV with 1-based edge indices.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("edge,type\n");
        for (e, t) in &self.0 {
            let _ = writeln!(s, "{},{}", e + 1, *t as u8);
        }
        s
    }
}

#[cfg(test)]
mod tests;
