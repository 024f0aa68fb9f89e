//! Centralized First Fit 3-hop coloring and the coloring validity checker.
//!
//! First Fit visits nodes in descending priority order; each node receives
//! the smallest color unused among already-colored nodes within 3 hops. Both
//! distributed protocols are proven to match this oracle node for node, which
//! makes it the ground truth for the whole crate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::priority::Priority;
use crate::topology::{Topology, TopologyError};
use crate::{Address, Color};

/// A (possibly partial) color assignment. Uncolored nodes are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(BTreeMap<Address, Color>);

impl Coloring {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: Address, color: Color) -> Option<Color> {
        self.0.insert(node, color)
    }

    pub fn get(&self, node: Address) -> Option<Color> {
        self.0.get(&node).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Address, Color)> + '_ {
        self.0.iter().map(|(&a, &c)| (a, c))
    }

    /// Number of distinct colors used.
    pub fn colors_used(&self) -> usize {
        self.0.values().collect::<std::collections::BTreeSet<_>>().len()
    }
}

impl FromIterator<(Address, Color)> for Coloring {
    fn from_iter<T: IntoIterator<Item = (Address, Color)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Error)]
pub enum FirstFitError {
    #[error("priority map misses node {0}")]
    MissingPriority(Address),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Color every node greedily in descending priority order. Each node takes
/// the smallest non-negative color unused by already-colored nodes within 3
/// hops.
pub fn firstfit_3hop(
    topo: &Topology,
    priorities: &BTreeMap<Address, Priority>,
) -> Result<Coloring, FirstFitError> {
    firstfit_khop(topo, priorities, 3)
}

/// General h-hop variant of [`firstfit_3hop`].
pub fn firstfit_khop(
    topo: &Topology,
    priorities: &BTreeMap<Address, Priority>,
    h: usize,
) -> Result<Coloring, FirstFitError> {
    let mut order: Vec<Priority> = topo
        .addresses()
        .map(|u| priorities.get(&u).copied().ok_or(FirstFitError::MissingPriority(u)))
        .collect::<Result<_, _>>()?;
    order.sort_by(|a, b| b.cmp(a));

    let mut coloring = Coloring::new();
    for p in order {
        let mut used = crate::ColorBitmap::new();
        for v in topo.khop_neighbors(p.address, h)? {
            if let Some(c) = coloring.get(v) {
                used.set(c);
            }
        }
        coloring.insert(p.address, used.smallest_unset());
    }
    Ok(coloring)
}

/// A same-color pair within the checked hop range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub a: Address,
    pub b: Address,
    pub color: Color,
    pub hops: usize,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    /// The coloring misses some topology nodes. Reported distinctly from an
    /// invalid coloring.
    #[error("incomplete coloring: {} uncolored node(s), first {:?}", missing.len(), missing.first())]
    Incomplete { missing: Vec<Address> },
    #[error("coloring references unknown node {0}")]
    UnknownNode(Address),
    #[error("invalid coloring: {} conflicting pair(s), first {:?}", conflicts.len(), conflicts.first())]
    Conflicts { conflicts: Vec<Conflict> },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Check that no two nodes within `h` hops share a color. Returns the full
/// list of violating pairs on failure.
pub fn verify_coloring(topo: &Topology, coloring: &Coloring, h: usize) -> Result<(), VerifyError> {
    for (u, _) in coloring.iter() {
        if !topo.contains(u) {
            return Err(VerifyError::UnknownNode(u));
        }
    }
    let missing: Vec<Address> = topo.addresses().filter(|&u| coloring.get(u).is_none()).collect();
    if !missing.is_empty() {
        return Err(VerifyError::Incomplete { missing });
    }
    let mut conflicts = Vec::new();
    for (u, cu) in coloring.iter() {
        for v in topo.khop_neighbors(u, h)? {
            if v > u && coloring.get(v) == Some(cu) {
                let hops = topo.hop_distance(u, v)?.expect("v is reachable from u");
                conflicts.push(Conflict { a: u, b: v, color: cu, hops });
            }
        }
    }
    if conflicts.is_empty() {
        Ok(())
    } else {
        Err(VerifyError::Conflicts { conflicts })
    }
}
