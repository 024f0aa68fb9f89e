//! Node priorities and the total order used by all three coloring algorithms.
//!
//! `prio(u)` is the node degree plus the sum of its 1-hop neighbors' degrees,
//! computed once from the stabilized topology before coloring starts. Ties on
//! the scalar are broken by the smaller address, so priorities form a strict
//! total order over any node set.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::{Topology, TopologyError};
use crate::Address;

/// A node priority: the scalar component plus the address tiebreak.
///
/// The derived ordering makes "greater" mean "higher priority": a larger
/// `prio` wins, and on equal `prio` the *smaller* address wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Priority {
    pub prio: u32,
    pub address: Address,
}

impl Priority {
    pub fn new(prio: u32, address: Address) -> Self {
        Self { prio, address }
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prio
            .cmp(&other.prio)
            .then_with(|| other.address.cmp(&self.address))
    }
}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True iff `a` has higher priority than `b`: larger `prio`, or equal `prio`
/// and smaller address. Comparing a node with itself is a programming error.
pub fn higher_priority(a: Priority, b: Priority) -> bool {
    debug_assert_ne!(a.address, b.address, "priority comparison of a node with itself");
    a > b
}

/// `deg(u)` plus the sum of the degrees of u's 1-hop neighbors.
pub fn compute_prio(topo: &Topology, u: Address) -> Result<u32, TopologyError> {
    let mut total = topo.degree(u)? as u32;
    for v in topo.neighbors(u)? {
        total += topo.degree(v)? as u32;
    }
    Ok(total)
}

/// Priorities for every node of the topology.
pub fn priority_map(topo: &Topology) -> BTreeMap<Address, Priority> {
    topo.addresses()
        .map(|u| {
            let prio = compute_prio(topo, u).expect("address comes from the topology");
            (u, Priority::new(prio, u))
        })
        .collect()
}
