//! Unit disk graph topologies: generation, queries, and a text file format.
//!
//! Nodes are points in the plane with a uniform transmission range `R`
//! (normalized to 1.0 by the generator). Two nodes are neighbors exactly when
//! their Euclidean distance is strictly lower than `R`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Address;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("duplicate address {0}")]
    DuplicateAddress(Address),
    #[error("unknown address {0}")]
    UnknownAddress(Address),
    #[error("radius must be finite and positive, got {0}")]
    BadRadius(f64),
    #[error("coordinate for address {0} is not finite")]
    BadCoordinate(Address),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("no connected topology found in {attempts} attempts (n={n}, density={density})")]
    NotConnected { n: usize, density: f64, attempts: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A node of the topology: unique address plus plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub address: Address,
    pub x: f64,
    pub y: f64,
}

/// Immutable unit disk graph. Adjacency is derived from coordinates once at
/// construction and never changes, so a `Topology` is safe to share across
/// concurrent runs.
#[derive(Debug, Clone)]
pub struct Topology {
    radius: f64,
    nodes: Vec<Node>,
    index: BTreeMap<Address, usize>,
    /// Adjacency by internal index, each list sorted by address.
    adj: Vec<Vec<usize>>,
}

impl Topology {
    /// Build a topology from `(address, x, y)` triples and a radius.
    /// Edges are derived: `(u, v)` is an edge iff `dist(u, v) < radius`.
    pub fn new(nodes: Vec<(Address, f64, f64)>, radius: f64) -> Result<Self, TopologyError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(TopologyError::BadRadius(radius));
        }
        let mut index = BTreeMap::new();
        let mut list = Vec::with_capacity(nodes.len());
        for (address, x, y) in nodes {
            if !x.is_finite() || !y.is_finite() {
                return Err(TopologyError::BadCoordinate(address));
            }
            if index.insert(address, list.len()).is_some() {
                return Err(TopologyError::DuplicateAddress(address));
            }
            list.push(Node { address, x, y });
        }
        let n = list.len();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = list[i].x - list[j].x;
                let dy = list[i].y - list[j].y;
                if (dx * dx + dy * dy).sqrt() < radius {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for neighbors in &mut adj {
            neighbors.sort_unstable_by_key(|&j| list[j].address);
        }
        Ok(Self { radius, nodes: list, index, adj })
    }

    /// Path graph 1 - 2 - ... - n with unit radius and spacing 0.9.
    pub fn path(n: usize) -> Self {
        let nodes = (1..=n).map(|i| (i as Address, 0.9 * i as f64, 0.0)).collect();
        Self::new(nodes, 1.0).expect("path construction cannot fail")
    }

    /// Complete graph on addresses 1..=n: all nodes within mutual range.
    pub fn complete(n: usize) -> Self {
        // Points on a small circle so all pairwise distances stay below 1.
        let nodes = (1..=n)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                (i as Address, 0.3 * theta.cos(), 0.3 * theta.sin())
            })
            .collect();
        Self::new(nodes, 1.0).expect("complete construction cannot fail")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn contains(&self, address: Address) -> bool {
        self.index.contains_key(&address)
    }

    /// Addresses in ascending order.
    pub fn addresses(&self) -> impl Iterator<Item = Address> + '_ {
        self.index.keys().copied()
    }

    fn index_of(&self, address: Address) -> Result<usize, TopologyError> {
        self.index
            .get(&address)
            .copied()
            .ok_or(TopologyError::UnknownAddress(address))
    }

    /// 1-hop neighbor addresses of `u`, ascending.
    pub fn neighbors(&self, u: Address) -> Result<Vec<Address>, TopologyError> {
        let i = self.index_of(u)?;
        Ok(self.adj[i].iter().map(|&j| self.nodes[j].address).collect())
    }

    pub fn degree(&self, u: Address) -> Result<usize, TopologyError> {
        Ok(self.adj[self.index_of(u)?].len())
    }

    /// All nodes `v != u` with hop-distance at most `k`, via breadth-first
    /// search. `k = 0` returns the empty set.
    pub fn khop_neighbors(&self, u: Address, k: usize) -> Result<BTreeSet<Address>, TopologyError> {
        let start = self.index_of(u)?;
        let mut out = BTreeSet::new();
        if k == 0 {
            return Ok(out);
        }
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            if dist[i] == k {
                continue;
            }
            for &j in &self.adj[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    out.insert(self.nodes[j].address);
                    queue.push_back(j);
                }
            }
        }
        Ok(out)
    }

    /// Hop distance between two nodes, `None` if unreachable.
    pub fn hop_distance(&self, u: Address, v: Address) -> Result<Option<usize>, TopologyError> {
        let start = self.index_of(u)?;
        let goal = self.index_of(v)?;
        if start == goal {
            return Ok(Some(0));
        }
        let mut dist = vec![usize::MAX; self.nodes.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in &self.adj[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    if j == goal {
                        return Ok(Some(dist[j]));
                    }
                    queue.push_back(j);
                }
            }
        }
        Ok(None)
    }

    /// True iff one BFS from any node reaches all nodes.
    pub fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Mean node degree.
    pub fn mean_degree(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        let total: usize = self.adj.iter().map(Vec::len).sum();
        total as f64 / self.nodes.len() as f64
    }

    /// Render in the topology file format: header `udg <n> <R>` followed by
    /// one `<address> <x> <y>` line per node. Edges are always derived.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "udg {} {}", self.nodes.len(), self.radius);
        for node in &self.nodes {
            let _ = writeln!(out, "{} {} {}", node.address, node.x, node.y);
        }
        out
    }

    /// Parse the text format produced by [`Topology::to_file_string`].
    pub fn from_file_string(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines
            .next()
            .ok_or(TopologyError::Parse { line: 1, msg: "empty file".into() })?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("udg") {
            return Err(TopologyError::Parse {
                line: line_no,
                msg: "expected header `udg <n> <R>`".into(),
            });
        }
        let n: usize = fields
            .next()
            .ok_or(TopologyError::Parse { line: line_no, msg: "missing node count".into() })?
            .parse()
            .map_err(|e| TopologyError::Parse { line: line_no, msg: format!("bad node count: {e}") })?;
        let radius: f64 = fields
            .next()
            .ok_or(TopologyError::Parse {
                line: line_no,
                msg: "missing radius (radius is mandatory)".into(),
            })?
            .parse()
            .map_err(|e| TopologyError::Parse { line: line_no, msg: format!("bad radius: {e}") })?;
        if fields.next().is_some() {
            return Err(TopologyError::Parse { line: line_no, msg: "trailing fields in header".into() });
        }

        let mut nodes = Vec::with_capacity(n);
        for (line_no, line) in lines {
            let mut fields = line.split_whitespace();
            let parse =
                |field: Option<&str>, what: &str| -> Result<String, TopologyError> {
                    field.map(str::to_owned).ok_or(TopologyError::Parse {
                        line: line_no,
                        msg: format!("missing {what}"),
                    })
                };
            let address: Address = parse(fields.next(), "address")?
                .parse()
                .map_err(|e| TopologyError::Parse { line: line_no, msg: format!("bad address: {e}") })?;
            let x: f64 = parse(fields.next(), "x coordinate")?
                .parse()
                .map_err(|e| TopologyError::Parse { line: line_no, msg: format!("bad x: {e}") })?;
            let y: f64 = parse(fields.next(), "y coordinate")?
                .parse()
                .map_err(|e| TopologyError::Parse { line: line_no, msg: format!("bad y: {e}") })?;
            if fields.next().is_some() {
                return Err(TopologyError::Parse { line: line_no, msg: "trailing fields".into() });
            }
            nodes.push((address, x, y));
        }
        if nodes.len() != n {
            return Err(TopologyError::Parse {
                line: 1,
                msg: format!("header declares {n} nodes, found {}", nodes.len()),
            });
        }
        Self::new(nodes, radius)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TopologyError> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopologyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file_string(&text)
    }
}

/// Outcome of [`generate_udg`], carrying the regeneration bookkeeping needed
/// to reproduce the exact placement.
#[derive(Debug, Clone)]
pub struct Generated {
    pub topology: Topology,
    /// Number of placement attempts used (1 means the first try connected).
    pub attempts: u32,
    /// Derived seed of the successful attempt.
    pub placement_seed: u64,
}

/// Generate a connected random unit disk graph.
///
/// Nodes are placed uniformly at random in a square sized so the expected
/// number of nodes in a disk of radius `R = 1` equals `density`
/// (side = sqrt(n * pi / density)). Placement repeats with a fresh derived
/// seed until the graph is connected or `max_attempts` is exhausted.
/// Deterministic given `(n, density, seed)`.
pub fn generate_udg(
    n: usize,
    density: f64,
    seed: u64,
    max_attempts: u32,
) -> Result<Generated, TopologyError> {
    if n < 1 {
        return Err(TopologyError::BadParameter("n must be >= 1".into()));
    }
    if density.is_nan() || density < 0.0 {
        return Err(TopologyError::BadParameter("density must be >= 0".into()));
    }
    if max_attempts < 1 {
        return Err(TopologyError::BadParameter("max_attempts must be >= 1".into()));
    }
    let radius = 1.0;
    let side = if density > 0.0 {
        (n as f64 * std::f64::consts::PI * radius * radius / density).sqrt()
    } else {
        // Zero density only makes sense for a single node.
        1.0
    };
    for attempt in 1..=max_attempts {
        let placement_seed = split_seed(seed, attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(placement_seed);
        let nodes: Vec<(Address, f64, f64)> = (1..=n)
            .map(|i| {
                let x: f64 = rng.gen::<f64>() * side;
                let y: f64 = rng.gen::<f64>() * side;
                (i as Address, x, y)
            })
            .collect();
        let topology = Topology::new(nodes, radius)?;
        if topology.is_connected() {
            return Ok(Generated { topology, attempts: attempt, placement_seed });
        }
    }
    Err(TopologyError::NotConnected { n, density, attempts: max_attempts })
}

/// SplitMix64-style seed derivation: decorrelates per-attempt (and per-run)
/// streams from one master seed.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_is_connected() {
        let g = generate_udg(1, 8.0, 7, 10).unwrap();
        assert_eq!(g.topology.len(), 1);
        assert!(g.topology.is_connected());
        assert_eq!(g.topology.degree(1).unwrap(), 0);
    }

    #[test]
    fn three_close_nodes_form_k3() {
        let topo = Topology::new(vec![(1, 0.0, 0.0), (2, 0.5, 0.0), (3, 0.25, 0.4)], 1.0).unwrap();
        for u in 1..=3 {
            assert_eq!(topo.degree(u).unwrap(), 2);
        }
    }

    #[test]
    fn edge_rule_is_strict() {
        // Distance exactly R is NOT an edge.
        let topo = Topology::new(vec![(1, 0.0, 0.0), (2, 1.0, 0.0)], 1.0).unwrap();
        assert_eq!(topo.degree(1).unwrap(), 0);
        assert!(!topo.is_connected());
    }

    #[test]
    fn adjacency_is_symmetric_and_irreflexive() {
        let g = generate_udg(40, 10.0, 3, 50).unwrap().topology;
        for u in g.addresses() {
            let nu = g.neighbors(u).unwrap();
            assert!(!nu.contains(&u));
            for v in nu {
                assert!(g.neighbors(v).unwrap().contains(&u));
            }
        }
    }

    #[test]
    fn khop_on_path() {
        let topo = Topology::path(5);
        let got = topo.khop_neighbors(1, 3).unwrap();
        assert_eq!(got, BTreeSet::from([2, 3, 4]));
        assert!(topo.khop_neighbors(1, 0).unwrap().is_empty());
        assert_eq!(topo.khop_neighbors(3, 1).unwrap(), BTreeSet::from([2, 4]));
    }

    #[test]
    fn khop_on_complete_graph() {
        let topo = Topology::complete(4);
        for u in 1..=4 {
            let two_hop = topo.khop_neighbors(u, 2).unwrap();
            assert_eq!(two_hop.len(), 3, "all other nodes are at 1 hop");
        }
    }

    #[test]
    fn khop_unknown_address_errors() {
        let topo = Topology::path(3);
        assert!(matches!(topo.khop_neighbors(9, 2), Err(TopologyError::UnknownAddress(9))));
    }

    #[test]
    fn connectivity_cases() {
        assert!(Topology::new(vec![(1, 0.0, 0.0)], 1.0).unwrap().is_connected());
        let two_far = Topology::new(vec![(1, 0.0, 0.0), (2, 5.0, 0.0)], 1.0).unwrap();
        assert!(!two_far.is_connected());
        assert!(Topology::path(3).is_connected());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_udg(50, 8.0, 42, 100).unwrap();
        let b = generate_udg(50, 8.0, 42, 100).unwrap();
        assert_eq!(a.attempts, b.attempts);
        assert_eq!(a.topology.to_file_string(), b.topology.to_file_string());
    }

    #[test]
    fn generated_degree_matches_density() {
        // Single spec'd instance: n=50, density=8, seed=42.
        let g = generate_udg(50, 8.0, 42, 100).unwrap();
        assert!(g.topology.is_connected());
        let mean = g.topology.mean_degree();
        assert!((6.0..=10.0).contains(&mean), "mean degree {mean} out of [6,10]");

        // Placement formula check: average the measured mean degree over 100
        // seeds. Border effects pull the measured value below the nominal
        // density; the average must still sit in the accepted band.
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..100u64 {
            if let Ok(g) = generate_udg(50, 8.0, seed, 5) {
                total += g.topology.mean_degree();
                count += 1;
            }
        }
        assert!(count > 50, "most seeds should connect within 5 attempts");
        let avg = total / count as f64;
        assert!((6.0..=10.0).contains(&avg), "100-seed average degree {avg} out of [6,10]");
    }

    #[test]
    fn impossible_connectivity_reports_attempts() {
        // Two nodes at density 0.01 live in a huge square; they essentially
        // never connect.
        let err = generate_udg(2, 0.01, 1, 3).unwrap_err();
        match err {
            TopologyError::NotConnected { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let g = generate_udg(30, 10.0, 5, 50).unwrap().topology;
        let parsed = Topology::from_file_string(&g.to_file_string()).unwrap();
        assert_eq!(parsed.to_file_string(), g.to_file_string());
        assert_eq!(parsed.len(), g.len());
        for u in g.addresses() {
            assert_eq!(parsed.neighbors(u).unwrap(), g.neighbors(u).unwrap());
        }
    }

    #[test]
    fn file_rejects_duplicate_address() {
        let text = "udg 2 1.0\n1 0.0 0.0\n1 0.5 0.0\n";
        assert!(matches!(
            Topology::from_file_string(text),
            Err(TopologyError::DuplicateAddress(1))
        ));
    }

    #[test]
    fn file_requires_radius() {
        let text = "udg 2\n1 0.0 0.0\n2 0.5 0.0\n";
        let err = Topology::from_file_string(text).unwrap_err();
        assert!(err.to_string().contains("radius"), "got: {err}");
    }

    #[test]
    fn file_reports_line_of_bad_field() {
        let text = "udg 2 1.0\n1 0.0 0.0\n2 oops 0.0\n";
        match Topology::from_file_string(text) {
            Err(TopologyError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn node_count_mismatch_rejected() {
        let text = "udg 3 1.0\n1 0.0 0.0\n2 0.5 0.0\n";
        assert!(Topology::from_file_string(text).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            /// BFS self-consistency: the 3-hop set is the 2-hop set plus the
            /// 1-hop neighbors of the exactly-2-hop frontier, minus the node.
            #[test]
            fn khop3_extends_khop2_by_one_bfs_layer(seed in 0u64..1000, n in 2usize..30) {
                let Ok(g) = generate_udg(n, 6.0, seed, 3) else { return Ok(()); };
                let topo = g.topology;
                for u in topo.addresses() {
                    let k1 = topo.khop_neighbors(u, 1).unwrap();
                    let k2 = topo.khop_neighbors(u, 2).unwrap();
                    let k3 = topo.khop_neighbors(u, 3).unwrap();
                    let frontier: Vec<Address> = k2.difference(&k1).copied().collect();
                    let mut expected = k2.clone();
                    for w in frontier {
                        expected.extend(topo.neighbors(w).unwrap());
                    }
                    expected.remove(&u);
                    prop_assert_eq!(&k3, &expected, "node {}", u);
                }
            }
        }
    }
}
