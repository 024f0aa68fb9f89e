//! Synchronous round scheduler with Hello-based neighborhood discovery,
//! Bernoulli message loss, metrics, and instrumented runtime invariants.
//!
//! Round semantics: within round `r` every active node broadcasts a snapshot
//! of its round `r-1` state, then processes its full inbox, then colors.
//! Coloring decisions take effect at round end, so two eligible nodes never
//! see each other's same-round decision.
//!
//! Both protocols start applying their coloring rule only once their
//! knowledge horizon provably covers the 3-hop neighborhood. The harness
//! tracks this per node from actual deliveries (the information a real stack
//! would recover from Hello/Color sequence numbers): a node is *mature* once
//! it has received, from every live neighbor `v`, a fresh message sent after
//! `v` itself had heard all of its own neighbors. Nodes without 2-hop
//! neighbors are mature as soon as they have heard every neighbor once,
//! which is what lets a clique color a node per round from round 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::firstfit::{firstfit_3hop, Coloring, FirstFitError};
use crate::oserena::{ListKind, MissingOutcome, NodeState, RoundEffects};
use crate::priority::{compute_prio, Priority};
use crate::serena::{SerenaMessage, SerenaState};
use crate::topology::{split_seed, Topology, TopologyError};
use crate::wire::{hello_bytes, oserena_message_bytes, serena_message_bytes, FieldSizes};
use crate::{Address, Color};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Serena,
    Oserena,
    /// Centralized First Fit, run in one pass.
    Oracle,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Serena => "serena",
            Algorithm::Oserena => "oserena",
            Algorithm::Oracle => "oracle",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "serena" => Ok(Algorithm::Serena),
            "oserena" => Ok(Algorithm::Oserena),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(format!("unknown algorithm `{other}` (serena|oserena|oracle)")),
        }
    }
}

/// How much of the per-round activity lands in the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LogLevel {
    /// Coloring events only: enough for delay detection.
    #[default]
    Coloring,
    /// Also list discards, implicit-colored inference, loss handling, stops.
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub size_mp1: usize,
    pub size_mp2: usize,
    /// Independent Bernoulli loss probability per (message, receiver).
    pub loss_rate: f64,
    /// Rule R6 threshold `n`: consecutive misses before eviction.
    pub r6_threshold: u32,
    pub seed: u64,
    pub field_sizes: FieldSizes,
    /// Abort threshold; defaults to `50 * n` rounds.
    pub round_cap: Option<u64>,
    /// Run the global-knowledge assertions while coloring.
    pub instrument: bool,
    pub log: LogLevel,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            size_mp1: 4,
            size_mp2: 3,
            loss_rate: 0.0,
            r6_threshold: 12,
            seed: 1,
            field_sizes: FieldSizes::default(),
            round_cap: None,
            instrument: true,
            log: LogLevel::default(),
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..1.0).contains(&self.loss_rate) {
            return Err(EngineError::BadConfig(format!(
                "loss_rate must be in [0, 1), got {}",
                self.loss_rate
            )));
        }
        if self.r6_threshold < 2 {
            return Err(EngineError::BadConfig("r6_threshold must be >= 2".into()));
        }
        if self.size_mp1 < 1 || self.size_mp2 < 1 {
            return Err(EngineError::BadConfig("list sizes must be >= 1".into()));
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::new(Algorithm::Oserena)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub round: u64,
    pub node: Address,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Colored { color: Color },
    /// Rule R3 inferred this address recently colored.
    ImplicitColored { inferred: Address },
    /// Rule R4 dropped a known-colored entry while computing a list.
    R4Discard { discarded: Address, list: ListKind },
    StaleReuse { neighbor: Address },
    Evicted { neighbor: Address },
    Stopped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub n: usize,
    pub seed: u64,
    pub topology_connected: bool,
    pub coloring: Coloring,
    pub colors_used: usize,
    /// Rounds executed until every node stopped sending.
    pub rounds: u64,
    /// Last round in which some node colored itself: the time-to-color
    /// metric used for cross-algorithm comparisons.
    pub coloring_rounds: u64,
    pub per_node_color_round: BTreeMap<Address, u64>,
    pub messages_total: u64,
    pub avg_messages_per_node: f64,
    pub bytes_total: u64,
    pub avg_bytes_per_node: f64,
    pub max_message_bytes: usize,
    /// Hello overhead, reported separately from Color bytes.
    pub hello_bytes_total: u64,
    pub avg_hello_bytes_per_node: f64,
    pub stale_reuses: u64,
    pub evictions: u32,
    pub events: Vec<Event>,
    pub config: RunConfig,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("topology has no nodes")]
    EmptyTopology,
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("priority map misses node {0}")]
    MissingPriority(Address),
    #[error("round cap {cap} exceeded; state dump: {dump}")]
    RoundCapExceeded { cap: u64, dump: String },
    #[error("invariant violated at round {round} on node {node}: {what}")]
    InvariantViolation { round: u64, node: Address, what: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    FirstFit(#[from] FirstFitError),
}

/// Result of the two Hello phases: symmetric neighbor sets plus the priority
/// every node computes from its neighbors' degree reports.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub neighbors: BTreeMap<Address, BTreeSet<Address>>,
    pub priorities: BTreeMap<Address, Priority>,
    pub hello_bytes_total: u64,
}

/// Two Hello phases over stable symmetric links: phase 1 establishes the
/// symmetric 1-hop sets, phase 2 exchanges degree-annotated neighbor lists,
/// from which each node computes `prio = deg + sum of neighbor degrees` (and
/// learns the same value for each of its neighbors).
///
/// The `_seed` parameter is reserved for lossy discovery variants; under
/// stable links the exchange is deterministic.
pub fn discover_neighbors(topo: &Topology, _seed: u64) -> Discovery {
    let mut neighbors = BTreeMap::new();
    let mut degrees = BTreeMap::new();
    for u in topo.addresses() {
        let set: BTreeSet<Address> =
            topo.neighbors(u).expect("address from topology").into_iter().collect();
        degrees.insert(u, set.len() as u32);
        neighbors.insert(u, set);
    }
    let mut priorities = BTreeMap::new();
    let mut hello_total = 0u64;
    let sizes = FieldSizes::default();
    for (&u, set) in &neighbors {
        let prio = degrees[&u] + set.iter().map(|v| degrees[v]).sum::<u32>();
        priorities.insert(u, Priority::new(prio, u));
        hello_total += hello_bytes(set.len(), &sizes) as u64;
    }
    Discovery { neighbors, priorities, hello_bytes_total: hello_total }
}

/// Run one simulation with priorities from the Hello phases.
pub fn run(topo: &Topology, config: &RunConfig) -> Result<RunResult, EngineError> {
    let disc = discover_neighbors(topo, config.seed);
    run_inner(topo, config, &disc)
}

/// Run with an injected priority map (any precomputed assignment), keeping
/// the Hello phases for neighbor discovery only.
pub fn run_with_priorities(
    topo: &Topology,
    config: &RunConfig,
    priorities: &BTreeMap<Address, Priority>,
) -> Result<RunResult, EngineError> {
    let mut disc = discover_neighbors(topo, config.seed);
    for u in topo.addresses() {
        let p = priorities.get(&u).ok_or(EngineError::MissingPriority(u))?;
        disc.priorities.insert(u, *p);
    }
    run_inner(topo, config, &disc)
}

enum Broadcast {
    Serena(SerenaMessage),
    Oserena(crate::oserena::ColorMessage),
}

// A run hosts a single variant; the size gap between the two states is fine.
#[allow(clippy::large_enum_variant)]
enum Proto {
    Serena(SerenaState),
    Oserena(NodeState),
}

impl Proto {
    fn wants_to_send(&self) -> bool {
        match self {
            Proto::Serena(s) => s.wants_to_send(),
            Proto::Oserena(s) => !s.is_stopped(),
        }
    }

    fn is_stopped(&self) -> bool {
        match self {
            Proto::Serena(s) => s.is_stopped(),
            Proto::Oserena(s) => s.is_stopped(),
        }
    }

    fn color(&self) -> Option<Color> {
        match self {
            Proto::Serena(s) => s.color(),
            Proto::Oserena(s) => s.color(),
        }
    }

    fn live_neighbors(&self) -> Vec<usize> {
        match self {
            Proto::Serena(s) => s.live_neighbors().iter().map(|&a| a as usize).collect(),
            Proto::Oserena(s) => s.live_neighbors().map(|a| a as usize).collect(),
        }
    }
}

fn lost(loss_seed: u64, loss_rate: f64, round: u64, sender: usize, receiver: usize) -> bool {
    if loss_rate <= 0.0 {
        return false;
    }
    let h = split_seed(
        split_seed(loss_seed, round),
        ((sender as u64) << 32) | receiver as u64,
    );
    (h as f64 / u64::MAX as f64) < loss_rate
}

fn run_inner(topo: &Topology, config: &RunConfig, disc: &Discovery) -> Result<RunResult, EngineError> {
    config.validate()?;
    let n = topo.len();
    if n == 0 {
        return Err(EngineError::EmptyTopology);
    }
    let connected = topo.is_connected();

    if config.algorithm == Algorithm::Oracle {
        return run_oracle(topo, config, disc, connected);
    }

    // Everything below runs in rank space: addresses are replaced by their
    // ascending rank, which preserves the priority tie-break order.
    let addrs: Vec<Address> = topo.addresses().collect();
    let rank_of: BTreeMap<Address, usize> =
        addrs.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let radj: Vec<Vec<usize>> = addrs
        .iter()
        .map(|&a| {
            disc.neighbors[&a].iter().map(|v| rank_of[v]).collect::<Vec<usize>>()
        })
        .collect();
    let prio: Vec<Priority> = addrs
        .iter()
        .enumerate()
        .map(|(i, a)| Priority::new(disc.priorities[a].prio, i as Address))
        .collect();

    let mut nodes: Vec<Proto> = (0..n)
        .map(|u| {
            let nbr_prios: Vec<(Address, Priority)> =
                radj[u].iter().map(|&v| (v as Address, prio[v])).collect();
            match config.algorithm {
                Algorithm::Serena => {
                    Proto::Serena(SerenaState::new(u as Address, prio[u], n, &nbr_prios))
                }
                Algorithm::Oserena => Proto::Oserena(NodeState::new(
                    u as Address,
                    prio[u],
                    config.size_mp1,
                    config.size_mp2,
                    &nbr_prios,
                )),
                Algorithm::Oracle => unreachable!(),
            }
        })
        .collect();

    // Maturity bookkeeping (see module docs).
    let n2_empty: Vec<bool> = addrs
        .iter()
        .map(|&a| {
            let k1 = topo.khop_neighbors(a, 1).expect("known address");
            let k2 = topo.khop_neighbors(a, 2).expect("known address");
            k1 == k2
        })
        .collect();
    let mut heard_once: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut certified: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut g1: Vec<Option<u64>> = vec![None; n];
    let mut eligible = vec![false; n];

    // SERENA miss counters (OSERENA keeps them in its neighbor records).
    let mut serena_misses: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); n];

    let mut msgs_sent = vec![0u64; n];
    let mut bytes_sent = vec![0u64; n];
    let mut max_message_bytes = 0usize;
    let mut events: Vec<Event> = Vec::new();
    let mut colored_at: Vec<Option<u64>> = vec![None; n];
    let mut stale_reuses = 0u64;
    let mut evictions = 0u32;
    let mut khop3_cache: Vec<Option<Vec<usize>>> = vec![None; n];

    let cap = config.round_cap.unwrap_or(50 * n as u64).max(1);
    let full_log = config.log == LogLevel::Full;
    let loss_seed = split_seed(config.seed, 0x1055);
    let mut round = 0u64;
    let mut rounds_executed = 0u64;

    loop {
        if nodes.iter().all(Proto::is_stopped) {
            break;
        }
        round += 1;
        if round > cap {
            let dump = state_dump(&addrs, &nodes, round);
            return Err(EngineError::RoundCapExceeded { cap, dump });
        }
        rounds_executed = round;

        // Phase A: every active node broadcasts its previous-round snapshot.
        let outs: Vec<Option<Broadcast>> = nodes
            .iter_mut()
            .map(|node| {
                node.wants_to_send().then(|| match node {
                    Proto::Serena(s) => Broadcast::Serena(s.build_message()),
                    Proto::Oserena(s) => Broadcast::Oserena(s.build_message()),
                })
            })
            .collect();
        for (u, out) in outs.iter().enumerate() {
            if let Some(b) = out {
                let size = match b {
                    Broadcast::Serena(m) => serena_message_bytes(m, &config.field_sizes),
                    Broadcast::Oserena(m) => oserena_message_bytes(m, &config.field_sizes),
                };
                msgs_sent[u] += 1;
                bytes_sent[u] += size as u64;
                max_message_bytes = max_message_bytes.max(size);
            }
        }

        // Global coloring state as of the end of the previous round: what
        // this round's decisions may legitimately depend on.
        let colors_before: Vec<Option<Color>> = nodes.iter().map(Proto::color).collect();

        // Phases B + C: route with loss, then per-node processing.
        let mut newly_colored: Vec<(usize, Color)> = Vec::new();
        for u in 0..n {
            if nodes[u].is_stopped() {
                continue;
            }
            let mut fresh: Vec<usize> = Vec::new();
            for &v in &radj[u] {
                if outs[v].is_some() && !lost(loss_seed, config.loss_rate, round, v, u) {
                    fresh.push(v);
                }
            }
            heard_once[u].extend(fresh.iter().copied());
            for &v in &fresh {
                // Certified once v's message was built after v had heard all
                // of its own neighbors (g1 values are from earlier rounds).
                if g1[v].is_some() {
                    certified[u].insert(v);
                }
            }
            let fresh_set: BTreeSet<usize> = fresh.iter().copied().collect();

            let mut effects = RoundEffects::default();
            let mut misses: Vec<(usize, bool)> = Vec::new(); // (neighbor, evicted)
            let colored = match &mut nodes[u] {
                Proto::Serena(state) => {
                    let inbox: Vec<&SerenaMessage> = fresh
                        .iter()
                        .map(|&v| match outs[v].as_ref().unwrap() {
                            Broadcast::Serena(m) => m,
                            Broadcast::Oserena(_) => unreachable!(),
                        })
                        .collect();
                    let live: Vec<usize> =
                        state.live_neighbors().iter().map(|&a| a as usize).collect();
                    for v in live {
                        if fresh_set.contains(&v) {
                            serena_misses[u].remove(&v);
                            continue;
                        }
                        let count = serena_misses[u].entry(v).or_insert(0);
                        *count += 1;
                        if *count >= config.r6_threshold {
                            state.evict_neighbor(v as Address);
                            serena_misses[u].remove(&v);
                            misses.push((v, true));
                        } else {
                            misses.push((v, false));
                        }
                    }
                    let live_now: Vec<usize> =
                        state.live_neighbors().iter().map(|&a| a as usize).collect();
                    update_eligibility(
                        u, &live_now, &n2_empty, &heard_once, &certified, &mut eligible,
                    );
                    if eligible[u] {
                        state.set_eligible();
                    }
                    state.process_round(&inbox, round)
                }
                Proto::Oserena(state) => {
                    for &v in &fresh {
                        match outs[v].as_ref().unwrap() {
                            Broadcast::Oserena(m) => state.receive(m, &mut effects),
                            Broadcast::Serena(_) => unreachable!(),
                        }
                    }
                    let live: Vec<Address> = state.live_neighbors().collect();
                    for v in live {
                        if fresh_set.contains(&(v as usize)) {
                            continue;
                        }
                        match state.handle_missing_neighbor(v, config.r6_threshold) {
                            MissingOutcome::StaleReused => misses.push((v as usize, false)),
                            MissingOutcome::Evicted => misses.push((v as usize, true)),
                            MissingOutcome::NothingToReuse => {}
                        }
                    }
                    let live_now: Vec<usize> =
                        state.live_neighbors().map(|a| a as usize).collect();
                    update_eligibility(
                        u, &live_now, &n2_empty, &heard_once, &certified, &mut eligible,
                    );
                    if eligible[u] {
                        state.set_eligible();
                    }
                    state.finish_round(round, &mut effects)
                }
            };

            for (v, evicted) in misses {
                if evicted {
                    evictions += 1;
                } else {
                    stale_reuses += 1;
                }
                if full_log {
                    let kind = if evicted {
                        EventKind::Evicted { neighbor: addrs[v] }
                    } else {
                        EventKind::StaleReuse { neighbor: addrs[v] }
                    };
                    events.push(Event { round, node: addrs[u], kind });
                }
            }

            if let Some(color) = colored {
                colored_at[u] = Some(round);
                newly_colored.push((u, color));
                events.push(Event {
                    round,
                    node: addrs[u],
                    kind: EventKind::Colored { color },
                });
            }
            if full_log {
                for a in &effects.implicit_inserted {
                    events.push(Event {
                        round,
                        node: addrs[u],
                        kind: EventKind::ImplicitColored { inferred: addrs[*a as usize] },
                    });
                }
                for (a, list) in &effects.r4_discards {
                    events.push(Event {
                        round,
                        node: addrs[u],
                        kind: EventKind::R4Discard { discarded: addrs[*a as usize], list: *list },
                    });
                }
                if nodes[u].is_stopped() {
                    events.push(Event { round, node: addrs[u], kind: EventKind::Stopped });
                }
            }

            // Rule R3 soundness: inferred nodes must be truly colored.
            if config.instrument {
                for a in &effects.implicit_inserted {
                    if colors_before[*a as usize].is_none() {
                        return Err(EngineError::InvariantViolation {
                            round,
                            node: addrs[u],
                            what: format!(
                                "implicit_node_colored_list false positive: {} is not colored",
                                addrs[*a as usize]
                            ),
                        });
                    }
                }
            }
        }

        // Instrumented global-knowledge checks for this round's colorings.
        if config.instrument {
            for &(u, color) in &newly_colored {
                check_coloring_invariants(
                    topo, &addrs, &rank_of, &prio, &nodes, &colors_before, u, color, round,
                    config, &mut khop3_cache,
                )?;
            }
        }

        // Maturity bookkeeping update, after all certifications this round.
        for u in 0..n {
            if g1[u].is_none() {
                let live = nodes[u].live_neighbors();
                if live.iter().all(|v| heard_once[u].contains(v)) {
                    g1[u] = Some(round);
                }
            }
        }
    }

    // Assemble the result back in address space.
    let coloring: Coloring = (0..n)
        .map(|u| (addrs[u], nodes[u].color().expect("all nodes colored at termination")))
        .collect();
    let per_node_color_round: BTreeMap<Address, u64> = (0..n)
        .map(|u| (addrs[u], colored_at[u].expect("colored")))
        .collect();
    let coloring_rounds = per_node_color_round.values().copied().max().unwrap_or(0);
    let messages_total: u64 = msgs_sent.iter().sum();
    let bytes_total: u64 = bytes_sent.iter().sum();
    let colors_used = coloring.colors_used();
    Ok(RunResult {
        algorithm: config.algorithm,
        n,
        seed: config.seed,
        topology_connected: connected,
        coloring,
        colors_used,
        rounds: rounds_executed,
        coloring_rounds,
        per_node_color_round,
        messages_total,
        avg_messages_per_node: messages_total as f64 / n as f64,
        bytes_total,
        avg_bytes_per_node: bytes_total as f64 / n as f64,
        max_message_bytes,
        hello_bytes_total: disc.hello_bytes_total,
        avg_hello_bytes_per_node: disc.hello_bytes_total as f64 / n as f64,
        stale_reuses,
        evictions,
        events,
        config: config.clone(),
    })
}

fn update_eligibility(
    u: usize,
    live: &[usize],
    n2_empty: &[bool],
    heard_once: &[BTreeSet<usize>],
    certified: &[BTreeSet<usize>],
    eligible: &mut [bool],
) {
    if eligible[u] {
        return;
    }
    let ready = if n2_empty[u] {
        live.iter().all(|v| heard_once[u].contains(v))
    } else {
        live.iter().all(|v| certified[u].contains(v))
    };
    if ready {
        eligible[u] = true;
    }
}

#[allow(clippy::too_many_arguments)]
fn check_coloring_invariants(
    topo: &Topology,
    addrs: &[Address],
    rank_of: &BTreeMap<Address, usize>,
    prio: &[Priority],
    nodes: &[Proto],
    colors_before: &[Option<Color>],
    u: usize,
    color: Color,
    round: u64,
    config: &RunConfig,
    khop3_cache: &mut [Option<Vec<usize>>],
) -> Result<(), EngineError> {
    if khop3_cache[u].is_none() {
        let ball = topo
            .khop_neighbors(addrs[u], 3)
            .expect("known address")
            .into_iter()
            .map(|a| rank_of[&a])
            .collect();
        khop3_cache[u] = Some(ball);
    }
    let ball = khop3_cache[u].as_ref().unwrap();

    // A node may color only while holding the highest priority among the
    // uncolored nodes of its 3-hop neighborhood.
    for &v in ball {
        if colors_before[v].is_none() && prio[u] <= prio[v] {
            return Err(EngineError::InvariantViolation {
                round,
                node: addrs[u],
                what: format!(
                    "colored while uncolored {} has higher priority",
                    addrs[v]
                ),
            });
        }
    }

    // Validity while running: the chosen color must differ from every
    // already-colored node within 3 hops.
    let taken: BTreeSet<Color> = ball.iter().filter_map(|&v| colors_before[v]).collect();
    if taken.contains(&color) {
        return Err(EngineError::InvariantViolation {
            round,
            node: addrs[u],
            what: format!("took color {color} already used within 3 hops"),
        });
    }

    // At coloring time the node knows exactly the colors taken within 3
    // hops (exactness requires lossless links; under
    // loss the exclusion set only ever lags behind, never invents).
    if let Proto::Oserena(state) = &nodes[u] {
        let known: BTreeSet<Color> = state.excluded_colors().colors().collect();
        if !known.is_subset(&taken) {
            return Err(EngineError::InvariantViolation {
                round,
                node: addrs[u],
                what: format!("exclusion set {known:?} contains colors unused in the 3-hop ball"),
            });
        }
        if config.loss_rate == 0.0 && known != taken {
            return Err(EngineError::InvariantViolation {
                round,
                node: addrs[u],
                what: format!("exclusion set {known:?} differs from 3-hop colors {taken:?}"),
            });
        }
    }
    Ok(())
}

fn run_oracle(
    topo: &Topology,
    config: &RunConfig,
    disc: &Discovery,
    connected: bool,
) -> Result<RunResult, EngineError> {
    let coloring = firstfit_3hop(topo, &disc.priorities)?;
    let n = topo.len();
    let per_node_color_round: BTreeMap<Address, u64> =
        topo.addresses().map(|a| (a, 1)).collect();
    let colors_used = coloring.colors_used();
    Ok(RunResult {
        algorithm: Algorithm::Oracle,
        n,
        seed: config.seed,
        topology_connected: connected,
        coloring,
        colors_used,
        rounds: 1,
        coloring_rounds: 1,
        per_node_color_round,
        messages_total: 0,
        avg_messages_per_node: 0.0,
        bytes_total: 0,
        avg_bytes_per_node: 0.0,
        max_message_bytes: 0,
        hello_bytes_total: disc.hello_bytes_total,
        avg_hello_bytes_per_node: disc.hello_bytes_total as f64 / n as f64,
        stale_reuses: 0,
        evictions: 0,
        events: Vec::new(),
        config: config.clone(),
    })
}

fn state_dump(addrs: &[Address], nodes: &[Proto], round: u64) -> String {
    #[derive(Serialize)]
    struct NodeDump {
        address: Address,
        color: Option<Color>,
        stopped: bool,
    }
    #[derive(Serialize)]
    struct Dump {
        round: u64,
        nodes: Vec<NodeDump>,
    }
    let dump = Dump {
        round,
        nodes: addrs
            .iter()
            .zip(nodes)
            .map(|(&address, node)| NodeDump {
                address,
                color: node.color(),
                stopped: node.is_stopped(),
            })
            .collect(),
    };
    serde_json::to_string(&dump).unwrap_or_else(|_| "<dump failed>".into())
}

/// Assert that Hello-derived priorities equal the topology-direct formula.
pub fn discovery_matches_compute_prio(topo: &Topology) -> bool {
    let disc = discover_neighbors(topo, 0);
    topo.addresses().all(|u| {
        compute_prio(topo, u).is_ok_and(|p| Priority::new(p, u) == disc.priorities[&u])
    })
}
