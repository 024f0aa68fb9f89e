//! The unoptimized reference protocol.
//!
//! Every Color message carries the sender's knowledge about itself, its
//! 1-hop neighbors and its 2-hop neighbors (address, priority, color each),
//! so receivers accumulate a table covering their neighborhood up to three
//! hops. A node colors itself under rule R1 (strictly higher priority than
//! every uncolored node in its table) and picks the smallest color unused in
//! the table (rule R2).
//!
//! Knowledge spreads only through these messages: a node learns 3-hop facts
//! exclusively from neighbors' 2-hop entries and never reads the global
//! topology.

use serde::{Deserialize, Serialize};

use crate::priority::Priority;
use crate::{Address, Color};

/// One table entry shipped in a message: who, how important, which color.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerenaEntry {
    pub address: Address,
    pub priority: Priority,
    pub color: Option<Color>,
}

/// The unoptimized Color message: the sender's entry plus everything it
/// knows at one and two hops. Message size therefore grows with the size of
/// the up-to-2-hop neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerenaMessage {
    pub sender: Address,
    pub self_entry: SerenaEntry,
    pub one_hop: Vec<SerenaEntry>,
    pub two_hop: Vec<SerenaEntry>,
}

#[derive(Debug, Clone, Copy)]
struct Known {
    priority: Priority,
    color: Option<Color>,
    /// Best known hop distance from this node (1..=3).
    hops: u8,
}

/// Per-node protocol state for the unoptimized algorithm.
#[derive(Debug, Clone)]
pub struct SerenaState {
    addr: Address,
    priority: Priority,
    color: Option<Color>,
    color_round: Option<u64>,
    /// Live symmetric neighbors (shrinks on R6 eviction).
    one_hop: Vec<Address>,
    /// Knowledge table indexed by address; covers at most the 3-hop ball.
    table: Vec<Option<Known>>,
    /// Neighbors whose latest message carried colors for every entry.
    neighbor_done: Vec<bool>,
    /// Our own latest broadcast carried colors for every entry.
    sent_all_colored: bool,
    /// Set by the harness once the node's table provably covers its 3-hop
    /// neighborhood; rule R1 fires only after that.
    eligible: bool,
    stopped: bool,
    round: u64,
}

impl SerenaState {
    /// `universe` bounds the address space (table sizing). Neighbor
    /// priorities come from the Hello phase and seed the table at one hop.
    pub fn new(
        addr: Address,
        priority: Priority,
        universe: usize,
        neighbor_prios: &[(Address, Priority)],
    ) -> Self {
        let mut table = vec![None; universe];
        let mut one_hop = Vec::with_capacity(neighbor_prios.len());
        for &(v, p) in neighbor_prios {
            one_hop.push(v);
            table[v as usize] = Some(Known { priority: p, color: None, hops: 1 });
        }
        one_hop.sort_unstable();
        Self {
            addr,
            priority,
            color: None,
            color_round: None,
            one_hop,
            neighbor_done: vec![false; universe],
            sent_all_colored: false,
            table,
            eligible: false,
            stopped: false,
            round: 0,
        }
    }

    pub fn address(&self) -> Address {
        self.addr
    }

    pub fn color(&self) -> Option<Color> {
        self.color
    }

    pub fn color_round(&self) -> Option<u64> {
        self.color_round
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn live_neighbors(&self) -> &[Address] {
        &self.one_hop
    }

    pub fn set_eligible(&mut self) {
        self.eligible = true;
    }

    fn table_all_colored(&self) -> bool {
        self.color.is_some() && self.table.iter().flatten().all(|k| k.color.is_some())
    }

    /// Stop condition in the spirit of rule R5: the node and every node of
    /// its table are colored, it has broadcast that fact at least once, and
    /// every live neighbor's latest message was likewise fully colored (so
    /// nobody still depends on our relaying).
    fn update_stopped(&mut self) {
        if self.table_all_colored()
            && self.sent_all_colored
            && self.one_hop.iter().all(|&v| self.neighbor_done[v as usize])
        {
            self.stopped = true;
        }
    }

    pub fn wants_to_send(&self) -> bool {
        !self.stopped
    }

    /// Snapshot broadcast for the current round: self entry plus all known
    /// 1-hop and 2-hop entries. 3-hop entries are never relayed, which caps
    /// propagation at exactly three hops.
    pub fn build_message(&mut self) -> SerenaMessage {
        let mut one_hop = Vec::new();
        let mut two_hop = Vec::new();
        for (a, k) in self.table.iter().enumerate() {
            if let Some(k) = k {
                let entry = SerenaEntry {
                    address: a as Address,
                    priority: k.priority,
                    color: k.color,
                };
                match k.hops {
                    1 => one_hop.push(entry),
                    2 => two_hop.push(entry),
                    _ => {}
                }
            }
        }
        self.sent_all_colored = self.table_all_colored();
        SerenaMessage {
            sender: self.addr,
            self_entry: SerenaEntry {
                address: self.addr,
                priority: self.priority,
                color: self.color,
            },
            one_hop,
            two_hop,
        }
    }

    fn merge_entry(&mut self, entry: SerenaEntry, hops_via_sender: u8) {
        if entry.address == self.addr {
            return;
        }
        let slot = &mut self.table[entry.address as usize];
        match slot {
            Some(k) => {
                if entry.color.is_some() {
                    k.color = entry.color;
                }
                k.hops = k.hops.min(hops_via_sender);
            }
            None => {
                *slot = Some(Known {
                    priority: entry.priority,
                    color: entry.color,
                    hops: hops_via_sender,
                });
            }
        }
    }

    /// Merge one inbox message into the table. Entries about the sender
    /// place it at 1 hop, its 1-hop entries at up to 2 hops, its 2-hop
    /// entries at up to 3 hops.
    pub fn merge_message(&mut self, msg: &SerenaMessage) {
        self.merge_entry(msg.self_entry, 1);
        for &e in &msg.one_hop {
            self.merge_entry(e, 2);
        }
        for &e in &msg.two_hop {
            self.merge_entry(e, 3);
        }
        if let Some(done) = self.neighbor_done.get_mut(msg.sender as usize) {
            *done = msg.self_entry.color.is_some()
                && msg.one_hop.iter().chain(&msg.two_hop).all(|e| e.color.is_some());
        }
    }

    /// Rule R1: color iff strictly higher priority than every uncolored node
    /// in the table. Rule R2: take the smallest color unused in the table.
    pub fn try_color(&mut self) -> Option<Color> {
        if self.color.is_some() || !self.eligible {
            return None;
        }
        let beats_all = self
            .table
            .iter()
            .flatten()
            .filter(|k| k.color.is_none())
            .all(|k| self.priority > k.priority);
        if !beats_all {
            return None;
        }
        let used = crate::ColorBitmap::from_colors(self.table.iter().flatten().filter_map(|k| k.color));
        let color = used.smallest_unset();
        self.color = Some(color);
        self.color_round = Some(self.round);
        Some(color)
    }

    /// Process one synchronous round's inbox: merge, apply R1/R2, refresh
    /// the stop flag. Returns the color taken this round, if any.
    pub fn process_round(&mut self, inbox: &[&SerenaMessage], round: u64) -> Option<Color> {
        self.round = round;
        for msg in inbox {
            self.merge_message(msg);
        }
        let colored = self.try_color();
        self.update_stopped();
        colored
    }

    /// R6 eviction: drop `v` from the live neighbor set. Facts already
    /// learned from `v` remain valid (priorities are static, colors
    /// monotone).
    pub fn evict_neighbor(&mut self, v: Address) {
        self.one_hop.retain(|&x| x != v);
    }
}

/// One synchronous round for a single node: emits this round's broadcast
/// (built from the previous round's state, `None` once stopped), then
/// processes the inbox, colors under R1/R2 and refreshes the stop flag.
///
/// The inbox must hold the messages neighbors broadcast in the same round,
/// i.e. snapshots of *their* previous-round state.
pub fn serena_step(
    state: &mut SerenaState,
    inbox: &[&SerenaMessage],
    round: u64,
) -> Option<SerenaMessage> {
    let out = state.wants_to_send().then(|| state.build_message());
    state.process_round(inbox, round);
    out
}
