//! The optimized protocol.
//!
//! Instead of shipping whole neighborhoods, a Color message carries the
//! sender's priority, two bounded descending priority lists (`max_prio1`,
//! `max_prio2`), its color, and two color bitmaps. Six rules drive the
//! protocol:
//!
//! - R'1: a node colors itself when its own priority equals the maximum over
//!   its `max_prio` lists (its priority echoes back through neighbors'
//!   lists, so equality is the test).
//! - R'2: it takes the smallest color absent from `bitmap1 | bitmap2 |
//!   bitmap3`, also avoiding colors of heard-only nodes.
//! - R3: entries that vanish from the top of a neighbor's list between two
//!   messages are inferred colored and recorded in
//!   `implicit_node_colored_list`.
//! - R4: known-colored entries are discarded from list merges, but only from
//!   positions where the truncated list provably hides no live rival.
//! - R5: a colored node stops sending once its own `max_prio1` is empty and
//!   every neighbor reported both lists empty.
//! - R6: a missed message is replaced by the neighbor's previous one; after
//!   `n` consecutive misses the neighbor is evicted.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bitset::ColorBitmap;
use crate::priority::Priority;
use crate::{Address, Color};

/// Bounded descending priority list with unique addresses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPrioList {
    cap: usize,
    entries: Vec<Priority>,
}

impl MaxPrioList {
    pub fn new(cap: usize) -> Self {
        Self { cap, entries: Vec::new() }
    }

    pub fn from_iter(cap: usize, iter: impl IntoIterator<Item = Priority>) -> Self {
        let mut list = Self::new(cap);
        for p in iter {
            list.insert(p);
        }
        list
    }

    /// Insert keeping the list strictly descending, addresses unique, and at
    /// most `cap` entries (lowest dropped).
    pub fn insert(&mut self, p: Priority) {
        if self.entries.iter().any(|e| e.address == p.address) {
            return;
        }
        let pos = self.entries.partition_point(|e| *e > p);
        if pos >= self.cap {
            return;
        }
        self.entries.insert(pos, p);
        self.entries.truncate(self.cap);
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<Priority> {
        self.entries.first().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Priority> + '_ {
        self.entries.iter().copied()
    }

    pub fn contains_address(&self, a: Address) -> bool {
        self.entries.iter().any(|e| e.address == a)
    }
}

/// The optimized Color message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorMessage {
    pub sender: Address,
    pub priority: Priority,
    pub max_prio1: MaxPrioList,
    pub max_prio2: MaxPrioList,
    pub color: Option<Color>,
    /// Colors used at 1 hop from the sender (its own color included).
    pub bitmap1: ColorBitmap,
    /// Colors used at 2 hops from the sender: union of received bitmap1.
    pub bitmap2: ColorBitmap,
}

/// What a node remembers about one live neighbor.
#[derive(Debug, Clone)]
pub struct NeighborRecord {
    pub last_msg: ColorMessage,
    /// Consecutive rounds without a fresh message (0 = heard this round).
    pub rounds_since_seen: u32,
}

/// Outcome of [`NodeState::handle_missing_neighbor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingOutcome {
    /// The stale message keeps feeding list computation (rule R6, miss < n).
    StaleReused,
    /// Never heard from this neighbor yet; nothing to reuse.
    NothingToReuse,
    /// Miss threshold reached: no longer considered a 1-hop neighbor.
    Evicted,
}

/// Per-node protocol state.
#[derive(Debug, Clone)]
pub struct NodeState {
    addr: Address,
    priority: Priority,
    color: Option<Color>,
    color_round: Option<u64>,
    size_mp1: usize,
    size_mp2: usize,
    /// Live symmetric neighbors with their Hello-learned priorities.
    neighbor_prios: BTreeMap<Address, Priority>,
    records: BTreeMap<Address, NeighborRecord>,
    /// Nodes inferred colored (rule R3), plus senders seen with a color.
    implicit_node_colored_list: BTreeSet<Address>,
    /// The subset of `implicit_node_colored_list` whose colors provably ride
    /// in this node's outgoing bitmaps: senders heard with a color field
    /// (bitmap1) and max_prio1-level vanishes (the observed message carried
    /// the color in its bitmap1, so it sits in our bitmap2). Only these may
    /// prune entries from *outgoing* lists; pruning on deeper inference
    /// would advertise "colored" faster than the color itself can travel
    /// (bitmap3 is never transmitted), which under message loss lets a
    /// receiver pick a conflicting color.
    palette_backed_colored: BTreeSet<Address>,
    max_prio1: MaxPrioList,
    max_prio2: MaxPrioList,
    max_prio3: Option<Priority>,
    bitmap1: ColorBitmap,
    bitmap2: ColorBitmap,
    bitmap3: ColorBitmap,
    /// Colors of heard-only nodes (no symmetric link); excluded from the
    /// palette by the R'2 note. A no-op under assumption A0.
    heard_colors: ColorBitmap,
    eligible: bool,
    stopped: bool,
    round: u64,
}

/// Lists touched by an R4 discard, for event logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ListKind {
    MaxPrio1,
    MaxPrio2,
    MaxPrio3,
}

/// Side effects of one processing round worth logging.
#[derive(Debug, Clone, Default)]
pub struct RoundEffects {
    pub implicit_inserted: Vec<Address>,
    pub r4_discards: Vec<(Address, ListKind)>,
}

impl NodeState {
    pub fn new(
        addr: Address,
        priority: Priority,
        size_mp1: usize,
        size_mp2: usize,
        neighbor_prios: &[(Address, Priority)],
    ) -> Self {
        assert!(size_mp1 >= 1 && size_mp2 >= 1, "list capacities must be positive");
        let neighbor_prios: BTreeMap<Address, Priority> =
            neighbor_prios.iter().copied().collect();
        // Round-1 broadcast carries the Hello-seeded list: every neighbor is
        // still uncolored.
        let max_prio1 = MaxPrioList::from_iter(size_mp1, neighbor_prios.values().copied());
        Self {
            addr,
            priority,
            color: None,
            color_round: None,
            size_mp1,
            size_mp2,
            neighbor_prios,
            records: BTreeMap::new(),
            implicit_node_colored_list: BTreeSet::new(),
            palette_backed_colored: BTreeSet::new(),
            max_prio1,
            max_prio2: MaxPrioList::new(size_mp2),
            max_prio3: None,
            bitmap1: ColorBitmap::new(),
            bitmap2: ColorBitmap::new(),
            bitmap3: ColorBitmap::new(),
            heard_colors: ColorBitmap::new(),
            eligible: false,
            stopped: false,
            round: 0,
        }
    }

    pub fn address(&self) -> Address {
        self.addr
    }

    pub fn priority(&self) -> Priority {
        self.priority
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

    pub fn live_neighbors(&self) -> impl Iterator<Item = Address> + '_ {
        self.neighbor_prios.keys().copied()
    }

    pub fn implicit_node_colored_size(&self) -> usize {
        self.implicit_node_colored_list.len()
    }

    pub fn implicit_node_colored_list(&self) -> &BTreeSet<Address> {
        &self.implicit_node_colored_list
    }

    pub fn set_eligible(&mut self) {
        self.eligible = true;
    }

    pub fn max_prio1(&self) -> &MaxPrioList {
        &self.max_prio1
    }

    pub fn max_prio2(&self) -> &MaxPrioList {
        &self.max_prio2
    }

    pub fn max_prio3(&self) -> Option<Priority> {
        self.max_prio3
    }

    /// The palette exclusion set used by rule R'2.
    pub fn excluded_colors(&self) -> ColorBitmap {
        let mut used = self.bitmap1.clone();
        used.union_with(&self.bitmap2);
        used.union_with(&self.bitmap3);
        used.union_with(&self.heard_colors);
        used
    }

    fn known_colored(&self, a: Address) -> bool {
        self.implicit_node_colored_list.contains(&a)
    }

    /// Rule R3: compare a neighbor's fresh lists against its previous ones.
    /// Every previous entry strictly higher than the new head (or any entry
    /// when the new list is empty) refers to a freshly colored node. Senders
    /// whose color field is set are recorded as well.
    ///
    /// max_prio1-level vanishes and color fields also enter the
    /// palette-backed set: the very message carrying the vanish carries the
    /// node's color in bitmap1 (senders drop a neighbor from max_prio1 only
    /// once they heard its color directly), respectively in its color field.
    pub fn update_implicit_colored(&mut self, msg: &ColorMessage) -> Vec<Address> {
        let mut inferred = Vec::new();
        if let Some(record) = self.records.get(&msg.sender) {
            let prev = &record.last_msg;
            for (mp1_level, previous, current) in [
                (true, &prev.max_prio1, &msg.max_prio1),
                (false, &prev.max_prio2, &msg.max_prio2),
            ] {
                for p in previous.iter() {
                    let vanished_above = match current.head() {
                        None => true,
                        Some(head) => p > head,
                    };
                    if vanished_above {
                        if mp1_level {
                            self.palette_backed_colored.insert(p.address);
                        }
                        if self.implicit_node_colored_list.insert(p.address) {
                            inferred.push(p.address);
                        }
                    }
                }
            }
        }
        if msg.color.is_some() {
            self.palette_backed_colored.insert(msg.sender);
            if self.implicit_node_colored_list.insert(msg.sender) {
                inferred.push(msg.sender);
            }
        }
        inferred
    }

    /// Ingest one fresh message from a symmetric neighbor: R3 inference,
    /// then store it as the latest record. Messages from non-neighbors only
    /// contribute their color to the heard-only palette.
    pub fn receive(&mut self, msg: &ColorMessage, effects: &mut RoundEffects) {
        if !self.neighbor_prios.contains_key(&msg.sender) {
            if let Some(c) = msg.color {
                self.heard_colors.set(c);
            }
            return;
        }
        let inferred = self.update_implicit_colored(msg);
        effects.implicit_inserted.extend(inferred);
        self.records.insert(
            msg.sender,
            NeighborRecord { last_msg: msg.clone(), rounds_since_seen: 0 },
        );
    }

    /// Rule R6. A miss below the threshold keeps the stale record in use;
    /// reaching the threshold evicts the neighbor entirely.
    pub fn handle_missing_neighbor(&mut self, v: Address, threshold: u32) -> MissingOutcome {
        if !self.neighbor_prios.contains_key(&v) {
            return MissingOutcome::Evicted;
        }
        let misses = match self.records.get_mut(&v) {
            Some(record) => {
                record.rounds_since_seen += 1;
                record.rounds_since_seen
            }
            None => 1,
        };
        if misses >= threshold {
            self.neighbor_prios.remove(&v);
            self.records.remove(&v);
            MissingOutcome::Evicted
        } else if self.records.contains_key(&v) {
            MissingOutcome::StaleReused
        } else {
            MissingOutcome::NothingToReuse
        }
    }

    /// Whether a known-colored entry at `pos` (0-based) of a received
    /// `max_prio1` list may be discarded in the `max_prio2` merge (rule R4):
    /// the head always, others only while the list leaves at least one slot
    /// empty, so the truncation cannot hide a live rival.
    fn mp1_discardable(pos: usize, len: usize, cap: usize) -> bool {
        pos == 0 || len < cap
    }

    /// Rule R4 for the `max_prio3` computation: only entries above the last
    /// slot of a received `max_prio2` list may be discarded.
    fn mp2_discardable(pos: usize, cap: usize) -> bool {
        pos + 1 < cap
    }

    /// Compute this round's three lists from the latest (fresh or stale)
    /// neighbor messages, applying rule R4's discard conditions.
    ///
    /// The two *transmitted* lists drop a known-colored node only when its
    /// color is already backed by this node's outgoing bitmaps (see
    /// `palette_backed_colored`); the local max_prio3 may use every
    /// inference.
    pub fn compute_max_prios(
        &self,
        effects: &mut RoundEffects,
    ) -> (MaxPrioList, MaxPrioList, Option<Priority>) {
        // max_prio1: highest priorities of live neighbors not yet heard with
        // a color of their own.
        let mut mp1 = MaxPrioList::new(self.size_mp1);
        for (&v, &p) in &self.neighbor_prios {
            let colored = self.records.get(&v).is_some_and(|r| r.last_msg.color.is_some());
            if !colored {
                mp1.insert(p);
            }
        }

        // max_prio2: merge of received max_prio1 lists.
        let mut mp2 = MaxPrioList::new(self.size_mp2);
        for record in self.records.values() {
            let list = &record.last_msg.max_prio1;
            for (pos, p) in list.iter().enumerate() {
                if self.palette_backed_colored.contains(&p.address)
                    && Self::mp1_discardable(pos, list.len(), list.cap())
                {
                    effects.r4_discards.push((p.address, ListKind::MaxPrio2));
                    continue;
                }
                mp2.insert(p);
            }
        }

        // max_prio3: single maximum over received max_prio2 lists.
        let mut mp3: Option<Priority> = None;
        for record in self.records.values() {
            let list = &record.last_msg.max_prio2;
            for (pos, p) in list.iter().enumerate() {
                if self.known_colored(p.address) && Self::mp2_discardable(pos, list.cap()) {
                    effects.r4_discards.push((p.address, ListKind::MaxPrio3));
                    continue;
                }
                if mp3.is_none_or(|m| p > m) {
                    mp3 = Some(p);
                }
            }
        }
        (mp1, mp2, mp3)
    }

    fn recompute_bitmaps(&mut self) {
        let mut bm2 = ColorBitmap::new();
        let mut bm3 = ColorBitmap::new();
        for record in self.records.values() {
            bm2.union_with(&record.last_msg.bitmap1);
            bm3.union_with(&record.last_msg.bitmap2);
        }
        self.bitmap2 = bm2;
        self.bitmap3 = bm3;
        let mut bm1 = ColorBitmap::new();
        for record in self.records.values() {
            if let Some(c) = record.last_msg.color {
                bm1.set(c);
            }
        }
        if let Some(c) = self.color {
            bm1.set(c);
        }
        self.bitmap1 = bm1;
    }

    /// Rule R'1 / R'2. The node colors itself when its priority equals the
    /// maximum over its three lists; with all lists empty there is nothing
    /// left to wait for (isolated node, or everyone else colored and
    /// pruned). Returns the chosen color.
    pub fn try_color(&mut self) -> Option<Color> {
        if self.color.is_some() || !self.eligible {
            return None;
        }
        let best = self
            .max_prio1
            .iter()
            .chain(self.max_prio2.iter())
            .chain(self.max_prio3)
            .max();
        let wins = match best {
            None => true,
            Some(b) => self.priority >= b,
        };
        if !wins {
            return None;
        }
        let color = self.excluded_colors().smallest_unset();
        self.color = Some(color);
        self.color_round = Some(self.round);
        Some(color)
    }

    /// Rule R5, verbatim: colored, own `max_prio1` empty, and every live
    /// neighbor's latest message carries empty `max_prio1` and `max_prio2`.
    pub fn should_stop(&self) -> bool {
        self.color.is_some()
            && self.max_prio1.is_empty()
            && self.neighbor_prios.keys().all(|v| {
                self.records.get(v).is_some_and(|r| {
                    r.last_msg.max_prio1.is_empty() && r.last_msg.max_prio2.is_empty()
                })
            })
    }

    /// The broadcast for the next round: current lists, own color, bitmap1
    /// rebuilt from neighbor colors plus our own, bitmap2 as merged from
    /// received bitmap1 fields. The own color is added here because coloring
    /// happens after the round's bitmaps were computed.
    pub fn build_message(&self) -> ColorMessage {
        let mut bitmap1 = self.bitmap1.clone();
        if let Some(c) = self.color {
            bitmap1.set(c);
        }
        ColorMessage {
            sender: self.addr,
            priority: self.priority,
            max_prio1: self.max_prio1.clone(),
            max_prio2: self.max_prio2.clone(),
            color: self.color,
            bitmap1,
            bitmap2: self.bitmap2.clone(),
        }
    }

    /// Full processing for one synchronous round, after the engine routed
    /// this round's fresh messages into [`NodeState::receive`] and applied
    /// [`NodeState::handle_missing_neighbor`] for silent neighbors.
    pub fn finish_round(&mut self, round: u64, effects: &mut RoundEffects) -> Option<Color> {
        self.round = round;
        let (mp1, mp2, mp3) = self.compute_max_prios(effects);
        self.max_prio1 = mp1;
        self.max_prio2 = mp2;
        self.max_prio3 = mp3;
        self.recompute_bitmaps();
        let colored = self.try_color();
        if self.should_stop() {
            self.stopped = true;
        }
        colored
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prio(p: u32, a: Address) -> Priority {
        Priority::new(p, a)
    }

    fn msg(sender: Address, p: Priority) -> ColorMessage {
        ColorMessage {
            sender,
            priority: p,
            max_prio1: MaxPrioList::new(4),
            max_prio2: MaxPrioList::new(3),
            color: None,
            bitmap1: ColorBitmap::new(),
            bitmap2: ColorBitmap::new(),
        }
    }

    #[test]
    fn max_prio_list_is_descending_unique_truncated() {
        let mut list = MaxPrioList::new(4);
        for (p, a) in [(5, 1), (9, 2), (7, 3), (6, 4), (8, 5), (9, 2)] {
            list.insert(prio(p, a));
        }
        let got: Vec<(u32, Address)> = list.iter().map(|p| (p.prio, p.address)).collect();
        assert_eq!(got, vec![(9, 2), (8, 5), (7, 3), (6, 4)]);
    }

    #[test]
    fn five_uncolored_neighbors_truncate_at_four() {
        let nbrs: Vec<(Address, Priority)> =
            (1..=5).map(|a| (a, prio(10 - a, a))).collect();
        let state = NodeState::new(9, prio(20, 9), 4, 3, &nbrs);
        let mut fx = RoundEffects::default();
        let (mp1, mp2, mp3) = state.compute_max_prios(&mut fx);
        let got: Vec<u32> = mp1.iter().map(|p| p.prio).collect();
        assert_eq!(got, vec![9, 8, 7, 6], "four highest priorities only");
        assert!(mp2.is_empty());
        assert!(mp3.is_none());
    }

    #[test]
    fn all_neighbors_colored_yields_empty_lists() {
        let nbrs = [(1, prio(9, 1)), (2, prio(8, 2))];
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        let mut fx = RoundEffects::default();
        for (v, p) in nbrs {
            let mut m = msg(v, p);
            m.color = Some(0);
            state.receive(&m, &mut fx);
        }
        let (mp1, mp2, mp3) = state.compute_max_prios(&mut fx);
        assert!(mp1.is_empty());
        assert!(mp2.is_empty());
        assert!(mp3.is_none());
    }

    #[test]
    fn r4_discards_head_but_keeps_second_of_full_list() {
        // Neighbor v sends a full max_prio1.
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        let full: Vec<Priority> = (0..4).map(|i| prio(40 - i, 10 + i)).collect();

        // Case 1: head known colored -> discarded from the merge.
        let mut m = msg(1, prio(50, 1));
        m.max_prio1 = MaxPrioList::from_iter(4, full.iter().copied());
        state.receive(&m, &mut fx);
        state.implicit_node_colored_list.insert(10); // head address
        state.palette_backed_colored.insert(10);
        let (_, mp2, _) = state.compute_max_prios(&mut fx);
        assert!(!mp2.contains_address(10), "head discard is unconditional");
        assert!(mp2.contains_address(11));

        // Case 2: second entry known colored, all four slots occupied -> kept.
        state.implicit_node_colored_list.clear();
        state.palette_backed_colored.clear();
        state.implicit_node_colored_list.insert(11);
        state.palette_backed_colored.insert(11);
        let (_, mp2, _) = state.compute_max_prios(&mut fx);
        assert!(mp2.contains_address(11), "kept: no slot may be empty");
    }

    #[test]
    fn r4_discards_second_when_list_leaves_a_slot_empty() {
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        let mut m = msg(1, prio(50, 1));
        // Only three of four slots used: the fourth is empty.
        m.max_prio1 = MaxPrioList::from_iter(4, (0..3).map(|i| prio(40 - i, 10 + i)));
        state.receive(&m, &mut fx);
        state.implicit_node_colored_list.insert(11);
        state.palette_backed_colored.insert(11);
        let (_, mp2, _) = state.compute_max_prios(&mut fx);
        assert!(!mp2.contains_address(11));
    }

    #[test]
    fn deep_inference_never_prunes_outgoing_lists() {
        // Node 30 is known colored only through a max_prio2-level vanish:
        // its color cannot be in our outgoing bitmaps yet, so it must stay
        // in the max_prio2 we transmit (it may still feed max_prio3 locally).
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1)), (2, prio(49, 2))]);
        let mut fx = RoundEffects::default();
        let mut first = msg(1, prio(50, 1));
        first.max_prio2 = MaxPrioList::from_iter(3, [prio(90, 30)]);
        state.receive(&first, &mut fx);
        let second = msg(1, prio(50, 1)); // 30 vanished from max_prio2(1)
        state.receive(&second, &mut fx);
        assert!(state.implicit_node_colored_list.contains(&30));
        assert!(!state.palette_backed_colored.contains(&30));

        // Another neighbor still lists 30 at the head of its stale max_prio1.
        let mut stale = msg(2, prio(49, 2));
        stale.max_prio1 = MaxPrioList::from_iter(4, [prio(90, 30)]);
        state.receive(&stale, &mut fx);
        let (_, mp2, _) = state.compute_max_prios(&mut fx);
        assert!(
            mp2.contains_address(30),
            "only palette-backed knowledge may prune transmitted lists"
        );
    }

    #[test]
    fn r4_mp3_discards_first_and_second_only() {
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        let mut m = msg(1, prio(50, 1));
        m.max_prio2 = MaxPrioList::from_iter(3, (0..3).map(|i| prio(40 - i, 10 + i)));
        state.receive(&m, &mut fx);
        // All three entries known colored: positions 1 and 2 go, 3 sticks.
        state.implicit_node_colored_list.extend([10, 11, 12]);
        let (_, _, mp3) = state.compute_max_prios(&mut fx);
        assert_eq!(mp3, Some(prio(38, 12)), "third entry cannot be discarded");
    }

    #[test]
    fn r3_inserts_vanished_head() {
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        let mut first = msg(1, prio(50, 1));
        first.max_prio1 = MaxPrioList::from_iter(4, [prio(9, 30)]);
        state.receive(&first, &mut fx);

        let second = msg(1, prio(50, 1)); // empty lists now
        let inferred = state.update_implicit_colored(&second);
        assert_eq!(inferred, vec![30], "disappeared head of an emptied list");
    }

    #[test]
    fn r3_keeps_entries_not_above_new_head() {
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        let mut first = msg(1, prio(50, 1));
        first.max_prio1 = MaxPrioList::from_iter(4, [prio(9, 30), prio(7, 31)]);
        state.receive(&first, &mut fx);

        let mut second = msg(1, prio(50, 1));
        second.max_prio1 = MaxPrioList::from_iter(4, [prio(7, 31)]);
        let inferred = state.update_implicit_colored(&second);
        assert_eq!(inferred, vec![30], "only the vanished higher entry");
        assert!(!state.implicit_node_colored_list.contains(&31));
    }

    #[test]
    fn r3_no_insertion_on_growing_list() {
        let mut state = NodeState::new(9, prio(1, 9), 4, 3, &[(1, prio(50, 1))]);
        let mut fx = RoundEffects::default();
        state.receive(&msg(1, prio(50, 1)), &mut fx); // empty previous lists

        let mut second = msg(1, prio(50, 1));
        second.max_prio1 = MaxPrioList::from_iter(4, [prio(5, 40)]);
        let inferred = state.update_implicit_colored(&second);
        assert!(inferred.is_empty());
    }

    #[test]
    fn isolated_star_center_colors_zero_after_first_exchange() {
        let nbrs: Vec<(Address, Priority)> = (1..=3).map(|a| (a, prio(4, a))).collect();
        let mut state = NodeState::new(9, prio(8, 9), 4, 3, &nbrs);
        state.set_eligible();
        let mut fx = RoundEffects::default();
        for (v, p) in &nbrs {
            let mut m = msg(*v, *p);
            // Leaves echo the center in their Hello-seeded max_prio1.
            m.max_prio1 = MaxPrioList::from_iter(4, [prio(8, 9)]);
            state.receive(&m, &mut fx);
        }
        assert_eq!(state.finish_round(1, &mut fx), Some(0), "empty bitmaps give color 0");
    }

    #[test]
    fn higher_max_prio1_head_blocks() {
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &[(1, prio(50, 1))]);
        state.set_eligible();
        let mut fx = RoundEffects::default();
        state.receive(&msg(1, prio(50, 1)), &mut fx);
        assert_eq!(state.finish_round(1, &mut fx), None);
        assert_eq!(state.color(), None);
    }

    #[test]
    fn bitmaps_covering_prefix_give_smallest_gap() {
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &[]);
        state.set_eligible();
        state.bitmap1 = ColorBitmap::from_colors([0, 1]);
        state.bitmap2 = ColorBitmap::from_colors([2]);
        state.bitmap3 = ColorBitmap::from_colors([4]);
        assert_eq!(state.try_color(), Some(3));
    }

    #[test]
    fn heard_only_colors_are_avoided() {
        // Sender 77 has no symmetric link with us; its color still burns.
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &[]);
        state.set_eligible();
        let mut fx = RoundEffects::default();
        let mut m = msg(77, prio(60, 77));
        m.color = Some(0);
        state.receive(&m, &mut fx);
        assert!(state.records.is_empty(), "no record for heard-only nodes");
        assert_eq!(state.try_color(), Some(1));
    }

    #[test]
    fn round_one_message_carries_hello_seed_and_empty_bitmaps() {
        let nbrs = [(1, prio(9, 1)), (2, prio(8, 2))];
        let state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        let m = state.build_message();
        assert_eq!(m.max_prio1.len(), 2, "priorities learned in the Hello phase");
        assert!(m.max_prio2.is_empty());
        assert!(m.bitmap1.is_empty() && m.bitmap2.is_empty());
        assert_eq!(m.color, None);
    }

    #[test]
    fn bitmap1_includes_colored_neighbors_and_self() {
        let nbrs = [(1, prio(9, 1))];
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        state.set_eligible();
        let mut fx = RoundEffects::default();
        let mut m = msg(1, prio(9, 1));
        m.color = Some(2);
        state.receive(&m, &mut fx);
        state.finish_round(1, &mut fx);
        assert_eq!(state.color(), Some(0));
        let out = state.build_message();
        assert!(out.bitmap1.contains(2), "colored 1-hop neighbor");
        assert!(out.bitmap1.contains(0), "own color");
    }

    #[test]
    fn bitmap2_is_union_of_received_bitmap1() {
        let nbrs = [(1, prio(9, 1)), (2, prio(8, 2))];
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        let mut fx = RoundEffects::default();
        let mut m1 = msg(1, prio(9, 1));
        m1.bitmap1 = ColorBitmap::from_colors([0, 3]);
        let mut m2 = msg(2, prio(8, 2));
        m2.bitmap1 = ColorBitmap::from_colors([1]);
        state.receive(&m1, &mut fx);
        state.receive(&m2, &mut fx);
        state.finish_round(1, &mut fx);
        let out = state.build_message();
        let got: Vec<Color> = out.bitmap2.colors().collect();
        assert_eq!(got, vec![0, 1, 3]);
    }

    #[test]
    fn r5_stop_condition() {
        let nbrs = [(1, prio(9, 1))];
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        state.color = Some(1);
        state.max_prio1 = MaxPrioList::new(4);

        // Neighbor's last message still advertises a non-empty max_prio2.
        let mut fx = RoundEffects::default();
        let mut busy = msg(1, prio(9, 1));
        busy.max_prio2 = MaxPrioList::from_iter(3, [prio(4, 5)]);
        state.receive(&busy, &mut fx);
        assert!(!state.should_stop());

        // Both lists empty from every neighbor: stop.
        state.receive(&msg(1, prio(9, 1)), &mut fx);
        assert!(state.should_stop());

        // An uncolored node never stops.
        state.color = None;
        assert!(!state.should_stop());
    }

    #[test]
    fn r6_stale_then_evicted_then_reset() {
        let nbrs = [(1, prio(9, 1))];
        let mut state = NodeState::new(9, prio(5, 9), 4, 3, &nbrs);
        let mut fx = RoundEffects::default();
        state.receive(&msg(1, prio(9, 1)), &mut fx);

        assert_eq!(state.handle_missing_neighbor(1, 2), MissingOutcome::StaleReused);
        // Heard again: the miss counter resets.
        state.receive(&msg(1, prio(9, 1)), &mut fx);
        assert_eq!(state.records[&1].rounds_since_seen, 0);

        assert_eq!(state.handle_missing_neighbor(1, 2), MissingOutcome::StaleReused);
        assert_eq!(state.handle_missing_neighbor(1, 2), MissingOutcome::Evicted);
        assert!(state.live_neighbors().next().is_none());
    }
}
