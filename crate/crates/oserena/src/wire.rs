//! Wire-size model for Color and Hello messages.
//!
//! Sizes are bit-exact for the metrics: an optimized Color message costs one
//! `(address, prio)` pair for the sender's priority, one pair per `max_prio`
//! list entry, one color field, and the two trimmed bitmaps. With list sizes
//! `(4, 3)` the worst case is `8 * (size_address + size_prio) + size_color +
//! size_bitmap1 + size_bitmap2` bytes. An unoptimized message instead carries
//! `(address, prio, color)` for every node the sender knows up to two hops.

use serde::{Deserialize, Serialize};

use crate::oserena::ColorMessage;
use crate::serena::SerenaMessage;

/// Configurable field sizes in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSizes {
    pub address: usize,
    pub prio: usize,
    pub color: usize,
}

impl Default for FieldSizes {
    fn default() -> Self {
        Self { address: 2, prio: 2, color: 1 }
    }
}

impl FieldSizes {
    fn pair(&self) -> usize {
        self.address + self.prio
    }
}

/// Encoded size of an optimized Color message. The color field is always
/// counted (absent colors encode as a sentinel), so the size never exceeds
/// the bound of [`oserena_size_bound`] for matching list capacities.
pub fn oserena_message_bytes(msg: &ColorMessage, sizes: &FieldSizes) -> usize {
    let pairs = 1 + msg.max_prio1.len() + msg.max_prio2.len();
    pairs * sizes.pair() + sizes.color + msg.bitmap1.byte_len() + msg.bitmap2.byte_len()
}

/// Worst-case optimized message size for the given list capacities and
/// bitmap widths: `(1 + size_mp1 + size_mp2) * (address + prio) + color +
/// bitmap1 + bitmap2`. With capacities (4, 3) the pair factor is 8.
pub fn oserena_size_bound(
    size_mp1: usize,
    size_mp2: usize,
    sizes: &FieldSizes,
    bitmap1_bytes: usize,
    bitmap2_bytes: usize,
) -> usize {
    (1 + size_mp1 + size_mp2) * sizes.pair() + sizes.color + bitmap1_bytes + bitmap2_bytes
}

/// Encoded size of an unoptimized message: one `(address, prio, color)`
/// entry for the sender plus each known node up to two hops.
pub fn serena_message_bytes(msg: &SerenaMessage, sizes: &FieldSizes) -> usize {
    let entries = 1 + msg.one_hop.len() + msg.two_hop.len();
    entries * (sizes.pair() + sizes.color)
}

/// Bytes of the two Hello phases for a node of degree `deg`: phase 1 lists
/// heard addresses, phase 2 lists `(address, degree)` pairs for the sender's
/// symmetric neighbors.
pub fn hello_bytes(deg: usize, sizes: &FieldSizes) -> usize {
    let phase1 = (1 + deg) * sizes.address;
    let phase2 = sizes.address + deg * sizes.pair();
    phase1 + phase2
}
