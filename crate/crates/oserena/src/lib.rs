//! Distributed 3-hop node coloring for wireless sensor networks.
//!
//! This crate simulates two distributed coloring protocols over unit disk
//! graph topologies, plus a centralized reference:
//!
//! - [`serena`]: the unoptimized protocol. Every `Color` message carries the
//!   sender's full knowledge of its neighborhood up to two hops, so message
//!   size grows with density.
//! - [`oserena`]: the optimized protocol. Messages carry only bounded
//!   `max_prio` lists and color bitmaps, keeping message size independent of
//!   the 2-hop neighborhood size.
//! - [`firstfit`]: a centralized First Fit 3-hop coloring used as the
//!   ground-truth oracle. Both distributed protocols produce exactly the
//!   coloring First Fit produces for the same priority assignment.
//!
//! The [`engine`] module runs synchronous rounds with optional message loss;
//! [`analysis`] evaluates the closed-form bound on the probability of the
//! "bad scenario" that can delay a node, and matches observed delays against
//! that scenario; [`sweep`] runs parameter sweeps (in parallel when the
//! `parallel` feature is enabled).

pub mod analysis;
pub mod bitset;
pub mod engine;
pub mod firstfit;
pub mod oserena;
pub mod priority;
pub mod serena;
pub mod sweep;
pub mod topology;
pub mod wire;

pub use bitset::ColorBitmap;
pub use engine::{discover_neighbors, run, run_with_priorities, Algorithm, RunConfig, RunResult};
pub use firstfit::{firstfit_3hop, verify_coloring, Coloring, VerifyError};
pub use priority::{compute_prio, higher_priority, priority_map, Priority};
pub use topology::{generate_udg, Topology};

/// Node address. Unique within a topology (assumption A1).
pub type Address = u32;

/// A color. Colors are dense non-negative integers starting at 0.
pub type Color = u32;
