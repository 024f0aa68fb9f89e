//! Closed-form bound on the bad-scenario probability and empirical delay
//! detection.
//!
//! With list sizes `(4, 3)` the only event that can delay a node `u`
//! relative to the unoptimized protocol is three nodes, each two hops from
//! `u` but pairwise four hops apart, coloring simultaneously just before
//! `u`: their entries jam a neighbor's `max_prio2` beyond what rule R4 may
//! discard. The probability of that scenario is bounded in closed form by
//! `P1 * P2 * P3` with `P3 = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Algorithm, EventKind, RunResult};
use crate::topology::{Topology, TopologyError};
use crate::Address;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("M must be >= 1, got {0}")]
    BadM(f64),
    #[error("mismatched runs: {0}")]
    MismatchedRuns(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Geometric component: the probability that a third candidate blocker
/// falls into the admissible zone, `1/4 - sqrt(4 - 2*sqrt(3)) / (2*pi)`.
pub fn bad_scenario_p1() -> f64 {
    0.25 - (4.0 - 2.0 * 3.0_f64.sqrt()).sqrt() / (2.0 * std::f64::consts::PI)
}

/// Priority component for mean 1-hop neighbor count `M`:
/// `27/64 * (1 - 3 / (4M + 1))`.
pub fn bad_scenario_p2(m: f64) -> f64 {
    (27.0 / 64.0) * (1.0 - 3.0 / (4.0 * m + 1.0))
}

/// Upper bound on the probability of the bad scenario for mean 1-hop
/// neighbor count `M`: `P1 * P2` (the simultaneity component is bounded
/// by 1). Strictly increasing in `M` and below 0.0564 for every finite `M`.
pub fn bad_scenario_bound(m: f64) -> Result<f64, AnalysisError> {
    if m.is_nan() || m < 1.0 {
        return Err(AnalysisError::BadM(m));
    }
    Ok(bad_scenario_p1() * bad_scenario_p2(m))
}

/// Arithmetic core of the `(5, 4)` list-size argument: four nodes two hops
/// from a common center and pairwise more than three hops apart cannot
/// exist, because the widest spread of four points in the 2R disk puts some
/// pair at distance `2 * sqrt(2) * R < 3R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    /// `2 * sqrt(2)`, the diagonal pair distance in units of R.
    pub diagonal: f64,
    /// Its square, exactly 8 in units of R^2.
    pub diagonal_squared: f64,
    /// The 4-hop threshold the diagonal must stay under, in units of R.
    pub threshold: f64,
}

impl GeometryCheck {
    /// True iff the spread falls short of the threshold, which is what
    /// rules out a fourth simultaneous blocker.
    pub fn holds(&self) -> bool {
        self.diagonal < self.threshold
    }
}

pub fn geometric_check_size5() -> GeometryCheck {
    // Right triangle with both legs 2R: d^2 = (2R)^2 + (2R)^2 = 8R^2.
    let diagonal_squared: f64 = 4.0 + 4.0;
    GeometryCheck { diagonal: diagonal_squared.sqrt(), diagonal_squared, threshold: 3.0 }
}

/// A matched bad-scenario occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadScenarioEvent {
    pub delayed: Address,
    /// Three simultaneous colorers, each 2 hops from the delayed node and
    /// pairwise 4 hops apart.
    pub blockers: [Address; 3],
    /// The round in which the blockers colored.
    pub round: u64,
}

/// How a per-node delay was accounted for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelayCause {
    /// A blocker triple was found in the delayed node's own neighborhood.
    Direct(BadScenarioEvent),
    /// The lateness is inherited from an earlier delayed node within 3 hops
    /// whose own delay traces back to a blocker triple.
    Inherited { from: Address },
    /// No explanation found.
    Unmatched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delay {
    pub node: Address,
    pub serena_round: u64,
    pub oserena_round: u64,
    pub cause: DelayCause,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DelayReport {
    pub delays: Vec<Delay>,
}

impl DelayReport {
    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// True iff every delay is explained by a bad-scenario event, directly
    /// or by inheritance.
    pub fn all_matched(&self) -> bool {
        self.delays.iter().all(|d| !matches!(d.cause, DelayCause::Unmatched))
    }
}

/// Pairwise hop-distance rule for blocker triples. Under the hop-distance
/// approximation of the unit disk model the scenario reads as hop distance
/// exactly 4; the strict variant accepts any pair more than 3 hops apart for
/// sensitivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourHopRule {
    #[default]
    ExactlyFour,
    GreaterThanThree,
}

/// Compare two runs on the same topology, priorities and seed: list every
/// node colored later under the optimized protocol and match each delay
/// against the bad scenario (three simultaneous colorings at 2 hops from the
/// node, pairwise 4 hops apart), searching the optimized run's event log in
/// the window just before the node's unoptimized coloring round.
pub fn detect_delays(
    topo: &Topology,
    serena: &RunResult,
    oserena: &RunResult,
    rule: FourHopRule,
) -> Result<DelayReport, AnalysisError> {
    if serena.algorithm != Algorithm::Serena || oserena.algorithm != Algorithm::Oserena {
        return Err(AnalysisError::MismatchedRuns(format!(
            "expected (serena, oserena) results, got ({}, {})",
            serena.algorithm, oserena.algorithm
        )));
    }
    if serena.seed != oserena.seed || serena.n != oserena.n {
        return Err(AnalysisError::MismatchedRuns(
            "runs differ in seed or node count".into(),
        ));
    }
    if serena.coloring != oserena.coloring {
        return Err(AnalysisError::MismatchedRuns(
            "runs produced different colorings; delays are not comparable".into(),
        ));
    }

    // Colorings per round, from the optimized run's event log.
    let mut colored_by_round: BTreeMap<u64, Vec<Address>> = BTreeMap::new();
    for ev in &oserena.events {
        if let EventKind::Colored { .. } = ev.kind {
            colored_by_round.entry(ev.round).or_default().push(ev.node);
        }
    }

    // Delayed nodes, earliest unoptimized round first, so inheritance is
    // well founded.
    let mut delayed: Vec<(Address, u64, u64)> = serena
        .per_node_color_round
        .iter()
        .filter_map(|(&node, &s_round)| {
            let o_round = *oserena.per_node_color_round.get(&node)?;
            (o_round > s_round).then_some((node, s_round, o_round))
        })
        .collect();
    delayed.sort_by_key(|&(node, s, _)| (s, node));

    let mut matched_so_far: Vec<Address> = Vec::new();
    let mut delays = Vec::new();
    for (node, serena_round, oserena_round) in delayed {
        let cause = match find_blocker_triple(
            topo,
            &colored_by_round,
            node,
            serena_round,
            oserena_round,
            rule,
        )? {
            Some(event) => DelayCause::Direct(event),
            None => {
                let ball = topo.khop_neighbors(node, 3)?;
                match matched_so_far.iter().find(|a| ball.contains(a)) {
                    Some(&from) => DelayCause::Inherited { from },
                    None => DelayCause::Unmatched,
                }
            }
        };
        if !matches!(cause, DelayCause::Unmatched) {
            matched_so_far.push(node);
        }
        delays.push(Delay { node, serena_round, oserena_round, cause });
    }
    Ok(DelayReport { delays })
}

fn find_blocker_triple(
    topo: &Topology,
    colored_by_round: &BTreeMap<u64, Vec<Address>>,
    node: Address,
    serena_round: u64,
    oserena_round: u64,
    rule: FourHopRule,
) -> Result<Option<BadScenarioEvent>, AnalysisError> {
    let window_start = serena_round.saturating_sub(3);
    for (&round, colored) in colored_by_round.range(window_start..oserena_round) {
        // Candidates: colored this round, exactly 2 hops from the node.
        let mut candidates = Vec::new();
        for &c in colored {
            if c != node && topo.hop_distance(node, c)? == Some(2) {
                candidates.push(c);
            }
        }
        if candidates.len() < 3 {
            continue;
        }
        let pair_ok = |a: Address, b: Address| -> Result<bool, AnalysisError> {
            let d = topo.hop_distance(a, b)?;
            Ok(match rule {
                FourHopRule::ExactlyFour => d == Some(4),
                FourHopRule::GreaterThanThree => d.is_none_or(|h| h > 3),
            })
        };
        for i in 0..candidates.len() {
            for j in (i + 1)..candidates.len() {
                if !pair_ok(candidates[i], candidates[j])? {
                    continue;
                }
                for k in (j + 1)..candidates.len() {
                    if pair_ok(candidates[i], candidates[k])?
                        && pair_ok(candidates[j], candidates[k])?
                    {
                        return Ok(Some(BadScenarioEvent {
                            delayed: node,
                            blockers: [candidates[i], candidates[j], candidates[k]],
                            round,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_matches_closed_form() {
        // sqrt(4 - 2*sqrt(3)) is exactly sqrt(3) - 1.
        let expected = 0.25 - (3.0_f64.sqrt() - 1.0) / (2.0 * std::f64::consts::PI);
        assert!((bad_scenario_p1() - expected).abs() < 1e-15);
    }

    #[test]
    fn bound_at_m_one() {
        let b = bad_scenario_bound(1.0).unwrap();
        assert!((b - 0.02253).abs() < 1e-4, "got {b}");
    }

    #[test]
    fn bound_limit_is_00563() {
        let b = bad_scenario_bound(1e12).unwrap();
        assert!((b - 0.05631).abs() < 1e-4, "got {b}");
        assert!(b < 0.0564);
    }

    #[test]
    fn bound_is_increasing_and_below_cap() {
        let mut previous = 0.0;
        for m in [1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4, 1e6] {
            let b = bad_scenario_bound(m).unwrap();
            assert!(b > previous, "not increasing at M={m}");
            assert!(b < 0.0564, "cap violated at M={m}");
            assert!(b > 0.0);
            previous = b;
        }
    }

    #[test]
    fn bound_rejects_small_m() {
        assert!(bad_scenario_bound(0.5).is_err());
        assert!(bad_scenario_bound(f64::NAN).is_err());
    }

    #[test]
    fn geometry_check() {
        let g = geometric_check_size5();
        assert!((g.diagonal - 2.828427).abs() < 1e-6);
        assert!((g.diagonal_squared - 8.0).abs() < 1e-12);
        assert!(g.holds(), "2*sqrt(2) < 3");
        assert!(g.diagonal / 4.0 < 1.0, "well under the maximum 4-hop spread");
    }
}
