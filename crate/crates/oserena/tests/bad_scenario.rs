//! Hand-built witness for the bad scenario: three nodes, pairwise 4 hops
//! apart and 2 hops from a common node `u`, color simultaneously just before
//! `u`. Their entries jam the hub's `max_prio2` beyond what rule R4 may
//! discard with list sizes (4, 3), so `u` colors one round later than in the
//! unoptimized protocol. The delay detector must match it exactly.

use std::collections::BTreeMap;

use oserena::analysis::{detect_delays, DelayCause, FourHopRule};
use oserena::engine::{run_with_priorities, Algorithm, RunConfig};
use oserena::firstfit::verify_coloring;
use oserena::priority::Priority;
use oserena::topology::Topology;
use oserena::Address;

/// Center u(1), hub v(2), arms a3..a5, blockers v6..v8. Each blocker hangs
/// off one arm; arms connect to both u and v. Blockers end up 2 hops from u
/// and pairwise 4 hops apart.
fn witness_topology() -> Topology {
    let mut nodes = vec![(1, 0.0, 0.0), (2, 0.05, 0.0)];
    let angles = [90.0_f64, 210.0, 330.0];
    for (i, deg) in angles.iter().enumerate() {
        let (sin, cos) = deg.to_radians().sin_cos();
        nodes.push((3 + i as Address, 0.95 * cos, 0.95 * sin));
        nodes.push((6 + i as Address, 1.9 * cos, 1.9 * sin));
    }
    Topology::new(nodes, 1.0).unwrap()
}

/// Blockers get the top priorities so they color first and simultaneously;
/// the hub v stays below u so only the blockers constrain u.
fn witness_priorities() -> BTreeMap<Address, Priority> {
    [(1, 10), (2, 8), (3, 5), (4, 6), (5, 7), (6, 100), (7, 101), (8, 102)]
        .into_iter()
        .map(|(a, p)| (a, Priority::new(p, a)))
        .collect()
}

#[test]
fn witness_geometry_is_as_designed() {
    let topo = witness_topology();
    assert!(topo.is_connected());
    for blocker in [6, 7, 8] {
        assert_eq!(topo.hop_distance(1, blocker).unwrap(), Some(2));
    }
    for (a, b) in [(6, 7), (6, 8), (7, 8)] {
        assert_eq!(topo.hop_distance(a, b).unwrap(), Some(4));
    }
    // Arms see u, v and their blocker.
    for arm in [3u32, 4, 5] {
        let nbrs = topo.neighbors(arm).unwrap();
        assert!(nbrs.contains(&1) && nbrs.contains(&2));
        assert_eq!(nbrs.len(), 3);
    }
}

#[test]
fn triple_fires_and_delay_is_matched() {
    let topo = witness_topology();
    let prios = witness_priorities();
    let mut config = RunConfig::new(Algorithm::Serena);
    config.seed = 5;
    let serena = run_with_priorities(&topo, &config, &prios).unwrap();
    config.algorithm = Algorithm::Oserena;
    let oserena = run_with_priorities(&topo, &config, &prios).unwrap();

    assert_eq!(serena.coloring, oserena.coloring);
    assert!(verify_coloring(&topo, &oserena.coloring, 3).is_ok());

    // The three blockers color simultaneously, before u.
    let blocker_round = oserena.per_node_color_round[&6];
    assert_eq!(oserena.per_node_color_round[&7], blocker_round);
    assert_eq!(oserena.per_node_color_round[&8], blocker_round);
    assert!(blocker_round < oserena.per_node_color_round[&1]);

    // u is delayed by exactly the stuck third entry: one extra round.
    let s_round = serena.per_node_color_round[&1];
    let o_round = oserena.per_node_color_round[&1];
    assert_eq!(o_round, s_round + 1, "u colors one round late");

    let report = detect_delays(&topo, &serena, &oserena, FourHopRule::ExactlyFour).unwrap();
    assert!(!report.is_empty());
    assert!(report.all_matched(), "every delay explained: {:?}", report.delays);

    let u_delay = report.delays.iter().find(|d| d.node == 1).expect("u is delayed");
    match &u_delay.cause {
        DelayCause::Direct(event) => {
            let mut blockers = event.blockers.to_vec();
            blockers.sort_unstable();
            assert_eq!(blockers, vec![6, 7, 8]);
            assert_eq!(event.round, blocker_round);
        }
        other => panic!("expected a direct match for u, got {other:?}"),
    }

    // Downstream nodes either see the same triple (the hub v is also 2 hops
    // from all three blockers) or inherit the lateness; the arms are too
    // close to their own blocker for a direct match.
    for d in &report.delays {
        match &d.cause {
            DelayCause::Direct(event) => {
                let mut blockers = event.blockers.to_vec();
                blockers.sort_unstable();
                assert_eq!(blockers, vec![6, 7, 8]);
            }
            DelayCause::Inherited { .. } => {}
            DelayCause::Unmatched => panic!("unmatched delay on node {}", d.node),
        }
    }
    for d in &report.delays {
        if [3, 4, 5].contains(&d.node) {
            assert!(
                matches!(d.cause, DelayCause::Inherited { .. }),
                "arm {} sits within 1 hop of a blocker: {:?}",
                d.node,
                d.cause
            );
        }
    }

    // The strict >3-hop variant accepts the same triple.
    let strict = detect_delays(&topo, &serena, &oserena, FourHopRule::GreaterThanThree).unwrap();
    assert!(strict.all_matched());
}

#[test]
fn setting_5_4_removes_the_delay() {
    let topo = witness_topology();
    let prios = witness_priorities();
    let mut config = RunConfig::new(Algorithm::Serena);
    config.seed = 5;
    config.size_mp1 = 5;
    config.size_mp2 = 4;
    let serena = run_with_priorities(&topo, &config, &prios).unwrap();
    config.algorithm = Algorithm::Oserena;
    let oserena = run_with_priorities(&topo, &config, &prios).unwrap();

    assert_eq!(serena.coloring, oserena.coloring);
    assert_eq!(
        serena.per_node_color_round, oserena.per_node_color_round,
        "with room for a third discard nothing sticks"
    );
}

#[test]
fn detector_rejects_mismatched_runs() {
    let topo = witness_topology();
    let prios = witness_priorities();
    let mut config = RunConfig::new(Algorithm::Oserena);
    config.seed = 5;
    let oserena = run_with_priorities(&topo, &config, &prios).unwrap();
    // Two results from the same algorithm are not comparable.
    let err = detect_delays(&topo, &oserena, &oserena, FourHopRule::ExactlyFour).unwrap_err();
    assert!(err.to_string().contains("mismatched"));

    // Different seeds are rejected before any comparison.
    config.algorithm = Algorithm::Serena;
    config.seed = 6;
    let serena = run_with_priorities(&topo, &config, &prios).unwrap();
    assert!(detect_delays(&topo, &serena, &oserena, FourHopRule::ExactlyFour).is_err());
}

#[test]
fn setting_3_2_still_terminates_with_the_oracle_coloring() {
    // The rejected minimum setting: only the head of a received max_prio2
    // may be discarded, so coloring may take longer, but the result is
    // unchanged.
    let topo = witness_topology();
    let prios = witness_priorities();
    let mut config = RunConfig::new(Algorithm::Oserena);
    config.seed = 5;
    config.size_mp1 = 3;
    config.size_mp2 = 2;
    let oserena = run_with_priorities(&topo, &config, &prios).unwrap();
    config.algorithm = Algorithm::Serena;
    let serena = run_with_priorities(&topo, &config, &prios).unwrap();
    assert_eq!(serena.coloring, oserena.coloring);
    assert!(verify_coloring(&topo, &oserena.coloring, 3).is_ok());
    assert!(oserena.coloring_rounds >= serena.coloring_rounds);
}
