mod common;

use std::collections::HashSet;

use common::node;
use diffsamp::characteristics::AttendanceIndex;
use diffsamp::{accuracy, depth_measure, link_attendance_measure, seed_measure, Cascade, Edge, Exact, NodeId};
use proptest::prelude::*;

/// Random causal cascades over nodes 0..12: each IV grows a tree from its
/// seed by attaching fresh nodes to already infected ones.
fn arb_cascades() -> impl Strategy<Value = Vec<Cascade>> {
    proptest::collection::vec(
        (0usize..12, proptest::collection::vec((any::<prop::sample::Index>(), 0usize..12), 0..8)),
        1..10,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(id, (seed, steps))| {
                let mut infected = vec![seed];
                let mut iv = Vec::new();
                for (pick, v) in steps {
                    if infected.contains(&v) {
                        continue;
                    }
                    let u = infected[pick.index(infected.len())];
                    iv.push(Edge::from((u, v)));
                    infected.push(v);
                }
                Cascade::new(id as u32, node(seed), iv)
            })
            .collect()
    })
}

fn brute_mean(values: &[i64]) -> Exact {
    Exact::new(values.iter().sum(), values.len() as i64)
}

proptest! {
    #[test]
    fn averages_match_brute_force(cascades in arb_cascades(), keep_mask: u64) {
        let edges: Vec<Edge> = {
            let mut e: Vec<Edge> = cascades.iter().flat_map(|c| c.infection_vector.iter().copied()).collect();
            e.sort();
            e.dedup();
            e
        };
        prop_assume!(!edges.is_empty());
        let index = AttendanceIndex::from_cascades(&cascades);
        let counts: Vec<i64> = edges
            .iter()
            .map(|e| cascades.iter().filter(|c| c.infection_vector.contains(e)).count() as i64)
            .collect();
        prop_assert_eq!(link_attendance_measure::<Exact>(&edges, &index).unwrap(), brute_mean(&counts));

        let seeds: HashSet<NodeId> = cascades.iter().filter(|c| !c.is_empty()).map(|c| c.seed).collect();
        let mut nodes: Vec<NodeId> = edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        nodes.sort();
        nodes.dedup();
        let labels: Vec<i64> = nodes.iter().map(|u| seeds.contains(u) as i64).collect();
        prop_assert_eq!(seed_measure::<Exact>(&nodes, &seeds).unwrap(), brute_mean(&labels));

        let lengths: Vec<i64> = cascades.iter().map(|c| c.len() as i64).collect();
        prop_assert_eq!(depth_measure::<Exact>(&cascades, None).unwrap(), brute_mean(&lengths));

        let keep: HashSet<Edge> = edges.iter().enumerate().filter(|(i, _)| keep_mask >> (i % 64) & 1 == 1).map(|(_, e)| *e).collect();
        let restricted: Vec<i64> = cascades
            .iter()
            .map(|c| c.infection_vector.iter().filter(|e| keep.contains(e)).count() as i64)
            .filter(|&l| l > 0)
            .collect();
        let got = depth_measure::<Exact>(&cascades, Some(&keep));
        if restricted.is_empty() {
            prop_assert!(got.is_err());
        } else {
            prop_assert_eq!(got.unwrap(), brute_mean(&restricted));
        }
    }

    #[test]
    fn accuracy_matches_formula(r in 1i64..1000, rd in 1i64..50, s in 0i64..1000, sd in 1i64..50) {
        let (reference, sample) = (Exact::new(r, rd), Exact::new(s, sd));
        let diff = if reference > sample { reference - sample } else { sample - reference };
        prop_assert_eq!(accuracy(reference, sample).unwrap(), Exact::from_integer(1) - diff / reference);
        prop_assert_eq!(accuracy(reference, reference).unwrap(), Exact::from_integer(1));
    }
}
