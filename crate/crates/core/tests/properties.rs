use flowwalks::dominators::{build_s_dominator_tree, build_t_dominator_tree};
use flowwalks::testutil::{random_st_graph, removal_dominators};
use flowwalks::widths::{is_antichain, max_weight_antichain};
use flowwalks::{parse_graph, Graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64, density: f64) -> Graph {
    random_st_graph(&mut ChaCha8Rng::seed_from_u64(seed), 14, density)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn text_round_trip(seed in any::<u64>(), density in 1.0f64..3.0) {
        let g = graph(seed, density);
        let back = parse_graph(&g.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), g.to_text());
        prop_assert_eq!(back.m(), g.m());
    }

    #[test]
    fn tree_ancestors_match_removal(seed in any::<u64>(), density in 1.0f64..3.0, backward in any::<bool>()) {
        let g = graph(seed, density);
        let tree = if backward { build_t_dominator_tree(&g) } else { build_s_dominator_tree(&g) };
        for (v, doms) in removal_dominators(&g, backward).into_iter().enumerate() {
            match doms {
                None => prop_assert!(!tree.contains(v)),
                Some(expected) => {
                    let mut got = tree.path_to_root(v).unwrap();
                    got.sort_unstable();
                    prop_assert_eq!(got, expected);
                }
            }
        }
    }

    #[test]
    fn antichain_is_valid_and_dominates_single_edges(seed in any::<u64>(), density in 1.0f64..3.0) {
        let g = graph(seed, density);
        let ac = max_weight_antichain(&g, g.weights());
        prop_assert!(is_antichain(&g, &ac.edges));
        let live = g.live_edges();
        let heaviest = (0..g.m()).filter(|&e| live[e]).map(|e| g.weight(e)).max().unwrap_or(0);
        prop_assert!(ac.total_weight >= heaviest);
    }
}
