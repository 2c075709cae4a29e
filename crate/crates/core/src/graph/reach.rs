use fixedbitset::FixedBitSet;

use super::{condense, Condensation, Graph, VertexId};

/// All-pairs reachability, stored as transitive-closure bitsets over the
/// condensation. Reflexive: every vertex reaches itself.
#[derive(Debug, Clone)]
pub struct ReachabilityIndex {
    scc_of: Vec<usize>,
    closure: Vec<FixedBitSet>,
}

impl ReachabilityIndex {
    pub fn from_condensation(cond: &Condensation) -> Self {
        let k = cond.len();
        let mut closure = vec![FixedBitSet::with_capacity(k); k];
        for c in (0..k).rev() {
            let mut set = FixedBitSet::with_capacity(k);
            set.insert(c);
            for &d in cond.successors(c) {
                set.union_with(&closure[d]);
            }
            closure[c] = set;
        }
        ReachabilityIndex { scc_of: cond.scc_of().to_vec(), closure }
    }

    /// True iff a (possibly empty) u-v path exists.
    pub fn reaches(&self, u: VertexId, v: VertexId) -> bool {
        self.closure[self.scc_of[u]].contains(self.scc_of[v])
    }
}

pub fn reachability(g: &Graph) -> ReachabilityIndex {
    ReachabilityIndex::from_condensation(&condense(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;
    use crate::testutil::random_st_graph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diamond_branches_disjoint() {
        let g = fixtures::diamond();
        let r = reachability(&g);
        let (a, b) = (g.vertex("a").unwrap(), g.vertex("b").unwrap());
        assert!(!r.reaches(a, b));
        assert!(r.reaches(a, a));
        assert!(r.reaches(g.source(), g.sink()));
    }

    #[test]
    fn cycle_reaches_sink_through_back_edge() {
        let g = fixtures::cycle();
        let r = reachability(&g);
        assert!(r.reaches(g.vertex("b").unwrap(), g.sink()));
    }

    #[test]
    fn agrees_with_bfs_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let g = random_st_graph(&mut rng, 50, 2.0);
            let r = reachability(&g);
            for u in 0..g.n() {
                let bfs = g.reachable_from(u, false);
                for (v, &expect) in bfs.iter().enumerate() {
                    assert_eq!(r.reaches(u, v), expect);
                }
            }
        }
    }
}
