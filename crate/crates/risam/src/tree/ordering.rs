//! Fill-reducing elimination ordering for the affected subgraph.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::Key;

/// Greedy minimum-degree ordering over an undirected adjacency
/// structure, with `constrained_last` variables forced to the end of
/// the ordering. Ties break on ascending key id so the ordering is
/// deterministic.
pub fn min_degree_order(
    vars: &BTreeSet<Key>,
    cliques: &[Vec<Key>],
    constrained_last: &BTreeSet<Key>,
) -> Vec<Key> {
    let mut adj: BTreeMap<Key, BTreeSet<Key>> = vars.iter().map(|k| (*k, BTreeSet::new())).collect();
    for clique in cliques {
        for (i, a) in clique.iter().enumerate() {
            for b in &clique[i + 1..] {
                if a != b && adj.contains_key(a) && adj.contains_key(b) {
                    adj.get_mut(a).unwrap().insert(*b);
                    adj.get_mut(b).unwrap().insert(*a);
                }
            }
        }
    }

    let mut order = Vec::with_capacity(vars.len());
    let mut remaining: BTreeSet<Key> = vars.clone();
    // two passes: unconstrained variables first, forced-last second
    for pass_constrained in [false, true] {
        loop {
            let next = remaining
                .iter()
                .filter(|k| constrained_last.contains(k) == pass_constrained)
                .min_by_key(|k| (adj[k].len(), k.0))
                .copied();
            let Some(v) = next else { break };
            // connect the eliminated variable's neighborhood (fill-in)
            let neighbors: Vec<Key> = adj[&v].iter().copied().collect();
            for (i, a) in neighbors.iter().enumerate() {
                adj.get_mut(a).unwrap().remove(&v);
                for b in &neighbors[i + 1..] {
                    adj.get_mut(a).unwrap().insert(*b);
                    adj.get_mut(b).unwrap().insert(*a);
                }
            }
            adj.remove(&v);
            remaining.remove(&v);
            order.push(v);
        }
    }
    order
}
