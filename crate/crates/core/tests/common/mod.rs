#![allow(dead_code)]

use std::collections::BTreeSet;

use gxstpir::model::{MessageSet, StoragePattern};
use gxstpir::StorageGraph;
use rand::seq::SliceRandom;
use rand::Rng;

/// Random `R_m` of the given size.
pub fn random_set<R: Rng>(rng: &mut R, n: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (1..=n).collect();
    all.shuffle(rng);
    all.truncate(size);
    all.sort_unstable();
    all
}

/// `m` sets over `n` servers, sizes in `rho_min..=rho_max`, at least one of
/// size `rho_min`.
pub fn random_pattern<R: Rng>(rng: &mut R, n: usize, m: usize, rho_min: usize, rho_max: usize, count: usize) -> StoragePattern {
    let sets = (0..m)
        .map(|i| {
            let size = if i == 0 { rho_min } else { rng.random_range(rho_min..=rho_max) };
            MessageSet {
                count,
                servers: random_set(rng, n, size),
            }
        })
        .collect();
    StoragePattern::new(n, sets).unwrap()
}

/// Pattern that contains an exact 1-cover: `[N]` partitioned into blocks of
/// `rho` servers, plus random sets with at least `rho` servers.
pub fn planted_cover_pattern<R: Rng>(rng: &mut R, blocks: usize, rho: usize, extra: usize) -> StoragePattern {
    let n = blocks * rho;
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut sets: Vec<MessageSet> = order
        .chunks(rho)
        .map(|c| {
            let mut s = c.to_vec();
            s.sort_unstable();
            MessageSet { count: 1, servers: s }
        })
        .collect();
    for _ in 0..extra {
        let size = rng.random_range(rho..=n);
        sets.push(MessageSet {
            count: 1,
            servers: random_set(rng, n, size),
        });
    }
    sets.shuffle(rng);
    StoragePattern::new(n, sets).unwrap()
}

pub fn random_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> StorageGraph {
    let v = rng.random_range(1..=max_vertices);
    let mut pairs: Vec<(usize, usize)> = (1..=v).flat_map(|a| (a + 1..=v).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let e = rng.random_range(0..=max_edges.min(pairs.len()));
    pairs.truncate(e);
    StorageGraph::new((1..=v).collect(), pairs)
}

/// Random stable subset of `candidates` in `graph`, built greedily.
pub fn random_stable_set<R: Rng>(rng: &mut R, graph: &StorageGraph, candidates: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut order: Vec<usize> = candidates.iter().copied().collect();
    order.shuffle(rng);
    let mut u = BTreeSet::new();
    for v in order {
        if rng.random_bool(0.6) && u.iter().all(|&w| !graph.has_edge(v, w)) {
            u.insert(v);
        }
    }
    u
}
