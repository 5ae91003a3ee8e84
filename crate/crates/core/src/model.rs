//! Storage patterns and the combinatorial structure derived from them:
//! per-server index sets, the storage graph, the converse hypergraph,
//! server restriction and exact b-cover detection.
//!
//! Server ids are 1-based (`1..=N`). Message sets are addressed by their
//! position in the pattern (0-based).

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern has no servers")]
    NoServers,
    #[error("pattern has no message sets")]
    NoMessageSets,
    #[error("message set {set} has zero messages")]
    ZeroMessageCount { set: usize },
    #[error("message set {set} is stored on no server")]
    EmptyReplication { set: usize },
    #[error("message set {set} lists server {server} twice")]
    DuplicateServer { set: usize, server: usize },
    #[error("message set {set} references server {server} outside 1..={n_servers}")]
    ServerOutOfRange {
        set: usize,
        server: usize,
        n_servers: usize,
    },
    #[error("restriction keeps no server")]
    EmptyKeepSet,
    #[error("restriction loses every replica of message set {set}")]
    MessageLost { set: usize },
    #[error("rho_min = {rho_min} does not exceed X + T = {x} + {t}")]
    DegenerateCapacity { rho_min: usize, x: usize, t: usize },
    #[error("invalid pattern document at `{path}`: {message}")]
    Parse { path: String, message: String },
}

/// `K_m` messages replicated on the servers `R_m` (ascending).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageSet {
    pub count: usize,
    pub servers: Vec<usize>,
}

impl MessageSet {
    pub fn rho(&self) -> usize {
        self.servers.len()
    }

    pub fn contains(&self, server: usize) -> bool {
        self.servers.binary_search(&server).is_ok()
    }
}

/// A validated storage pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoragePattern {
    n_servers: usize,
    sets: Vec<MessageSet>,
}

impl StoragePattern {
    /// Validates and normalizes a raw pattern: each server list is sorted
    /// ascending and checked for duplicates and range.
    pub fn new(n_servers: usize, sets: Vec<MessageSet>) -> Result<Self, PatternError> {
        if n_servers == 0 {
            return Err(PatternError::NoServers);
        }
        if sets.is_empty() {
            return Err(PatternError::NoMessageSets);
        }
        let mut out = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            if s.count == 0 {
                return Err(PatternError::ZeroMessageCount { set: i });
            }
            if s.servers.is_empty() {
                return Err(PatternError::EmptyReplication { set: i });
            }
            s.servers.sort_unstable();
            if let Some(&server) = s.servers.iter().find(|&&n| n == 0 || n > n_servers) {
                return Err(PatternError::ServerOutOfRange {
                    set: i,
                    server,
                    n_servers,
                });
            }
            if let Some((&server, _)) = s.servers.iter().tuple_windows().find(|(a, b)| a == b) {
                return Err(PatternError::DuplicateServer { set: i, server });
            }
            out.push(s);
        }
        Ok(Self {
            n_servers,
            sets: out,
        })
    }

    /// Convenience constructor: `(count, servers)` pairs.
    pub fn from_pairs(n_servers: usize, raw: &[(usize, &[usize])]) -> Result<Self, PatternError> {
        Self::new(
            n_servers,
            raw.iter()
                .map(|(count, servers)| MessageSet {
                    count: *count,
                    servers: servers.to_vec(),
                })
                .collect(),
        )
    }

    /// Pattern with `count` messages in every set.
    pub fn uniform(n_servers: usize, count: usize, sets: &[&[usize]]) -> Result<Self, PatternError> {
        let raw: Vec<(usize, &[usize])> = sets.iter().map(|s| (count, *s)).collect();
        Self::from_pairs(n_servers, &raw)
    }

    pub fn n_servers(&self) -> usize {
        self.n_servers
    }

    pub fn sets(&self) -> &[MessageSet] {
        &self.sets
    }

    pub fn set(&self, m: usize) -> &MessageSet {
        &self.sets[m]
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn rho(&self, m: usize) -> usize {
        self.sets[m].rho()
    }

    pub fn rho_min(&self) -> usize {
        self.sets.iter().map(MessageSet::rho).min().expect("nonempty")
    }

    pub fn servers(&self) -> impl Iterator<Item = usize> {
        1..=self.n_servers
    }

    /// `M_n`: positions of the message sets stored at server `n`.
    pub fn server_index(&self, n: usize) -> BTreeSet<usize> {
        self.sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(n))
            .map(|(m, _)| m)
            .collect()
    }

    /// Servers whose every stored message set has `rho_m > r`. Servers
    /// storing nothing qualify vacuously.
    pub fn n_r_set(&self, r: usize) -> BTreeSet<usize> {
        self.servers()
            .filter(|&n| self.server_index(n).iter().all(|&m| self.rho(m) > r))
            .collect()
    }

    /// Splits the servers into those holding only `(T+2)`-replicated
    /// messages and the rest (which hold at least one `(T+1)`-replicated set).
    pub fn replication_tiers(&self, t: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let high = self.n_r_set(t + 1);
        let low = self.servers().filter(|n| !high.contains(n)).collect();
        (high, low)
    }

    pub fn storage_graph(&self) -> StorageGraph {
        let mut edges = BTreeSet::new();
        for s in &self.sets {
            for (a, b) in s.servers.iter().tuple_combinations() {
                edges.insert((*a, *b));
            }
        }
        StorageGraph {
            vertices: self.servers().collect(),
            edges,
        }
    }

    /// Hypergraph whose hyperedges are all `(rho_m - X - T)`-subsets of each
    /// `R_m`, deduplicated. Each hyperedge is one converse constraint.
    pub fn converse_hypergraph(&self, x: usize, t: usize) -> Result<ConverseHypergraph, PatternError> {
        let rho_min = self.rho_min();
        if rho_min <= x + t {
            return Err(PatternError::DegenerateCapacity { rho_min, x, t });
        }
        let mut seen = BTreeMap::new();
        for (m, s) in self.sets.iter().enumerate() {
            for e in s.servers.iter().copied().combinations(s.rho() - x - t) {
                seen.entry(e).or_insert(m);
            }
        }
        Ok(ConverseHypergraph {
            n_servers: self.n_servers,
            edges: seen
                .into_iter()
                .map(|(servers, origin)| Hyperedge { servers, origin })
                .collect(),
        })
    }

    /// Keeps only the servers in `keep`, relabeling them `1..=|keep|` in
    /// ascending order.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Result<Restriction, PatternError> {
        if keep.is_empty() {
            return Err(PatternError::EmptyKeepSet);
        }
        if let Some(&server) = keep.iter().find(|&&n| n == 0 || n > self.n_servers) {
            return Err(PatternError::ServerOutOfRange {
                set: usize::MAX,
                server,
                n_servers: self.n_servers,
            });
        }
        let original_ids: Vec<usize> = keep.iter().copied().collect();
        let relabel: BTreeMap<usize, usize> = original_ids
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i + 1))
            .collect();
        let mut sets = Vec::with_capacity(self.sets.len());
        for (m, s) in self.sets.iter().enumerate() {
            let servers: Vec<usize> = s.servers.iter().filter_map(|n| relabel.get(n).copied()).collect();
            if servers.is_empty() {
                return Err(PatternError::MessageLost { set: m });
            }
            sets.push(MessageSet {
                count: s.count,
                servers,
            });
        }
        Ok(Restriction {
            pattern: StoragePattern {
                n_servers: keep.len(),
                sets,
            },
            original_ids,
        })
    }

    /// Smallest `b >= 1` for which some family of `rho_min`-replicated sets
    /// covers every server exactly `b` times, with the lexicographically
    /// smallest such family.
    pub fn find_exact_b_cover(&self) -> Option<BCover> {
        let rho_min = self.rho_min();
        let candidates: Vec<usize> = (0..self.sets.len()).filter(|&m| self.rho(m) == rho_min).collect();
        for b in 1..=candidates.len() {
            // b * N = |M'| * rho_min
            if (b * self.n_servers) % rho_min != 0 || b * self.n_servers / rho_min > candidates.len() {
                continue;
            }
            let mut search = CoverSearch {
                pattern: self,
                candidates: &candidates,
                b,
                load: vec![0; self.n_servers + 1],
                remaining: vec![0; self.n_servers + 1],
                chosen: Vec::new(),
            };
            for &m in &candidates {
                for &n in &self.sets[m].servers {
                    search.remaining[n] += 1;
                }
            }
            if search.run(0) {
                return Some(BCover {
                    b,
                    sets: search.chosen,
                });
            }
        }
        None
    }
}

struct CoverSearch<'a> {
    pattern: &'a StoragePattern,
    candidates: &'a [usize],
    b: usize,
    load: Vec<usize>,
    // uses of each server still available among undecided candidates
    remaining: Vec<usize>,
    chosen: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, i: usize) -> bool {
        let n = self.pattern.n_servers;
        if (1..=n).any(|s| self.load[s] + self.remaining[s] < self.b) {
            return false;
        }
        if i == self.candidates.len() {
            return (1..=n).all(|s| self.load[s] == self.b);
        }
        let m = self.candidates[i];
        let servers = &self.pattern.sets[m].servers;
        for &s in servers {
            self.remaining[s] -= 1;
        }
        if servers.iter().all(|&s| self.load[s] < self.b) {
            for &s in servers {
                self.load[s] += 1;
            }
            self.chosen.push(m);
            if self.run(i + 1) {
                return true;
            }
            self.chosen.pop();
            for &s in servers {
                self.load[s] -= 1;
            }
        }
        if self.run(i + 1) {
            return true;
        }
        for &s in servers {
            self.remaining[s] += 1;
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BCover {
    pub b: usize,
    /// Message-set positions forming the cover.
    pub sets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub pattern: StoragePattern,
    /// `original_ids[i]` is the original id of restricted server `i + 1`.
    pub original_ids: Vec<usize>,
}

/// Simple undirected graph on an explicit vertex set; edges stored as
/// `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageGraph {
    pub vertices: Vec<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl StorageGraph {
    pub fn new(vertices: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        Self { vertices, edges }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbors(&self, u: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// `N(U)`: vertices outside `U` adjacent to some member of `U`.
    pub fn neighborhood(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter()
            .flat_map(|&u| self.neighbors(u))
            .filter(|v| !set.contains(v))
            .collect()
    }

    pub fn is_stable(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().tuple_combinations().all(|(a, b)| !self.has_edge(*a, *b))
    }

    /// Induced subgraph on `keep` (original vertex labels retained).
    pub fn induced(&self, keep: &BTreeSet<usize>) -> StorageGraph {
        StorageGraph {
            vertices: self.vertices.iter().copied().filter(|v| keep.contains(v)).collect(),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hyperedge {
    pub servers: Vec<usize>,
    /// First message set that generated this hyperedge.
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConverseHypergraph {
    pub n_servers: usize,
    pub edges: Vec<Hyperedge>,
}

/// JSON pattern document, also the header of every fixture file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternDocument {
    pub n_servers: usize,
    pub x: usize,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    pub message_sets: Vec<MessageSet>,
}

impl PatternDocument {
    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| PatternError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, PatternError> {
        serde_path_to_error::deserialize(value).map_err(|e| PatternError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn pattern(&self) -> Result<StoragePattern, PatternError> {
        StoragePattern::new(self.n_servers, self.message_sets.clone())
    }

    pub fn from_pattern(pattern: &StoragePattern, x: usize, t: usize, q: Option<u64>) -> Self {
        Self {
            n_servers: pattern.n_servers(),
            x,
            t,
            q,
            message_sets: pattern.sets().to_vec(),
        }
    }
}
