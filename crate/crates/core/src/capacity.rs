//! Exact capacity bounds.
//!
//! Achievability comes from running the base scheme on a subset of servers
//! or from the composite scheme; the converse is the download LP over the
//! hypergraph of `(rho_m - X - T)`-subsets, solved with an exact rational
//! simplex. Its dual is the fractional matching number of the same
//! hypergraph.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{BCover, ConverseHypergraph, PatternError, StorageGraph, StoragePattern};
use crate::par::{fold_range, Execution};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `p/q`, also for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    (!q.is_zero()).then(|| Rational::new(p, q))
}

pub const DEFAULT_ELIMINATION_CAP: usize = 20;
pub const NU2_VERTEX_LIMIT: usize = 24;
pub const BRUTEFORCE_EDGE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CapacityError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("exhaustive subset search over {n} servers exceeds the cap of {cap}")]
    SearchTooLarge { n: usize, cap: usize },
    #[error("graph has {vertices} vertices, limit is {limit}")]
    GraphTooLarge { vertices: usize, limit: usize },
    #[error("brute-force 2-matching needs at most {limit} edges, got {edges}")]
    TooManyEdges { edges: usize, limit: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `opt c.x` subject to `a_i.x (rel) b_i` and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<(Vec<Rational>, Relation, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost.x` over columns in `allowed`, Bland's rule.
    fn minimize(&mut self, cost: &[Rational], allowed: usize) -> Result<(), CapacityError> {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .fold(cost[j].clone(), |acc, (row, &b)| acc - &cost[b] * &row[j]);
                reduced.is_negative()
            });
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => match ratio.cmp(best) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*lr],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let (r, _) = leave.ok_or(CapacityError::Unbounded)?;
            self.pivot(r, c);
        }
    }
}

impl LinearProgram {
    /// Two-phase simplex in exact arithmetic.
    pub fn solve(&self) -> Result<LpSolution, CapacityError> {
        let n = self.objective.len();
        let m = self.constraints.len();
        let n_slack = self.constraints.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificial_start = n + n_slack;
        let width = artificial_start + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = n;
        for (i, (coeffs, rel, b)) in self.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in coeffs.iter().enumerate() {
                row[j] = a.clone();
            }
            match rel {
                Relation::Le => row[slack] = Rational::one(),
                Relation::Ge => row[slack] = -Rational::one(),
                Relation::Eq => {}
            }
            if *rel != Relation::Eq {
                slack += 1;
            }
            row[width] = b.clone();
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = -&*v;
                }
            }
            row[artificial_start + i] = Rational::one();
            rows.push(row);
            basis.push(artificial_start + i);
        }
        let mut tab = Tableau { rows, basis, width };

        let mut phase1 = vec![Rational::zero(); width];
        for c in phase1.iter_mut().skip(artificial_start) {
            *c = Rational::one();
        }
        tab.minimize(&phase1, width)?;
        let infeasibility = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= artificial_start)
            .fold(Rational::zero(), |acc, (r, _)| acc + tab.rhs(r));
        if infeasibility.is_positive() {
            return Err(CapacityError::Infeasible);
        }
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= artificial_start {
                match (0..artificial_start).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(c) => tab.pivot(r, c),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }

        let mut cost = vec![Rational::zero(); width];
        for (j, c) in self.objective.iter().enumerate() {
            cost[j] = match self.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c,
            };
        }
        tab.minimize(&cost, artificial_start)?;
        let mut x = vec![Rational::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(r).clone();
            }
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
        Ok(LpSolution { value, x })
    }
}

/// `max(0, rho_min - X - T) / N`.
pub fn lower_bound_direct(pattern: &StoragePattern, x: usize, t: usize) -> Rational {
    let l = pattern.rho_min().saturating_sub(x + t);
    rational(l as i64, pattern.n_servers() as i64)
}

/// Best rate of the base scheme run on a subset `S` of servers. Ties go to
/// the larger `S`, then to the lexicographically smaller one.
pub fn best_elimination_lower_bound(
    pattern: &StoragePattern,
    x: usize,
    t: usize,
    cap: usize,
    exec: Execution,
) -> Result<(Rational, BTreeSet<usize>), CapacityError> {
    let n = pattern.n_servers();
    if n > cap || n >= 63 {
        return Err(CapacityError::SearchTooLarge { n, cap });
    }
    let set_masks: Vec<u64> = pattern
        .sets()
        .iter()
        .map(|s| s.servers.iter().fold(0u64, |acc, &v| acc | 1 << (v - 1)))
        .collect();
    let eval = |mask: u64| -> Option<Candidate> {
        let mut min = usize::MAX;
        for &sm in &set_masks {
            let c = (sm & mask).count_ones() as usize;
            if c == 0 {
                return None;
            }
            min = min.min(c);
        }
        Some(Candidate {
            num: min.saturating_sub(x + t) as u64,
            size: mask.count_ones() as u64,
            mask,
        })
    };
    let best = fold_range(
        exec,
        1..(1u64 << n),
        || None,
        |acc: Option<Candidate>, mask| match eval(mask) {
            Some(c) => Some(better(acc, c)),
            None => acc,
        },
        |a, b| match (a, b) {
            (a, None) => a,
            (None, b) => b,
            (a, Some(b)) => Some(better(a, b)),
        },
    )
    .expect("S = [N] is always admissible");
    let servers = (1..=n).filter(|v| best.mask >> (v - 1) & 1 == 1).collect();
    Ok((rational(best.num as i64, best.size as i64), servers))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    num: u64,
    size: u64,
    mask: u64,
}

fn better(current: Option<Candidate>, c: Candidate) -> Candidate {
    let Some(cur) = current else { return c };
    let by_rate = (c.num * cur.size).cmp(&(cur.num * c.size));
    let order = by_rate
        .then(c.size.cmp(&cur.size))
        .then_with(|| lex_smaller(c.mask, cur.mask));
    if order == Ordering::Greater {
        c
    } else {
        cur
    }
}

/// `Greater` when `a` is the lexicographically smaller sorted server list.
fn lex_smaller(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let diff = a ^ b;
    let low = diff.trailing_zeros();
    // The first differing server id belongs to the smaller list, unless one
    // list is a prefix of the other; with equal sizes that cannot happen.
    if a >> low & 1 == 1 {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Minimum total normalized download `D*` and an optimal `D`.
pub fn converse_lp(pattern: &StoragePattern, x: usize, t: usize) -> Result<(Rational, Vec<Rational>), CapacityError> {
    let h = pattern.converse_hypergraph(x, t)?;
    let n = h.n_servers;
    let constraints = h
        .edges
        .iter()
        .map(|e| {
            let mut row = vec![Rational::zero(); n];
            for &v in &e.servers {
                row[v - 1] = Rational::one();
            }
            (row, Relation::Ge, Rational::one())
        })
        .collect();
    let lp = LinearProgram {
        sense: Sense::Minimize,
        objective: vec![Rational::one(); n],
        constraints,
    };
    let sol = lp.solve()?;
    Ok((sol.value, sol.x))
}

/// Maximum fractional matching, with an optimal weighting of the edges.
pub fn fractional_matching(h: &ConverseHypergraph) -> Result<(Rational, Vec<Rational>), CapacityError> {
    let constraints = (1..=h.n_servers)
        .map(|v| {
            let row = h
                .edges
                .iter()
                .map(|e| if e.servers.contains(&v) { Rational::one() } else { Rational::zero() })
                .collect();
            (row, Relation::Le, Rational::one())
        })
        .collect();
    let lp = LinearProgram {
        sense: Sense::Maximize,
        objective: vec![Rational::one(); h.edges.len()],
        constraints,
    };
    let sol = lp.solve()?;
    Ok((sol.value, sol.x))
}

pub fn fractional_matching_number(h: &ConverseHypergraph) -> Result<Rational, CapacityError> {
    fractional_matching(h).map(|(v, _)| v)
}

/// `sum_{n in R_m} D_n >= rho_m / (rho_m - X - T)` for every `m`.
pub fn averaging_bound_holds(pattern: &StoragePattern, x: usize, t: usize, d: &[Rational]) -> bool {
    pattern.sets().iter().all(|s| {
        let rho = s.rho();
        if rho <= x + t {
            return false;
        }
        let load = s.servers.iter().fold(Rational::zero(), |acc, &n| acc + &d[n - 1]);
        load >= rational(rho as i64, (rho - x - t) as i64)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nu2 {
    pub value: usize,
    /// The minimizing stable set (lexicographically smallest).
    pub stable_set: BTreeSet<usize>,
}

/// `nu_2(G) = min over stable U of |V \ U| + |N(U)|`.
pub fn nu2(graph: &StorageGraph) -> Result<Nu2, CapacityError> {
    let vertices = &graph.vertices;
    if vertices.len() > NU2_VERTEX_LIMIT {
        return Err(CapacityError::GraphTooLarge {
            vertices: vertices.len(),
            limit: NU2_VERTEX_LIMIT,
        });
    }
    let adj: Vec<u32> = vertices
        .iter()
        .map(|&v| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, &u)| graph.has_edge(u, v))
                .fold(0u32, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    let mut search = StableSearch {
        adj: &adj,
        best: usize::MAX,
        best_set: 0,
    };
    search.run(0, 0, 0, 0);
    let stable_set = (0..vertices.len())
        .filter(|i| search.best_set >> i & 1 == 1)
        .map(|i| vertices[i])
        .collect();
    Ok(Nu2 {
        value: search.best,
        stable_set,
    })
}

struct StableSearch<'a> {
    adj: &'a [u32],
    best: usize,
    best_set: u32,
}

impl StableSearch<'_> {
    /// `chosen`: U so far; `nbhd`: N(U); `excluded`: decided not in U.
    fn run(&mut self, i: usize, chosen: u32, nbhd: u32, excluded: u32) {
        let n = self.adj.len();
        let undecided = if i >= 32 { 0 } else { (!0u32 << i) & low_mask(n) };
        let bound = (excluded.count_ones() + (excluded & nbhd).count_ones() + 2 * (undecided & nbhd).count_ones())
            as usize;
        if bound > self.best {
            return;
        }
        if i == n {
            let value = (n - chosen.count_ones() as usize) + nbhd.count_ones() as usize;
            if value < self.best || value == self.best && lex_less_bits(chosen, self.best_set) {
                self.best = value;
                self.best_set = chosen;
            }
            return;
        }
        let bit = 1u32 << i;
        if nbhd & bit == 0 {
            self.run(i + 1, chosen | bit, nbhd | self.adj[i], excluded);
        }
        self.run(i + 1, chosen, nbhd, excluded | bit);
    }
}

fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        !0
    } else {
        (1u32 << n) - 1
    }
}

/// Lexicographic order of the sorted index lists encoded by two masks.
fn lex_less_bits(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let diff = a ^ b;
    let low = diff.trailing_zeros();
    let below = (1u32 << low) - 1;
    let a_rest = a & !below;
    let b_rest = b & !below;
    // Common prefix below `low`; the list that has `low` next is smaller
    // unless the other list has ended.
    if a_rest >> low & 1 == 1 {
        b_rest != 0
    } else {
        a_rest == 0
    }
}

/// Maximum 2-matching by enumerating `x in {0,1,2}^E`.
pub fn two_matching_bruteforce(graph: &StorageGraph) -> Result<usize, CapacityError> {
    let edges: Vec<(usize, usize)> = graph.edges.iter().copied().collect();
    if edges.len() > BRUTEFORCE_EDGE_LIMIT {
        return Err(CapacityError::TooManyEdges {
            edges: edges.len(),
            limit: BRUTEFORCE_EDGE_LIMIT,
        });
    }
    let max_vertex = graph.vertices.iter().copied().max().unwrap_or(0);
    let mut best = 0;
    let mut x = vec![0usize; edges.len()];
    loop {
        let mut load = vec![0usize; max_vertex + 1];
        for (&(u, v), &w) in edges.iter().zip(&x) {
            load[u] += w;
            load[v] += w;
        }
        if load.iter().all(|&l| l <= 2) {
            best = best.max(x.iter().sum());
        }
        let mut i = 0;
        while i < x.len() && x[i] == 2 {
            x[i] = 0;
            i += 1;
        }
        if i == x.len() {
            return Ok(best);
        }
        x[i] += 1;
    }
}

fn check_theorem3(pattern: &StoragePattern, t: usize) -> Result<(), CapacityError> {
    match (0..pattern.n_sets()).find(|&m| pattern.rho(m) > t + 2) {
        Some(m) => Err(CapacityError::PreconditionViolated(format!(
            "message set {m} is replicated {} > T + 2 times",
            pattern.rho(m)
        ))),
        None => Ok(()),
    }
}

/// `2 / (nu_2(G[N_{T+2}]) + 2 |N_{T+1}|)` for `X = 0`, `rho_m <= T + 2`.
pub fn theorem3_capacity(pattern: &StoragePattern, t: usize) -> Result<Rational, CapacityError> {
    Ok(theorem3_details(pattern, t)?.0)
}

fn theorem3_details(pattern: &StoragePattern, t: usize) -> Result<(Rational, Option<Nu2>), CapacityError> {
    check_theorem3(pattern, t)?;
    if pattern.rho_min() <= t {
        return Ok((Rational::zero(), None));
    }
    let (high, low) = pattern.replication_tiers(t);
    let nu = nu2(&pattern.storage_graph().induced(&high))?;
    let den = nu.value + 2 * low.len();
    Ok((rational(2, den as i64), Some(nu)))
}

/// `|[N] \ U| + |N(U) ∪ N_{T+1}|` against
/// `|N_{T+2} \ U| + |N(U) ∩ N_{T+2}| + 2 |N_{T+1}|`.
pub fn verify_identity_t3(pattern: &StoragePattern, t: usize, u: &BTreeSet<usize>) -> Result<bool, CapacityError> {
    let (high, low) = pattern.replication_tiers(t);
    let graph = pattern.storage_graph();
    if !u.is_subset(&high) || !graph.is_stable(u) {
        return Err(CapacityError::PreconditionViolated("U must be a stable subset of N_{T+2}".into()));
    }
    let nbhd = graph.neighborhood(u);
    let lhs = pattern.n_servers() - u.len() + nbhd.union(&low).count();
    let rhs = high.difference(u).count() + nbhd.intersection(&high).count() + 2 * low.len();
    Ok(lhs == rhs)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificates {
    pub b_cover: Option<BCover>,
    pub fractional_matching: Option<Rational>,
    pub nu2: Option<usize>,
    pub stable_set: Option<BTreeSet<usize>>,
    pub theorem3: Option<Rational>,
    pub elimination_exhaustive: bool,
    pub redundant_servers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityReport {
    pub lower: Rational,
    pub upper: Rational,
    pub matched: bool,
    /// Servers contacted by the scheme that attains `lower`.
    pub lower_witness: Vec<usize>,
    /// Optimal download vector `D`.
    pub upper_witness: Vec<Rational>,
    pub certificates: Certificates,
    pub notes: Vec<String>,
}

pub fn capacity_report(pattern: &StoragePattern, x: usize, t: usize) -> Result<CapacityReport, CapacityError> {
    capacity_report_with(pattern, x, t, DEFAULT_ELIMINATION_CAP, Execution::default())
}

pub fn capacity_report_with(
    pattern: &StoragePattern,
    x: usize,
    t: usize,
    cap: usize,
    exec: Execution,
) -> Result<CapacityReport, CapacityError> {
    let n = pattern.n_servers();
    let mut notes = Vec::new();
    let mut certs = Certificates::default();
    if pattern.rho_min() <= x + t {
        notes.push(format!("rho_min = {} <= X + T = {}: capacity is zero", pattern.rho_min(), x + t));
        return Ok(CapacityReport {
            lower: Rational::zero(),
            upper: Rational::zero(),
            matched: true,
            lower_witness: Vec::new(),
            upper_witness: Vec::new(),
            certificates: certs,
            notes,
        });
    }

    let (mut lower, mut lower_witness) = match best_elimination_lower_bound(pattern, x, t, cap, exec) {
        Ok((r, s)) => {
            certs.elimination_exhaustive = true;
            (r, s.into_iter().collect::<Vec<_>>())
        }
        Err(CapacityError::SearchTooLarge { .. }) => {
            notes.push(format!("N = {n} exceeds the elimination cap {cap}; using all servers"));
            (lower_bound_direct(pattern, x, t), (1..=n).collect())
        }
        Err(e) => return Err(e),
    };
    let over: Vec<usize> = (0..pattern.n_sets())
        .filter(|&m| pattern.rho(m) > pattern.rho_min())
        .map(|m| m + 1)
        .collect();
    if !over.is_empty() {
        notes.push(format!(
            "message sets {over:?} are replicated more than rho_min = {} times",
            pattern.rho_min()
        ));
    }

    let (d_star, d) = converse_lp(pattern, x, t)?;
    let upper = d_star.recip();
    let h = pattern.converse_hypergraph(x, t)?;
    let fm = fractional_matching_number(&h)?;
    assert_eq!(fm, d_star, "LP duality violated");
    certs.fractional_matching = Some(fm);
    certs.b_cover = pattern.find_exact_b_cover();

    if x == 0 && (0..pattern.n_sets()).all(|m| pattern.rho(m) <= t + 2) {
        let (c3, nu) = theorem3_details(pattern, t)?;
        if let Some(nu) = nu {
            if c3 > lower {
                let plan = crate::scheme::CompositePlan::new(pattern, t, None, Some(nu.stable_set.clone()))
                    .map_err(|e| CapacityError::PreconditionViolated(e.to_string()))?;
                let mut used: BTreeSet<usize> = plan.outer_servers().iter().copied().collect();
                used.extend(plan.inner_servers().iter().copied());
                lower_witness = used.into_iter().collect();
                lower = c3.clone();
                notes.push("lower bound attained by the composite genie scheme".into());
            }
            certs.nu2 = Some(nu.value);
            certs.stable_set = Some(nu.stable_set);
            certs.theorem3 = Some(c3);
        }
    }
    certs.redundant_servers = (1..=n).filter(|v| !lower_witness.contains(v)).collect();
    assert!(lower <= upper, "lower bound exceeds upper bound");
    Ok(CapacityReport {
        matched: lower == upper,
        lower,
        upper,
        lower_witness,
        upper_witness: d,
        certificates: certs,
        notes,
    })
}

impl Serialize for Certificates {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Certificates", 7)?;
        let b_cover = self.b_cover.as_ref().map(|c| {
            serde_json::json!({
                "b": c.b,
                "message_sets": c.sets.iter().map(|m| m + 1).collect::<Vec<_>>(),
            })
        });
        st.serialize_field("b_cover", &b_cover)?;
        st.serialize_field("fractional_matching", &self.fractional_matching.as_ref().map(format_rational))?;
        st.serialize_field("nu2", &self.nu2)?;
        st.serialize_field("stable_set", &self.stable_set)?;
        st.serialize_field("theorem3", &self.theorem3.as_ref().map(format_rational))?;
        st.serialize_field("elimination_exhaustive", &self.elimination_exhaustive)?;
        st.serialize_field("redundant_servers", &self.redundant_servers)?;
        st.end()
    }
}

impl Serialize for CapacityReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CapacityReport", 7)?;
        st.serialize_field("lower", &format_rational(&self.lower))?;
        st.serialize_field("upper", &format_rational(&self.upper))?;
        st.serialize_field("matched", &self.matched)?;
        st.serialize_field("lower_witness", &self.lower_witness)?;
        st.serialize_field(
            "upper_witness",
            &self.upper_witness.iter().map(format_rational).collect::<Vec<_>>(),
        )?;
        st.serialize_field("certificates", &self.certificates)?;
        st.serialize_field("notes", &self.notes)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::by_name;
    use crate::model::Hyperedge;
    use itertools::Itertools;

    fn r(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    fn pattern(name: &str) -> StoragePattern {
        by_name(name).unwrap().pattern
    }

    fn hypergraph(n: usize, edges: &[&[usize]]) -> ConverseHypergraph {
        ConverseHypergraph {
            n_servers: n,
            edges: edges
                .iter()
                .enumerate()
                .map(|(i, e)| Hyperedge {
                    servers: e.to_vec(),
                    origin: i,
                })
                .collect(),
        }
    }

    /// Solves a square rational system; `None` if singular.
    fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).find(|&i| !a[i][c].is_zero())?;
            a.swap(c, p);
            b.swap(c, p);
            for i in 0..n {
                if i != c && !a[i][c].is_zero() {
                    let f = &a[i][c] / &a[c][c];
                    for j in c..n {
                        let v = &f * &a[c][j];
                        a[i][j] -= v;
                    }
                    let v = &f * &b[c];
                    b[i] -= v;
                }
            }
        }
        Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
    }

    /// Maximum of `sum x` over `{x >= 0, A x <= 1}` by visiting every vertex.
    fn vertex_max(a: &[Vec<Rational>]) -> Rational {
        let n = a[0].len();
        let mut rows: Vec<Vec<Rational>> = a.to_vec();
        let mut rhs = vec![Rational::one(); a.len()];
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = -Rational::one();
            rows.push(e);
            rhs.push(Rational::zero());
        }
        let mut best = Rational::zero();
        for tight in (0..rows.len()).combinations(n) {
            let sys = tight.iter().map(|&i| rows[i].clone()).collect();
            let b = tight.iter().map(|&i| rhs[i].clone()).collect();
            let Some(x) = solve_square(sys, b) else { continue };
            let feasible = rows.iter().zip(&rhs).all(|(row, bi)| {
                row.iter().zip(&x).fold(Rational::zero(), |acc, (p, q)| acc + p * q) <= *bi
            });
            if feasible {
                best = best.max(x.iter().fold(Rational::zero(), |acc, v| acc + v));
            }
        }
        best
    }

    fn incidence(h: &ConverseHypergraph) -> Vec<Vec<Rational>> {
        (1..=h.n_servers)
            .map(|v| {
                h.edges
                    .iter()
                    .map(|e| if e.servers.contains(&v) { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&r(2, 4)), "1/2");
        assert_eq!(format_rational(&r(3, 1)), "3/1");
        assert_eq!(parse_rational("9/2"), Some(r(9, 2)));
        assert_eq!(parse_rational("4"), Some(r(4, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn simplex_small_programs() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let lp = LinearProgram {
            sense: Sense::Maximize,
            objective: vec![r(3, 1), r(2, 1)],
            constraints: vec![
                (vec![r(1, 1), r(1, 1)], Relation::Le, r(4, 1)),
                (vec![r(1, 1), r(3, 1)], Relation::Le, r(6, 1)),
                (vec![r(1, 1), r(0, 1)], Relation::Le, r(3, 1)),
            ],
        };
        let s = lp.solve().unwrap();
        assert_eq!(s.value, r(11, 1));
        assert_eq!(s.x, vec![r(3, 1), r(1, 1)]);

        let eq = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1, 1), r(2, 1)],
            constraints: vec![(vec![r(1, 1), r(1, 1)], Relation::Eq, r(5, 2))],
        };
        assert_eq!(eq.solve().unwrap().value, r(5, 2));

        let infeasible = LinearProgram {
            sense: Sense::Minimize,
            objective: vec![r(1, 1)],
            constraints: vec![(vec![r(1, 1)], Relation::Le, r(-1, 1))],
        };
        assert_eq!(infeasible.solve(), Err(CapacityError::Infeasible));

        let unbounded = LinearProgram {
            sense: Sense::Maximize,
            objective: vec![r(1, 1)],
            constraints: vec![(vec![r(1, 1)], Relation::Ge, r(1, 1))],
        };
        assert_eq!(unbounded.solve(), Err(CapacityError::Unbounded));
    }

    #[test]
    fn fractional_matching_examples() {
        let triangle = hypergraph(3, &[&[1, 2], &[2, 3], &[1, 3]]);
        assert_eq!(vertex_max(&incidence(&triangle)), r(3, 2));
        assert_eq!(fractional_matching_number(&triangle).unwrap(), r(3, 2));
        assert_eq!(fractional_matching_number(&hypergraph(2, &[&[1, 2]])).unwrap(), r(1, 1));
        let h = pattern("example_1").converse_hypergraph(0, 1).unwrap();
        assert_eq!(fractional_matching_number(&h).unwrap(), r(2, 1));
        assert_eq!(vertex_max(&incidence(&h)), r(2, 1));
    }

    #[test]
    fn converse_examples() {
        assert_eq!(converse_lp(&pattern("example_1"), 0, 1).unwrap().0, r(2, 1));
        assert_eq!(converse_lp(&pattern("example_2"), 0, 1).unwrap().0, r(5, 2));
        assert_eq!(converse_lp(&pattern("example_6"), 0, 1).unwrap().0, r(9, 2));
        for name in ["example_1", "example_2", "example_3", "example_6"] {
            let (d_star, d) = converse_lp(&pattern(name), 0, 1).unwrap();
            assert_eq!(d.iter().fold(Rational::zero(), |a, b| a + b), d_star);
            assert!(averaging_bound_holds(&pattern(name), 0, 1, &d));
        }
    }

    #[test]
    fn direct_lower_bound() {
        assert_eq!(lower_bound_direct(&pattern("sec2_running"), 0, 1), r(1, 4));
        assert_eq!(lower_bound_direct(&pattern("example_4"), 0, 1), r(3, 5));
        assert_eq!(lower_bound_direct(&pattern("example_4"), 2, 2), Rational::zero());
    }

    #[test]
    fn elimination_examples() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let (v, s) = best_elimination_lower_bound(&pattern("example_4"), 0, 1, 20, exec).unwrap();
            assert_eq!((v, s), (r(2, 3), BTreeSet::from([2, 3, 4])));
            let (v, s) = best_elimination_lower_bound(&pattern("sec2_running"), 0, 1, 20, exec).unwrap();
            assert_eq!((v, s), (r(1, 3), BTreeSet::from([1, 3, 4])));
            let (v, s) = best_elimination_lower_bound(&pattern("example_2"), 0, 1, 20, exec).unwrap();
            assert_eq!((v, s), (r(2, 5), (1..=5).collect()));
        }
        assert_eq!(
            best_elimination_lower_bound(&pattern("example_6"), 0, 1, 7, Execution::Sequential),
            Err(CapacityError::SearchTooLarge { n: 8, cap: 7 })
        );
    }

    #[test]
    fn lexicographic_tie_breaks() {
        assert_eq!(lex_smaller(0b011, 0b101), Ordering::Greater);
        assert_eq!(lex_smaller(0b110, 0b101), Ordering::Less);
        assert!(lex_less_bits(0b001, 0b010));
        assert!(lex_less_bits(0b001, 0b011));
        assert!(!lex_less_bits(0b011, 0b001));
        assert!(lex_less_bits(0b101, 0b010));
    }

    #[test]
    fn nu2_examples() {
        let edge = StorageGraph::new(vec![1, 2], [(1, 2)]);
        assert_eq!(nu2(&edge).unwrap().value, 2);
        assert_eq!(two_matching_bruteforce(&edge).unwrap(), 2);
        let triangle = StorageGraph::new(vec![1, 2, 3], [(1, 2), (2, 3), (1, 3)]);
        assert_eq!(nu2(&triangle).unwrap().value, 3);
        assert_eq!(two_matching_bruteforce(&triangle).unwrap(), 3);

        let p = pattern("example_6");
        let (high, _) = p.replication_tiers(1);
        let g = p.storage_graph().induced(&high);
        let nu = nu2(&g).unwrap();
        assert_eq!(nu.value, 5);
        assert_eq!(nu.stable_set, BTreeSet::from([5, 6]));
        assert_eq!(two_matching_bruteforce(&g).unwrap(), 5);

        let isolated = StorageGraph::new(vec![1, 2, 3], []);
        assert_eq!(nu2(&isolated).unwrap(), Nu2 { value: 0, stable_set: BTreeSet::from([1, 2, 3]) });
        let big = StorageGraph::new((1..=25).collect(), []);
        assert_eq!(nu2(&big), Err(CapacityError::GraphTooLarge { vertices: 25, limit: 24 }));
    }

    #[test]
    fn theorem3_examples() {
        assert_eq!(theorem3_capacity(&pattern("example_5"), 1).unwrap(), r(2, 7));
        assert_eq!(theorem3_capacity(&pattern("example_6"), 1).unwrap(), r(2, 9));
        let cyclic = StoragePattern::uniform(5, 1, &[&[1, 2, 3], &[2, 3, 4], &[3, 4, 5], &[1, 4, 5], &[1, 2, 5]]).unwrap();
        let nu = nu2(&cyclic.storage_graph()).unwrap().value;
        assert_eq!(theorem3_capacity(&cyclic, 1).unwrap(), r(2, nu as i64));
        assert!(matches!(
            theorem3_capacity(&pattern("example_4"), 1),
            Err(CapacityError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn identity_examples() {
        let p = pattern("example_6");
        assert!(verify_identity_t3(&p, 1, &BTreeSet::from([5, 6])).unwrap());
        assert!(verify_identity_t3(&p, 1, &BTreeSet::new()).unwrap());
        assert!(verify_identity_t3(&p, 1, &BTreeSet::from([7])).is_err());
    }

    #[test]
    fn reports_for_the_catalog() {
        let expected = [
            ("sec2_running", r(1, 3)),
            ("example_1", r(1, 2)),
            ("example_2", r(2, 5)),
            ("example_3", r(2, 5)),
            ("example_4", r(2, 3)),
            ("example_5", r(2, 7)),
            ("example_6", r(2, 9)),
        ];
        for (name, c) in expected {
            let rep = capacity_report(&pattern(name), 0, 1).unwrap();
            assert_eq!((&rep.lower, &rep.upper, rep.matched), (&c, &c, true), "{name}");
        }
        let rep = capacity_report(&pattern("sec2_running"), 0, 1).unwrap();
        assert!(!rep.lower_witness.contains(&2));
        let rep = capacity_report(&pattern("example_5"), 0, 1).unwrap();
        assert_eq!(rep.certificates.theorem3, Some(r(2, 7)));
        let rep = capacity_report(&pattern("example_1"), 1, 2).unwrap();
        assert_eq!((rep.lower, rep.upper, rep.matched), (Rational::zero(), Rational::zero(), true));
    }

    #[test]
    fn report_json_shape() {
        let rep = capacity_report(&pattern("example_6"), 0, 1).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["lower"], "2/9");
        assert_eq!(v["upper"], "2/9");
        assert_eq!(v["matched"], true);
        assert_eq!(v["certificates"]["nu2"], 5);
        assert_eq!(v["certificates"]["stable_set"], serde_json::json!([5, 6]));
        assert_eq!(v["upper_witness"].as_array().unwrap().len(), 8);
    }
}
