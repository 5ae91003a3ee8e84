//! Verifiers for the three guarantees. Privacy and security are checked by
//! enumerating the whole relevant randomness space and comparing exact
//! occurrence counts of the colluders' view.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ff::{FieldElement, FieldMatrix, PrimeField};
use crate::grscoef::{choose_field, choose_points, dual_grs_coeffs, EvaluationPoints, GrsCoefficients};
use crate::model::StoragePattern;
use crate::par::{fold_range, map_range, Execution};
use crate::scheme::{
    answer, decode, decode_compute, encode_storage, evaluate_lambda, gen_queries, Demand, MessageStore, NoiseTape,
    NoiseVectors, Query, SchemeError, SchemeInstance, ServerStorage,
};

pub const DEFAULT_MAX_STATES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("enumeration needs {required} states, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// `q^exponent` if it fits the budget.
fn space_size(q: u64, exponent: usize, budget: EnumerationBudget) -> Result<u64, VerifyError> {
    let mut size: u64 = 1;
    for _ in 0..exponent {
        size = match size.checked_mul(q) {
            Some(s) if s <= budget.max_states => s,
            _ => {
                return Err(VerifyError::BudgetExceeded {
                    required: format!("{q}^{exponent}"),
                    budget: budget.max_states,
                })
            }
        };
    }
    Ok(size)
}

/// Exact occurrence counts of a view over an enumerated randomness space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DistributionTable {
    pub counts: BTreeMap<Vec<u64>, u64>,
}

impl DistributionTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    fn record(mut self, key: Vec<u64>) -> Self {
        *self.counts.entry(key).or_insert(0) += 1;
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self
    }

    /// Every one of the `q^len` possible views occurs equally often.
    pub fn is_uniform(&self, q: u64, view_len: usize) -> bool {
        let expected = (q as u128).checked_pow(view_len as u32);
        let distinct_ok = expected == Some(self.counts.len() as u128);
        let mut counts = self.counts.values();
        let first = counts.next();
        distinct_ok && counts.all(|c| Some(c) == first)
    }
}

fn check_colluders(instance: &SchemeInstance, colluders: &BTreeSet<usize>) -> Result<(), VerifyError> {
    match colluders.iter().find(|&&n| n == 0 || n > instance.n_servers()) {
        Some(n) => Err(VerifyError::PreconditionViolated(format!("colluder {n} is not a server"))),
        None => Ok(()),
    }
}

/// Message sets stored at some colluder, ascending.
fn touched_sets(instance: &SchemeInstance, colluders: &BTreeSet<usize>) -> Vec<usize> {
    let touched: BTreeSet<usize> = colluders.iter().flat_map(|&n| instance.pattern().server_index(n)).collect();
    touched.into_iter().collect()
}

fn counts(instance: &SchemeInstance) -> Vec<usize> {
    instance.pattern().sets().iter().map(|s| s.count).collect()
}

/// Fills the noise entries of the touched sets from the mixed-radix digits
/// of `index`, in (m, j, l, k) order. Other entries are zero: colluders
/// never see them.
fn noise_from_index(
    field: PrimeField,
    counts: &[usize],
    touched: &[usize],
    depth: usize,
    l: usize,
    mut index: u64,
) -> NoiseVectors {
    let q = field.modulus();
    let mut noise = NoiseVectors::zeros(field, counts, depth, l);
    for &m in touched {
        for j in 1..=depth {
            for ll in 1..=l {
                for v in noise.get_mut(m, j, ll).iter_mut() {
                    *v = field.elem(index % q);
                    index /= q;
                }
            }
        }
    }
    noise
}

/// `(set, index)` pairs of every message, 0-based.
fn all_demands(instance: &SchemeInstance) -> Vec<(usize, usize)> {
    instance
        .pattern()
        .sets()
        .iter()
        .enumerate()
        .flat_map(|(m, s)| (0..s.count).map(move |k| (m, k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub demand: String,
    pub noise_seed: u64,
    pub expected: Vec<FieldElement>,
    pub decoded: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectnessReport {
    pub trials: u64,
    pub passes: u64,
    pub failures: Vec<Counterexample>,
}

impl CorrectnessReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.passes == self.trials
    }
}

/// Hook applied to the answers before decoding.
pub type AnswerFault = dyn Fn(&mut [FieldElement]) + Sync;

/// Random messages, demands and noise per trial. Instances that support
/// private computation alternate between retrieval and computation demands.
pub fn verify_correctness(
    instance: &SchemeInstance,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<CorrectnessReport, VerifyError> {
    verify_correctness_with(instance, trials, seed, exec, None)
}

pub fn verify_correctness_with(
    instance: &SchemeInstance,
    trials: u64,
    seed: u64,
    exec: Execution,
    fault: Option<&AnswerFault>,
) -> Result<CorrectnessReport, VerifyError> {
    let demands = all_demands(instance);
    let f = instance.field();
    let outcomes = map_range(exec, 0..trials, |trial| -> Result<Option<Counterexample>, SchemeError> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let messages = MessageStore::random(instance, &mut rng);
        let noise_seed: u64 = rng.random();
        let tape = NoiseTape::new(noise_seed);
        let (demand, label, expected) = if instance.supports_compute() && trial % 2 == 1 {
            let lambda: Vec<Vec<FieldElement>> = counts(instance)
                .iter()
                .map(|&k| (0..k).map(|_| f.elem(rng.random_range(0..f.modulus()))).collect())
                .collect();
            let expected = vec![evaluate_lambda(&messages, &lambda)];
            (Demand::Compute { lambda }, "compute".to_string(), expected)
        } else {
            let (m, k) = demands[rng.random_range(0..demands.len())];
            (
                Demand::Retrieve { set: m, index: k },
                format!("retrieve({}, {})", m + 1, k + 1),
                messages.message(m, k),
            )
        };
        let storage = encode_storage(instance, &messages, &tape.storage_noise(instance))?;
        let queries = gen_queries(instance, &demand, &tape.query_noise(instance))?;
        let mut answers = storage
            .iter()
            .zip(&queries)
            .map(|(s, q)| answer(s, q))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(fault) = fault {
            fault(&mut answers);
        }
        let decoded = match &demand {
            Demand::Retrieve { set, .. } => decode(instance, &answers, *set)?,
            Demand::Compute { .. } => vec![decode_compute(instance, &answers)?],
        };
        Ok((decoded != expected).then_some(Counterexample {
            trial,
            demand: label,
            noise_seed,
            expected,
            decoded,
        }))
    });
    let mut failures = Vec::new();
    for o in outcomes {
        if let Some(c) = o? {
            failures.push(c);
        }
    }
    Ok(CorrectnessReport {
        trials,
        passes: trials - failures.len() as u64,
        failures,
    })
}

/// Query generator under test; `gen_queries` for the real scheme.
pub type QueryGenerator = dyn Fn(&SchemeInstance, &Demand, &NoiseVectors) -> Result<Vec<Query>, SchemeError> + Sync;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrivacyReport {
    pub colluders: Vec<usize>,
    pub states_per_demand: u64,
    /// One table per demand `(set, index)`, 1-based.
    pub tables: Vec<((usize, usize), DistributionTable)>,
    pub holds: bool,
}

/// Builds the colluders' query-view table for every demand and compares.
pub fn verify_privacy_exhaustive(
    instance: &SchemeInstance,
    colluders: &BTreeSet<usize>,
    budget: EnumerationBudget,
    exec: Execution,
) -> Result<PrivacyReport, VerifyError> {
    verify_privacy_exhaustive_with(instance, colluders, budget, exec, &gen_queries)
}

pub fn verify_privacy_exhaustive_with(
    instance: &SchemeInstance,
    colluders: &BTreeSet<usize>,
    budget: EnumerationBudget,
    exec: Execution,
    generator: &QueryGenerator,
) -> Result<PrivacyReport, VerifyError> {
    check_colluders(instance, colluders)?;
    if colluders.len() > instance.t() {
        return Err(VerifyError::PreconditionViolated(format!(
            "{} colluders exceed T = {}",
            colluders.len(),
            instance.t()
        )));
    }
    let f = instance.field();
    let cnt = counts(instance);
    let touched = touched_sets(instance, colluders);
    let exponent: usize = touched.iter().map(|&m| cnt[m] * instance.t() * instance.block_length()).sum();
    let space = space_size(f.modulus(), exponent, budget)?;
    let mut tables = Vec::new();
    for (m, k) in all_demands(instance) {
        let demand = Demand::Retrieve { set: m, index: k };
        let table = fold_range(
            exec,
            0..space,
            DistributionTable::default,
            |table, idx| {
                let noise = noise_from_index(f, &cnt, &touched, instance.t(), instance.block_length(), idx);
                let queries = generator(instance, &demand, &noise).expect("valid demand");
                let view: Vec<u64> = colluders.iter().flat_map(|&n| queries[n - 1].flatten()).collect();
                table.record(view)
            },
            DistributionTable::merge,
        );
        debug_assert_eq!(table.total(), space);
        tables.push(((m + 1, k + 1), table));
    }
    let holds = tables.windows(2).all(|w| w[0].1 == w[1].1);
    Ok(PrivacyReport {
        colluders: colluders.iter().copied().collect(),
        states_per_demand: space,
        tables,
        holds,
    })
}

/// Every `T x T` matrix `[v_{m,n} (l + beta_n)^{t-1}]` over `T`-subsets of
/// each `R_m` is invertible. Vacuously true for `T = 0`.
pub fn verify_privacy_structural(instance: &SchemeInstance) -> bool {
    structural_privacy_raw(
        instance.field(),
        instance.pattern(),
        instance.points().betas(),
        instance.coeffs(),
        instance.t(),
        instance.block_length(),
    )
}

/// Same check on explicit points and coefficients.
pub fn structural_privacy_raw(
    field: PrimeField,
    pattern: &StoragePattern,
    betas: &[FieldElement],
    coeffs: &GrsCoefficients,
    t: usize,
    l: usize,
) -> bool {
    if t == 0 {
        return true;
    }
    (0..pattern.n_sets()).all(|m| {
        (1..=l).all(|ll| {
            pattern.set(m).servers.iter().copied().combinations(t).all(|subset| {
                let entries: Vec<FieldElement> = subset
                    .iter()
                    .flat_map(|&n| {
                        let v = coeffs.get(m, n).unwrap_or(field.zero());
                        let shift = field.elem(ll as u64) + betas[n - 1];
                        (0..t).map(move |e| v * shift.pow(e as u64))
                    })
                    .collect();
                FieldMatrix::from_elements(field, t, t, &entries).is_ok_and(|mat| mat.rank() == t)
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecurityReport {
    pub colluders: Vec<usize>,
    pub noise_states: u64,
    pub message_realizations: usize,
    /// Fewer than all message realizations were enumerated.
    pub partial: bool,
    pub uniform: bool,
    pub message_independent: bool,
}

impl SecurityReport {
    pub fn holds(&self) -> bool {
        self.uniform && self.message_independent
    }
}

const PARTIAL_GRID_RANDOM: usize = 8;

/// Builds the colluders' share-view table for each message realization in
/// the grid and compares. Needs `X >= 1`.
pub fn verify_security_exhaustive(
    instance: &SchemeInstance,
    colluders: &BTreeSet<usize>,
    budget: EnumerationBudget,
    exec: Execution,
) -> Result<SecurityReport, VerifyError> {
    if instance.x() == 0 {
        return Err(VerifyError::PreconditionViolated(
            "X = 0: storage is plaintext and no security is claimed".into(),
        ));
    }
    check_colluders(instance, colluders)?;
    let f = instance.field();
    let q = f.modulus();
    let l = instance.block_length();
    let cnt = counts(instance);
    let touched = touched_sets(instance, colluders);
    let symbols: usize = touched.iter().map(|&m| cnt[m] * l).sum();
    let noise_space = space_size(q, symbols * instance.x(), budget)?;

    let full_grid = space_size(q, symbols * (instance.x() + 1), budget).is_ok();
    let grid: Vec<Vec<u64>> = if full_grid {
        (0..q.pow(symbols as u32))
            .map(|mut idx| {
                (0..symbols)
                    .map(|_| {
                        let d = idx % q;
                        idx /= q;
                        d
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let mut g = vec![vec![0; symbols], vec![1; symbols]];
        g.extend((0..PARTIAL_GRID_RANDOM).map(|_| (0..symbols).map(|_| rng.random_range(0..q)).collect()));
        g
    };

    let view_len: usize = colluders
        .iter()
        .map(|&n| instance.pattern().server_index(n).iter().map(|&m| cnt[m] * l).sum::<usize>())
        .sum();
    let mut tables = Vec::with_capacity(grid.len());
    for digits in &grid {
        let mut it = digits.iter();
        let mut messages = MessageStore::zeros(instance);
        for &m in &touched {
            for ll in 1..=l {
                for v in messages.row_mut(m, ll).iter_mut() {
                    *v = f.elem(*it.next().expect("grid covers touched symbols"));
                }
            }
        }
        let table = fold_range(
            exec,
            0..noise_space,
            DistributionTable::default,
            |table, idx| {
                let noise = noise_from_index(f, &cnt, &touched, instance.x(), l, idx);
                let storage = encode_storage(instance, &messages, &noise).expect("shapes match");
                table.record(share_view(&storage, colluders))
            },
            DistributionTable::merge,
        );
        tables.push(table);
    }
    Ok(SecurityReport {
        colluders: colluders.iter().copied().collect(),
        noise_states: noise_space,
        message_realizations: grid.len(),
        partial: !full_grid,
        uniform: tables.iter().all(|t| t.is_uniform(q, view_len)),
        message_independent: tables.windows(2).all(|w| w[0] == w[1]),
    })
}

/// Shares of the colluders in (server, m, l, k) order.
fn share_view(storage: &[ServerStorage], colluders: &BTreeSet<usize>) -> Vec<u64> {
    colluders
        .iter()
        .flat_map(|&n| storage[n - 1].shares.values().flatten().flatten().map(FieldElement::value))
        .collect()
}

/// `[1, s, ..., s^X]` with `s = l + beta_n`, one row per server.
fn share_matrix(instance: &SchemeInstance, servers: &[usize], l: usize) -> FieldMatrix {
    let f = instance.field();
    let entries: Vec<FieldElement> = servers
        .iter()
        .flat_map(|&n| {
            let s = f.elem(l as u64) + instance.points().beta(n);
            (0..=instance.x()).map(move |e| s.pow(e as u64))
        })
        .collect();
    FieldMatrix::from_elements(f, servers.len(), instance.x() + 1, &entries).expect("consistent field")
}

/// Solves for `W_{m,k}(l)` from the shares of `servers`.
pub fn reconstruct_symbol(
    instance: &SchemeInstance,
    storage: &[ServerStorage],
    m: usize,
    k: usize,
    l: usize,
    servers: &[usize],
) -> Result<FieldElement, VerifyError> {
    if servers.len() != instance.x() + 1 {
        return Err(VerifyError::PreconditionViolated(format!(
            "need X + 1 = {} shares",
            instance.x() + 1
        )));
    }
    let rhs: Vec<FieldElement> = servers
        .iter()
        .map(|&n| {
            storage[n - 1]
                .shares
                .get(&m)
                .map(|rows| rows[l - 1][k])
                .ok_or_else(|| VerifyError::PreconditionViolated(format!("server {n} does not store set {}", m + 1)))
        })
        .collect::<Result<_, _>>()?;
    let sol = share_matrix(instance, servers, l)
        .solve(&rhs)
        .map_err(|e| VerifyError::Scheme(SchemeError::Field(e)))?;
    Ok(sol[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReconstructionReport {
    /// Every `(X+1)`-subset of every `R_m` determines the symbol.
    pub reconstructs: bool,
    /// No `X`-subset does.
    pub hides: bool,
}

/// Rank check on the share matrices of every `R_m` and symbol index.
pub fn share_reconstruction_check(instance: &SchemeInstance) -> ReconstructionReport {
    let x = instance.x();
    let f = instance.field();
    let mut e1 = FieldMatrix::zeros(f, 1, x + 1);
    e1.set(0, 0, f.one());
    let mut reconstructs = true;
    let mut hides = true;
    for s in instance.pattern().sets() {
        for l in 1..=instance.block_length() {
            for subset in s.servers.iter().copied().combinations(x + 1) {
                reconstructs &= share_matrix(instance, &subset, l).rank() == x + 1;
            }
            if x > 0 {
                for subset in s.servers.iter().copied().combinations(x) {
                    let m = share_matrix(instance, &subset, l);
                    let r = m.rank();
                    hides &= m.stack(&e1).is_ok_and(|st| st.rank() == r + 1);
                }
            }
        }
    }
    ReconstructionReport { reconstructs, hides }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankIntuition {
    /// `N x M` matrix of `v_{m,n}` (zero where `n` does not store `m`).
    pub v: FieldMatrix,
    pub rank: usize,
    pub bound: usize,
    /// The `rho - 1` Vandermonde rows times `V` vanish.
    pub annihilated: bool,
}

impl RankIntuition {
    pub fn holds(&self) -> bool {
        self.rank <= self.bound && self.annihilated
    }
}

/// Interference-rank check for a constant-replication pattern with
/// automatically chosen points.
pub fn verify_rank_intuition(pattern: &StoragePattern) -> Result<RankIntuition, VerifyError> {
    let n = pattern.n_servers();
    let field = choose_field(n, 1, None).map_err(SchemeError::from)?;
    let points = choose_points(field, n, 1).map_err(SchemeError::from)?;
    rank_intuition_with_points(pattern, &points)
}

pub fn rank_intuition_with_points(pattern: &StoragePattern, points: &EvaluationPoints) -> Result<RankIntuition, VerifyError> {
    let rho = pattern.rho_min();
    if (0..pattern.n_sets()).any(|m| pattern.rho(m) != rho) {
        return Err(VerifyError::PreconditionViolated("replication must be constant".into()));
    }
    let f = points.field();
    let n = pattern.n_servers();
    let coeffs = dual_grs_coeffs(points, pattern);
    let mut v = FieldMatrix::zeros(f, n, pattern.n_sets());
    for m in 0..pattern.n_sets() {
        for &(server, c) in coeffs.set(m) {
            v.set(server - 1, m, c);
        }
    }
    let rank = v.rank();
    let annihilated = rho <= 1 || {
        let vander = FieldMatrix::vandermonde(f, points.betas(), rho - 1);
        let prod = vander.mul(&v).map_err(|e| VerifyError::Scheme(SchemeError::Field(e)))?;
        (0..prod.rows()).all(|r| prod.row(r).iter().all(FieldElement::is_zero))
    };
    Ok(RankIntuition {
        v,
        rank,
        bound: n + 1 - rho,
        annihilated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::by_name;

    fn tiny(q: u64, x: usize, t: usize, n: usize, sets: &[&[usize]]) -> SchemeInstance {
        let p = StoragePattern::uniform(n, 1, sets).unwrap();
        SchemeInstance::build(&p, x, t, Some(q)).unwrap()
    }

    #[test]
    fn correctness_on_example_2() {
        let inst = SchemeInstance::build(&by_name("example_2").unwrap().pattern, 0, 1, None).unwrap();
        let rep = verify_correctness(&inst, 100, 1, Execution::default()).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.passes, 100);

        let corrupt = |a: &mut [FieldElement]| a[0] = a[0] + a[0].field().one();
        let rep = verify_correctness_with(&inst, 10, 1, Execution::Sequential, Some(&corrupt)).unwrap();
        assert_eq!(rep.failures.len(), 10);
    }

    #[test]
    fn correctness_in_computation_mode() {
        let inst = SchemeInstance::build(&by_name("example_2").unwrap().pattern, 0, 2, None).unwrap();
        let rep = verify_correctness(&inst, 20, 4, Execution::default()).unwrap();
        assert!(rep.holds());
    }

    #[test]
    fn privacy_tiny_instance() {
        let inst = tiny(5, 0, 1, 3, &[&[1, 2], &[2, 3]]);
        for n in 1..=3 {
            let rep = verify_privacy_exhaustive(&inst, &BTreeSet::from([n]), EnumerationBudget::default(), Execution::default())
                .unwrap();
            assert!(rep.holds, "server {n}");
            assert_eq!(rep.tables.len(), 2);
            for (_, t) in &rep.tables {
                assert_eq!(t.total(), rep.states_per_demand);
            }
        }
        let rep = verify_privacy_exhaustive(&inst, &BTreeSet::new(), EnumerationBudget::default(), Execution::Sequential).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.states_per_demand, 1);
    }

    #[test]
    fn privacy_fails_without_query_noise() {
        let inst = tiny(5, 0, 1, 3, &[&[1, 2], &[2, 3]]);
        let broken = |i: &SchemeInstance, d: &Demand, _: &NoiseVectors| {
            let f = i.field();
            gen_queries(i, d, &NoiseVectors::zeros(f, &[1, 1], i.t(), i.block_length()))
        };
        let rep = verify_privacy_exhaustive_with(
            &inst,
            &BTreeSet::from([2]),
            EnumerationBudget::default(),
            Execution::Sequential,
            &broken,
        )
        .unwrap();
        assert!(!rep.holds);
    }

    #[test]
    fn privacy_budget_guard() {
        let inst = tiny(5, 0, 1, 3, &[&[1, 2], &[2, 3]]);
        let err = verify_privacy_exhaustive(&inst, &BTreeSet::from([2]), EnumerationBudget { max_states: 24 }, Execution::Sequential);
        assert_eq!(
            err,
            Err(VerifyError::BudgetExceeded {
                required: "5^2".into(),
                budget: 24
            })
        );
    }

    #[test]
    fn security_single_colluder() {
        let inst = tiny(5, 1, 0, 2, &[&[1, 2]]);
        for n in 1..=2 {
            let rep = verify_security_exhaustive(&inst, &BTreeSet::from([n]), EnumerationBudget::default(), Execution::default())
                .unwrap();
            assert!(rep.holds());
            assert!(!rep.partial);
            assert_eq!(rep.noise_states, 5);
            assert_eq!(rep.message_realizations, 5);
        }
        let both = verify_security_exhaustive(&inst, &BTreeSet::from([1, 2]), EnumerationBudget::default(), Execution::Sequential)
            .unwrap();
        assert!(!both.message_independent);
    }

    #[test]
    fn security_rejects_plain_storage() {
        let inst = tiny(5, 0, 1, 3, &[&[1, 2], &[2, 3]]);
        assert!(matches!(
            verify_security_exhaustive(&inst, &BTreeSet::from([1]), EnumerationBudget::default(), Execution::Sequential),
            Err(VerifyError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn shares_reconstruct_and_hide() {
        let p = StoragePattern::uniform(4, 2, &[&[1, 2, 3], &[2, 3, 4]]).unwrap();
        let inst = SchemeInstance::build(&p, 1, 1, None).unwrap();
        assert_eq!(
            share_reconstruction_check(&inst),
            ReconstructionReport {
                reconstructs: true,
                hides: true
            }
        );
        let tape = NoiseTape::new(6);
        let messages = tape.messages(&inst);
        let storage = encode_storage(&inst, &messages, &tape.storage_noise(&inst)).unwrap();
        for pair in [[2, 3], [2, 4], [3, 4]] {
            assert_eq!(reconstruct_symbol(&inst, &storage, 1, 1, 1, &pair).unwrap(), messages.symbol(1, 1, 1));
        }
    }

    #[test]
    fn structural_privacy() {
        let inst = SchemeInstance::build(&by_name("example_4").unwrap().pattern, 0, 2, None).unwrap();
        assert!(verify_privacy_structural(&inst));
        let mut betas = inst.points().betas().to_vec();
        betas[2] = betas[1];
        assert!(!structural_privacy_raw(inst.field(), inst.pattern(), &betas, inst.coeffs(), 2, inst.block_length()));

        let t1 = SchemeInstance::build(&by_name("example_6").unwrap().pattern, 0, 1, None).unwrap();
        let nonzero = t1.pattern().sets().iter().enumerate().all(|(m, s)| {
            s.servers.iter().all(|&n| !t1.coeffs().get(m, n).unwrap().is_zero())
        });
        assert_eq!(verify_privacy_structural(&t1), nonzero);
        assert!(nonzero);
    }

    #[test]
    fn structural_implies_exhaustive_on_tiny_instances() {
        for (n, sets) in [(3, vec![&[1, 2][..], &[2, 3]]), (3, vec![&[1, 2, 3][..], &[1, 3]]), (4, vec![&[1, 2][..], &[3, 4], &[1, 4]])] {
            let inst = tiny(7, 0, 1, n, &sets);
            assert!(verify_privacy_structural(&inst));
            for c in 1..=n {
                let rep = verify_privacy_exhaustive(&inst, &BTreeSet::from([c]), EnumerationBudget::default(), Execution::default())
                    .unwrap();
                assert!(rep.holds);
            }
        }
    }

    #[test]
    fn rank_intuition() {
        let p = StoragePattern::uniform(5, 1, &[&[1, 2, 3], &[2, 4, 5], &[1, 3, 5], &[1, 2, 4]]).unwrap();
        let r = verify_rank_intuition(&p).unwrap();
        assert!(r.holds());
        assert!(r.rank <= 3);

        let single = StoragePattern::uniform(3, 1, &[&[1], &[2], &[3]]).unwrap();
        let r = verify_rank_intuition(&single).unwrap();
        assert!(r.annihilated);
        assert_eq!(r.bound, 3);

        assert!(verify_rank_intuition(&by_name("example_3").unwrap().pattern).is_err());
    }
}
