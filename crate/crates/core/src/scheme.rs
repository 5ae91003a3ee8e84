//! The retrieval protocol: secret-shared storage, queries built from the
//! dual-GRS coefficients, one-symbol answers and the Vandermonde decoder.
//! Also the private linear-computation variant (`X = 0`, `rho_min = T + 1`)
//! and the composite scheme for patterns replicated `T + 1` or `T + 2` times,
//! which replaces a virtual "genie" server by a private computation.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::capacity::{nu2, CapacityError};
use crate::ff::{dot, FieldElement, FieldError, FieldMatrix, PrimeField};
use crate::grscoef::{
    annihilator_check, choose_field, choose_points_where, dual_grs_coeffs, EvaluationPoints, GrsCoefficients,
    GrsError,
};
use crate::model::{MessageSet, PatternError, StoragePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("rho_min = {rho_min} does not exceed X + T = {x} + {t}")]
    DegenerateCapacity { rho_min: usize, x: usize, t: usize },
    #[error("private computation needs X = 0 and rho_min = T + 1 (have X = {x}, T = {t}, rho_min = {rho_min})")]
    ComputeModeUnavailable { x: usize, t: usize, rho_min: usize },
    #[error("normalizer sum_n v/(1 + beta_n) vanishes for message set {set}")]
    ZeroNormalizer { set: usize },
    #[error("message set {set} has no message {index}")]
    UnknownMessage { set: usize, index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("storage of server {storage} paired with query for server {query}")]
    ServerMismatch { storage: usize, query: usize },
    #[error("decoding matrix AB is singular")]
    SingularDecode,
    #[error("annihilation identity fails for message set {set}")]
    AnnihilationFailed { set: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

/// Primes tried above the minimal one when no admissible point set exists.
const FIELD_SEARCH_ATTEMPTS: usize = 16;

/// Public parameters of one run of the scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeInstance {
    field: PrimeField,
    original: StoragePattern,
    pattern: StoragePattern,
    x: usize,
    t: usize,
    l: usize,
    points: EvaluationPoints,
    coeffs: GrsCoefficients,
}

impl SchemeInstance {
    /// Truncates every `R_m` to its `rho_min` smallest servers, picks the
    /// field and the evaluation points and computes the coefficients.
    pub fn build(pattern: &StoragePattern, x: usize, t: usize, q: Option<u64>) -> Result<Self, SchemeError> {
        let rho_min = pattern.rho_min();
        if rho_min <= x + t {
            return Err(SchemeError::DegenerateCapacity { rho_min, x, t });
        }
        let l = rho_min - x - t;
        let truncated = StoragePattern::new(
            pattern.n_servers(),
            pattern
                .sets()
                .iter()
                .map(|s| MessageSet {
                    count: s.count,
                    servers: s.servers[..rho_min].to_vec(),
                })
                .collect(),
        )?;
        let n = pattern.n_servers();
        let compute_capable = x == 0 && rho_min == t + 1;

        let mut field = choose_field(n, l, q)?;
        let mut attempts = if q.is_some() { 1 } else { FIELD_SEARCH_ATTEMPTS };
        let points = loop {
            let found = choose_points_where(field, n, l, |p| {
                !compute_capable || (0..truncated.n_sets()).all(|m| !normalizer_of(p, &truncated, m).is_zero())
            });
            match found {
                Ok(p) => break p,
                Err(e) => {
                    attempts -= 1;
                    if attempts == 0 {
                        return Err(e.into());
                    }
                    field = choose_field(n, l, Some(crate::ff::next_prime_above(field.modulus())))?;
                }
            }
        };
        let coeffs = dual_grs_coeffs(&points, &truncated);
        if let Some(set) = (0..truncated.n_sets()).find(|&m| !annihilator_check(&points, &coeffs, m)) {
            return Err(SchemeError::AnnihilationFailed { set });
        }
        Ok(Self {
            field,
            original: pattern.clone(),
            pattern: truncated,
            x,
            t,
            l,
            points,
            coeffs,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// The truncated pattern actually used by the scheme.
    pub fn pattern(&self) -> &StoragePattern {
        &self.pattern
    }

    pub fn original_pattern(&self) -> &StoragePattern {
        &self.original
    }

    pub fn n_servers(&self) -> usize {
        self.pattern.n_servers()
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Symbols per message (`rho_min - X - T`), also the number of symbols
    /// decoded per run.
    pub fn block_length(&self) -> usize {
        self.l
    }

    pub fn points(&self) -> &EvaluationPoints {
        &self.points
    }

    pub fn coeffs(&self) -> &GrsCoefficients {
        &self.coeffs
    }

    pub fn supports_compute(&self) -> bool {
        self.x == 0 && self.pattern.rho_min() == self.t + 1
    }

    /// `sum_{n in R_m} v_{m,n} / (1 + beta_n)`.
    pub fn normalizer(&self, m: usize) -> FieldElement {
        normalizer_of(&self.points, &self.pattern, m)
    }

    /// `(l + beta_n)` for 1-based `l` and server `n`.
    fn shift(&self, l: usize, n: usize) -> FieldElement {
        self.field.elem(l as u64) + self.points.beta(n)
    }

    fn counts(&self) -> Vec<usize> {
        self.pattern.sets().iter().map(|s| s.count).collect()
    }
}

fn normalizer_of(points: &EvaluationPoints, pattern: &StoragePattern, m: usize) -> FieldElement {
    let field = points.field();
    let one = field.one();
    let servers = &pattern.set(m).servers;
    let betas: Vec<FieldElement> = servers.iter().map(|&n| points.beta(n)).collect();
    let v = crate::grscoef::lagrange_weights(&betas).expect("distinct points");
    betas
        .iter()
        .zip(v)
        .fold(field.zero(), |acc, (b, v)| acc + v * (one + *b).inv().expect("beta_n + 1 != 0"))
}

/// Message symbols, indexed `[m][l - 1][k]`: row `l` of set `m` holds the
/// `l`-th symbol of each of its `K_m` messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageStore {
    field: PrimeField,
    rows: Vec<Vec<Vec<FieldElement>>>,
}

impl MessageStore {
    pub fn from_fn<F>(field: PrimeField, counts: &[usize], l: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize) -> FieldElement,
    {
        let rows = counts
            .iter()
            .enumerate()
            .map(|(m, &k)| (1..=l).map(|ll| (0..k).map(|kk| f(m, kk, ll)).collect()).collect())
            .collect();
        Self { field, rows }
    }

    pub fn zeros(instance: &SchemeInstance) -> Self {
        let zero = instance.field.zero();
        Self::from_fn(instance.field, &instance.counts(), instance.l, |_, _, _| zero)
    }

    pub fn random<R: Rng>(instance: &SchemeInstance, rng: &mut R) -> Self {
        let f = instance.field;
        Self::from_fn(f, &instance.counts(), instance.l, |_, _, _| {
            f.elem(rng.random_range(0..f.modulus()))
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// `W_{m,(l)}` for 1-based `l`.
    pub fn row(&self, m: usize, l: usize) -> &[FieldElement] {
        &self.rows[m][l - 1]
    }

    pub fn row_mut(&mut self, m: usize, l: usize) -> &mut Vec<FieldElement> {
        &mut self.rows[m][l - 1]
    }

    /// `W_{m,k}(l)`, with 0-based `k` and 1-based `l`.
    pub fn symbol(&self, m: usize, k: usize, l: usize) -> FieldElement {
        self.rows[m][l - 1][k]
    }

    /// All `L` symbols of message `(m, k)`.
    pub fn message(&self, m: usize, k: usize) -> Vec<FieldElement> {
        self.rows[m].iter().map(|row| row[k]).collect()
    }

    pub fn n_sets(&self) -> usize {
        self.rows.len()
    }

    pub fn block_length(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    fn check_shape(&self, counts: &[usize], l: usize) -> Result<(), SchemeError> {
        let ok = self.rows.len() == counts.len()
            && self
                .rows
                .iter()
                .zip(counts)
                .all(|(rows, &k)| rows.len() == l && rows.iter().all(|r| r.len() == k));
        if ok {
            Ok(())
        } else {
            Err(SchemeError::Shape("message store does not match the pattern".into()))
        }
    }
}

/// Noise vectors indexed `[m][j - 1][l - 1][k]`, with `j` ranging over
/// `1..=X` (storage) or `1..=T` (queries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseVectors {
    data: Vec<Vec<Vec<Vec<FieldElement>>>>,
}

impl NoiseVectors {
    pub fn from_fn<F>(counts: &[usize], depth: usize, l: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize, usize) -> FieldElement,
    {
        let data = counts
            .iter()
            .enumerate()
            .map(|(m, &k)| {
                (1..=depth)
                    .map(|j| (1..=l).map(|ll| (0..k).map(|kk| f(m, j, ll, kk)).collect()).collect())
                    .collect()
            })
            .collect();
        Self { data }
    }

    pub fn zeros(field: PrimeField, counts: &[usize], depth: usize, l: usize) -> Self {
        Self::from_fn(counts, depth, l, |_, _, _, _| field.zero())
    }

    pub fn get(&self, m: usize, j: usize, l: usize) -> &[FieldElement] {
        &self.data[m][j - 1][l - 1]
    }

    pub fn get_mut(&mut self, m: usize, j: usize, l: usize) -> &mut Vec<FieldElement> {
        &mut self.data[m][j - 1][l - 1]
    }

    pub fn depth(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }
}

/// Deterministic randomness for one transcript.
///
/// Every vector is drawn from its own ChaCha20 stream: the generator is
/// seeded with the 64-bit seed and the stream id is
/// `domain << 60 | role << 56 | m << 32 | j << 24 | l`, where role 1 is
/// storage noise `Z_{m,j,(l)}`, role 2 is query noise `Z'_{m,j,(l)}` and
/// role 3 is message content (`j = 0`). Entry `k` of the vector is the
/// `k`-th draw of `random_range(0..q)` on that stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseTape {
    seed: u64,
    domain: u8,
}

const ROLE_STORAGE: u64 = 1;
const ROLE_QUERY: u64 = 2;
const ROLE_MESSAGE: u64 = 3;

impl NoiseTape {
    pub fn new(seed: u64) -> Self {
        Self { seed, domain: 0 }
    }

    /// Independent tape for a sub-protocol (domain < 16).
    pub fn with_domain(seed: u64, domain: u8) -> Self {
        assert!(domain < 16);
        Self { seed, domain }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn vector(&self, field: PrimeField, role: u64, m: usize, j: usize, l: usize, len: usize) -> Vec<FieldElement> {
        let stream = (self.domain as u64) << 60 | role << 56 | (m as u64) << 32 | (j as u64) << 24 | l as u64;
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        (0..len)
            .map(|_| field.elem(rng.random_range(0..field.modulus())))
            .collect()
    }

    pub fn storage_noise(&self, instance: &SchemeInstance) -> NoiseVectors {
        let f = instance.field;
        let counts = instance.counts();
        NoiseVectors {
            data: counts
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    (1..=instance.x)
                        .map(|j| (1..=instance.l).map(|l| self.vector(f, ROLE_STORAGE, m, j, l, k)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn query_noise(&self, instance: &SchemeInstance) -> NoiseVectors {
        let f = instance.field;
        let counts = instance.counts();
        NoiseVectors {
            data: counts
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    (1..=instance.t)
                        .map(|j| (1..=instance.l).map(|l| self.vector(f, ROLE_QUERY, m, j, l, k)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn messages(&self, instance: &SchemeInstance) -> MessageStore {
        self.messages_for(instance.field, &instance.counts(), instance.l)
    }

    pub fn messages_for(&self, field: PrimeField, counts: &[usize], l: usize) -> MessageStore {
        MessageStore {
            field,
            rows: counts
                .iter()
                .enumerate()
                .map(|(m, &k)| (1..=l).map(|ll| self.vector(field, ROLE_MESSAGE, m, 0, ll, k)).collect())
                .collect(),
        }
    }
}

/// `S_n`: the shares held by one server, `[l - 1][k]` per stored set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ServerStorage {
    pub server: usize,
    #[serde(skip)]
    pub field: PrimeField,
    pub shares: BTreeMap<usize, Vec<Vec<FieldElement>>>,
}

/// `Q_n`: one vector per stored set and symbol index, `[l - 1][k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    pub server: usize,
    pub vectors: BTreeMap<usize, Vec<Vec<FieldElement>>>,
}

impl Query {
    /// Flat view in (m, l, k) order, used for fingerprints and views.
    pub fn flatten(&self) -> Vec<u64> {
        self.vectors.values().flatten().flatten().map(FieldElement::value).collect()
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Demand {
    /// Message `index` (0-based) of message set `set` (0-based).
    Retrieve { set: usize, index: usize },
    /// `sum_m <W_{m,(1)}, lambda_m>`.
    Compute { lambda: Vec<Vec<FieldElement>> },
}

/// Secret-shares every stored row:
/// `W^{(n)}_{m,(l)} = W_{m,(l)} + sum_x (l + beta_n)^x Z_{m,x,(l)}`.
pub fn encode_storage(
    instance: &SchemeInstance,
    messages: &MessageStore,
    noise: &NoiseVectors,
) -> Result<Vec<ServerStorage>, SchemeError> {
    messages.check_shape(&instance.counts(), instance.l)?;
    if noise.data.len() != instance.pattern.n_sets() || noise.depth() != instance.x && instance.pattern.n_sets() > 0 {
        return Err(SchemeError::Shape("storage noise does not match X".into()));
    }
    let f = instance.field;
    Ok(instance
        .pattern
        .servers()
        .map(|n| {
            let shares = instance
                .pattern
                .server_index(n)
                .into_iter()
                .map(|m| {
                    let rows = (1..=instance.l)
                        .map(|l| {
                            let shift = instance.shift(l, n);
                            let mut row = messages.row(m, l).to_vec();
                            for x in 1..=instance.x {
                                let c = shift.pow(x as u64);
                                for (w, z) in row.iter_mut().zip(noise.get(m, x, l)) {
                                    *w = *w + c * *z;
                                }
                            }
                            row
                        })
                        .collect();
                    (m, rows)
                })
                .collect();
            ServerStorage { server: n, field: f, shares }
        })
        .collect())
}

/// Demand vectors `F_m`, one per message set.
fn demand_vectors(instance: &SchemeInstance, demand: &Demand) -> Result<Vec<Vec<FieldElement>>, SchemeError> {
    let f = instance.field;
    let counts = instance.counts();
    match demand {
        Demand::Retrieve { set, index } => {
            if *set >= counts.len() || *index >= counts[*set] {
                return Err(SchemeError::UnknownMessage {
                    set: *set,
                    index: *index,
                });
            }
            Ok(counts
                .iter()
                .enumerate()
                .map(|(m, &k)| {
                    (0..k)
                        .map(|kk| if m == *set && kk == *index { f.one() } else { f.zero() })
                        .collect()
                })
                .collect())
        }
        Demand::Compute { lambda } => {
            if !instance.supports_compute() {
                return Err(SchemeError::ComputeModeUnavailable {
                    x: instance.x,
                    t: instance.t,
                    rho_min: instance.pattern.rho_min(),
                });
            }
            if lambda.len() != counts.len() || lambda.iter().zip(&counts).any(|(l, &k)| l.len() != k) {
                return Err(SchemeError::Shape("lambda does not match the pattern".into()));
            }
            lambda
                .iter()
                .enumerate()
                .map(|(m, lam)| {
                    let scale = instance.normalizer(m).inv().map_err(|_| SchemeError::ZeroNormalizer { set: m })?;
                    Ok(lam.iter().map(|v| scale * *v).collect())
                })
                .collect()
        }
    }
}

/// `Q_{m,n,(l)} = v_{m,n} / (l + beta_n) · (F_m + sum_t (l + beta_n)^t Z'_{m,t,(l)})`.
pub fn gen_queries(instance: &SchemeInstance, demand: &Demand, noise: &NoiseVectors) -> Result<Vec<Query>, SchemeError> {
    let demand_vecs = demand_vectors(instance, demand)?;
    if noise.data.len() != instance.pattern.n_sets() || noise.depth() != instance.t && instance.pattern.n_sets() > 0 {
        return Err(SchemeError::Shape("query noise does not match T".into()));
    }
    Ok(instance
        .pattern
        .servers()
        .map(|n| {
            let vectors = instance
                .pattern
                .server_index(n)
                .into_iter()
                .map(|m| {
                    let v = instance.coeffs.get(m, n).expect("n in R_m");
                    let rows = (1..=instance.l)
                        .map(|l| {
                            let shift = instance.shift(l, n);
                            let mut row = demand_vecs[m].clone();
                            for t in 1..=instance.t {
                                let c = shift.pow(t as u64);
                                for (q, z) in row.iter_mut().zip(noise.get(m, t, l)) {
                                    *q = *q + c * *z;
                                }
                            }
                            let scale = v * shift.inv().expect("l + beta_n != 0");
                            row.into_iter().map(|e| scale * e).collect()
                        })
                        .collect();
                    (m, rows)
                })
                .collect();
            Query { server: n, vectors }
        })
        .collect())
}

/// `A_n = sum_l sum_{m in M_n} <W^{(n)}_{m,(l)}, Q_{m,n,(l)}>`. Depends on
/// nothing but the server's own storage and its own query.
pub fn answer(storage: &ServerStorage, query: &Query) -> Result<FieldElement, SchemeError> {
    if storage.server != query.server {
        return Err(SchemeError::ServerMismatch {
            storage: storage.server,
            query: query.server,
        });
    }
    if storage.shares.len() != query.vectors.len() {
        return Err(SchemeError::Shape(format!("server {}: query covers other sets", storage.server)));
    }
    let zero = storage.field.zero();
    let mut acc = zero;
    for (m, rows) in &storage.shares {
        let qrows = query
            .vectors
            .get(m)
            .ok_or_else(|| SchemeError::Shape(format!("server {}: no query for set {m}", storage.server)))?;
        if qrows.len() != rows.len() {
            return Err(SchemeError::Shape(format!("server {}: block length differs", storage.server)));
        }
        for (w, q) in rows.iter().zip(qrows) {
            if w.len() != q.len() {
                return Err(SchemeError::Shape(format!("server {}: vector length differs", storage.server)));
            }
            acc = acc + dot(zero, w, q);
        }
    }
    Ok(acc)
}

fn check_answers(instance: &SchemeInstance, answers: &[FieldElement]) -> Result<(), SchemeError> {
    if answers.len() != instance.n_servers() {
        return Err(SchemeError::Shape(format!(
            "{} answers for {} servers",
            answers.len(),
            instance.n_servers()
        )));
    }
    Ok(())
}

/// Recovers `W_{mu,kappa}(1..=L)` from the `N` answers (indexed by server
/// id minus one).
pub fn decode(instance: &SchemeInstance, answers: &[FieldElement], demand_set: usize) -> Result<Vec<FieldElement>, SchemeError> {
    check_answers(instance, answers)?;
    let f = instance.field;
    let l = instance.l;
    let betas = instance.points.betas();
    let y: Vec<FieldElement> = (0..l)
        .map(|i| {
            betas
                .iter()
                .zip(answers)
                .fold(f.zero(), |acc, (b, a)| acc + b.pow(i as u64) * *a)
        })
        .collect();
    let servers = &instance
        .pattern
        .sets()
        .get(demand_set)
        .ok_or(SchemeError::UnknownMessage {
            set: demand_set,
            index: 0,
        })?
        .servers;
    let r_betas: Vec<FieldElement> = servers.iter().map(|&n| instance.points.beta(n)).collect();
    let a = FieldMatrix::vandermonde(f, &r_betas, l);
    let mut b = FieldMatrix::zeros(f, servers.len(), l);
    for (row, &n) in servers.iter().enumerate() {
        let v = instance.coeffs.get(demand_set, n).expect("n in R_mu");
        for col in 0..l {
            b.set(row, col, v * instance.shift(col + 1, n).inv()?);
        }
    }
    let ab = a.mul(&b)?;
    let inv = ab.invert().map_err(|_| SchemeError::SingularDecode)?;
    Ok(inv.mul_vec(&y)?)
}

/// `Y_1 = sum_n A_n`, which equals `lambda(W)` in computation mode.
pub fn decode_compute(instance: &SchemeInstance, answers: &[FieldElement]) -> Result<FieldElement, SchemeError> {
    check_answers(instance, answers)?;
    Ok(answers.iter().fold(instance.field.zero(), |a, b| a + *b))
}

/// Plaintext evaluation of `sum_m <W_{m,(1)}, lambda_m>`.
pub fn evaluate_lambda(messages: &MessageStore, lambda: &[Vec<FieldElement>]) -> FieldElement {
    let zero = messages.field.zero();
    lambda
        .iter()
        .enumerate()
        .fold(zero, |acc, (m, lam)| acc + dot(zero, messages.row(m, 1), lam))
}

/// Everything exchanged in one run, in the form exported to JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub seed: u64,
    pub q: u64,
    pub n_servers: usize,
    pub x: usize,
    pub t: usize,
    pub block_length: usize,
    pub betas: Vec<FieldElement>,
    pub queries: Vec<Query>,
    pub answers: Vec<FieldElement>,
    pub decoded: Vec<FieldElement>,
}

/// Runs the whole protocol in-process from a single seed.
pub fn run_protocol(
    instance: &SchemeInstance,
    messages: &MessageStore,
    demand: &Demand,
    tape: NoiseTape,
) -> Result<Transcript, SchemeError> {
    let storage = encode_storage(instance, messages, &tape.storage_noise(instance))?;
    let queries = gen_queries(instance, demand, &tape.query_noise(instance))?;
    let answers = storage
        .iter()
        .zip(&queries)
        .map(|(s, q)| answer(s, q))
        .collect::<Result<Vec<_>, _>>()?;
    let decoded = match demand {
        Demand::Retrieve { set, .. } => decode(instance, &answers, *set)?,
        Demand::Compute { .. } => vec![decode_compute(instance, &answers)?],
    };
    Ok(Transcript {
        seed: tape.seed(),
        q: instance.field.modulus(),
        n_servers: instance.n_servers(),
        x: instance.x,
        t: instance.t,
        block_length: instance.l,
        betas: instance.points.betas().to_vec(),
        queries,
        answers,
        decoded,
    })
}

/// Composite scheme for `X = 0` and `rho_m in {T+1, T+2}`.
///
/// Servers in the stable set `U` are dropped. Sets that lose a replica to
/// `U`, together with the `(T+1)`-replicated sets, are handed to a virtual
/// genie server. Every set is then `(T+2)`-replicated and the base scheme
/// retrieves `L = 2` symbols. The genie's answer is a linear combination of
/// its content; the user obtains it through the private computation scheme
/// run over `N(U) ∪ N_{T+1}`, where each `(m, l)` row of a genie set becomes
/// one unit-length message set of the inner instance.
#[derive(Debug, Clone)]
pub struct CompositePlan {
    pattern: StoragePattern,
    t: usize,
    stable_set: BTreeSet<usize>,
    outer_servers: Vec<usize>,
    genie_sets: Vec<usize>,
    outer: SchemeInstance,
    inner: Option<InnerPlan>,
}

#[derive(Debug, Clone)]
struct InnerPlan {
    servers: Vec<usize>,
    /// Inner message set index -> (outer set m, symbol index l).
    pieces: Vec<(usize, usize)>,
    instance: SchemeInstance,
}

/// Per real server: what it stores for the outer and the inner scheme.
/// Both are derived from `S_n` alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeStorage {
    pub server: usize,
    pub outer: Option<ServerStorage>,
    pub inner: Option<ServerStorage>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeQueries {
    /// Indexed like `outer_servers`.
    pub outer: Vec<Query>,
    /// Indexed like `inner_servers`.
    pub inner: Vec<Query>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositeTranscript {
    pub stable_set: Vec<usize>,
    pub outer_servers: Vec<usize>,
    pub inner_servers: Vec<usize>,
    /// Symbols downloaded from each real server, indexed by id minus one.
    pub downloads: Vec<usize>,
    pub total_download: usize,
    pub decoded: Vec<FieldElement>,
}

impl CompositePlan {
    /// Uses the minimizing stable set of the `nu_2` formula when `stable_set`
    /// is `None`.
    pub fn new(
        pattern: &StoragePattern,
        t: usize,
        q: Option<u64>,
        stable_set: Option<BTreeSet<usize>>,
    ) -> Result<Self, SchemeError> {
        if let Some(m) = (0..pattern.n_sets()).find(|&m| pattern.rho(m) != t + 1 && pattern.rho(m) != t + 2) {
            return Err(SchemeError::PreconditionViolated(format!(
                "message set {m} is replicated {} times, expected {} or {}",
                pattern.rho(m),
                t + 1,
                t + 2
            )));
        }
        let (high, _low) = pattern.replication_tiers(t);
        let graph = pattern.storage_graph();
        let high_graph = graph.induced(&high);
        let u = match stable_set {
            Some(u) => {
                if !u.is_subset(&high) || !high_graph.is_stable(&u) {
                    return Err(SchemeError::PreconditionViolated(
                        "U must be a stable set of G[N_{T+2}]".into(),
                    ));
                }
                u
            }
            None => nu2(&high_graph)?.stable_set,
        };

        let outer_servers: Vec<usize> = pattern.servers().filter(|n| !u.contains(n)).collect();
        let outer_id: BTreeMap<usize, usize> = outer_servers.iter().enumerate().map(|(i, &n)| (n, i + 1)).collect();
        let genie_sets: Vec<usize> = (0..pattern.n_sets())
            .filter(|&m| pattern.rho(m) == t + 1 || pattern.set(m).servers.iter().any(|n| u.contains(n)))
            .collect();
        let genie = outer_servers.len() + 1;
        let outer_n = outer_servers.len() + usize::from(!genie_sets.is_empty());
        let outer_sets = pattern
            .sets()
            .iter()
            .enumerate()
            .map(|(m, s)| {
                let mut servers: Vec<usize> = s.servers.iter().filter_map(|n| outer_id.get(n).copied()).collect();
                if genie_sets.contains(&m) {
                    servers.push(genie);
                }
                MessageSet {
                    count: s.count,
                    servers,
                }
            })
            .collect();
        let outer_pattern = StoragePattern::new(outer_n, outer_sets)?;
        let outer = SchemeInstance::build(&outer_pattern, 0, t, q)?;

        let inner = if genie_sets.is_empty() {
            None
        } else {
            let servers: BTreeSet<usize> = genie_sets
                .iter()
                .flat_map(|&m| pattern.set(m).servers.iter().copied())
                .filter(|n| !u.contains(n))
                .collect();
            let servers: Vec<usize> = servers.into_iter().collect();
            let inner_id: BTreeMap<usize, usize> = servers.iter().enumerate().map(|(i, &n)| (n, i + 1)).collect();
            let mut pieces = Vec::new();
            let mut sets = Vec::new();
            for &m in &genie_sets {
                for l in 1..=outer.block_length() {
                    pieces.push((m, l));
                    sets.push(MessageSet {
                        count: pattern.set(m).count,
                        servers: pattern.set(m).servers.iter().filter_map(|n| inner_id.get(n).copied()).collect(),
                    });
                }
            }
            let inner_pattern = StoragePattern::new(servers.len(), sets)?;
            let instance = SchemeInstance::build(&inner_pattern, 0, t, Some(outer.field().modulus()))?;
            Some(InnerPlan {
                servers,
                pieces,
                instance,
            })
        };

        Ok(Self {
            pattern: pattern.clone(),
            t,
            stable_set: u,
            outer_servers,
            genie_sets,
            outer,
            inner,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn stable_set(&self) -> &BTreeSet<usize> {
        &self.stable_set
    }

    pub fn outer_servers(&self) -> &[usize] {
        &self.outer_servers
    }

    pub fn inner_servers(&self) -> &[usize] {
        self.inner.as_ref().map_or(&[], |i| &i.servers)
    }

    /// Message sets held by the virtual genie server.
    pub fn genie_sets(&self) -> &[usize] {
        &self.genie_sets
    }

    pub fn outer_instance(&self) -> &SchemeInstance {
        &self.outer
    }

    pub fn inner_instance(&self) -> Option<&SchemeInstance> {
        self.inner.as_ref().map(|i| &i.instance)
    }

    pub fn field(&self) -> PrimeField {
        self.outer.field()
    }

    pub fn block_length(&self) -> usize {
        self.outer.block_length()
    }

    pub fn total_download(&self) -> usize {
        self.outer_servers.len() + self.inner_servers().len()
    }

    pub fn messages(&self, tape: NoiseTape) -> MessageStore {
        let counts: Vec<usize> = self.pattern.sets().iter().map(|s| s.count).collect();
        tape.messages_for(self.field(), &counts, self.block_length())
    }

    /// Plain `S_n` (no secret sharing since `X = 0`).
    pub fn plain_storage(&self, messages: &MessageStore) -> Vec<ServerStorage> {
        self.pattern
            .servers()
            .map(|n| ServerStorage {
                server: n,
                field: self.field(),
                shares: self
                    .pattern
                    .server_index(n)
                    .into_iter()
                    .map(|m| (m, (1..=self.block_length()).map(|l| messages.row(m, l).to_vec()).collect()))
                    .collect(),
            })
            .collect()
    }

    /// Derives a server's outer and inner storage from its own `S_n`.
    pub fn split_storage(&self, plain: &ServerStorage) -> CompositeStorage {
        let n = plain.server;
        let outer = self.outer_servers.iter().position(|&s| s == n).map(|i| ServerStorage {
            server: i + 1,
            field: plain.field,
            shares: plain.shares.clone(),
        });
        let inner = self.inner.as_ref().and_then(|inner| {
            let idx = inner.servers.iter().position(|&s| s == n)?;
            let shares = inner
                .pieces
                .iter()
                .enumerate()
                .filter_map(|(p, &(m, l))| plain.shares.get(&m).map(|rows| (p, vec![rows[l - 1].clone()])))
                .collect();
            Some(ServerStorage {
                server: idx + 1,
                field: plain.field,
                shares,
            })
        });
        CompositeStorage { server: n, outer, inner }
    }

    /// Outer queries, plus the genie's query turned into inner computation
    /// queries.
    pub fn queries(&self, demand_set: usize, demand_index: usize, tape: NoiseTape) -> Result<CompositeQueries, SchemeError> {
        let demand = Demand::Retrieve {
            set: demand_set,
            index: demand_index,
        };
        let outer_tape = NoiseTape::with_domain(tape.seed(), 1);
        let mut outer = gen_queries(&self.outer, &demand, &outer_tape.query_noise(&self.outer))?;
        let inner = match &self.inner {
            None => Vec::new(),
            Some(inner) => {
                let genie_query = outer.pop().expect("genie present");
                let lambda: Vec<Vec<FieldElement>> = inner
                    .pieces
                    .iter()
                    .map(|&(m, l)| genie_query.vectors[&m][l - 1].clone())
                    .collect();
                let inner_tape = NoiseTape::with_domain(tape.seed(), 2);
                gen_queries(
                    &inner.instance,
                    &Demand::Compute { lambda },
                    &inner_tape.query_noise(&inner.instance),
                )?
            }
        };
        Ok(CompositeQueries { outer, inner })
    }

    /// Decodes the two symbols from the real servers' outer and inner answers.
    pub fn decode(
        &self,
        outer_answers: &[FieldElement],
        inner_answers: &[FieldElement],
        demand_set: usize,
    ) -> Result<Vec<FieldElement>, SchemeError> {
        let mut answers = outer_answers.to_vec();
        if let Some(inner) = &self.inner {
            answers.push(decode_compute(&inner.instance, inner_answers)?);
        }
        decode(&self.outer, &answers, demand_set)
    }

    /// Runs the composite scheme in-process.
    pub fn run(
        &self,
        messages: &MessageStore,
        demand_set: usize,
        demand_index: usize,
        tape: NoiseTape,
    ) -> Result<CompositeTranscript, SchemeError> {
        let split: Vec<CompositeStorage> = self
            .plain_storage(messages)
            .iter()
            .map(|s| self.split_storage(s))
            .collect();
        let queries = self.queries(demand_set, demand_index, tape)?;
        let mut downloads = vec![0; self.pattern.n_servers()];
        let mut outer_answers = Vec::new();
        for (i, &n) in self.outer_servers.iter().enumerate() {
            let storage = split[n - 1].outer.as_ref().expect("outer server");
            outer_answers.push(answer(storage, &queries.outer[i])?);
            downloads[n - 1] += 1;
        }
        let mut inner_answers = Vec::new();
        for (i, &n) in self.inner_servers().iter().enumerate() {
            let storage = split[n - 1].inner.as_ref().expect("inner server");
            inner_answers.push(answer(storage, &queries.inner[i])?);
            downloads[n - 1] += 1;
        }
        let decoded = self.decode(&outer_answers, &inner_answers, demand_set)?;
        Ok(CompositeTranscript {
            stable_set: self.stable_set.iter().copied().collect(),
            outer_servers: self.outer_servers.clone(),
            inner_servers: self.inner_servers().to_vec(),
            total_download: downloads.iter().sum(),
            downloads,
            decoded,
        })
    }
}

/// Composite retrieval with messages drawn from the seed.
pub fn theorem3_retrieve(
    pattern: &StoragePattern,
    t: usize,
    demand_set: usize,
    demand_index: usize,
    seed: u64,
) -> Result<(CompositeTranscript, MessageStore), SchemeError> {
    let plan = CompositePlan::new(pattern, t, None, None)?;
    let tape = NoiseTape::new(seed);
    let messages = plan.messages(tape);
    let transcript = plan.run(&messages, demand_set, demand_index, tape)?;
    Ok((transcript, messages))
}
