//! In-process session harness. Every server is an actor that owns only its
//! storage and sees only the queries addressed to it; the user actor sends
//! queries, collects one symbol per query and decodes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::capacity::{capacity_report, format_rational, rational, CapacityError};
use crate::catalog::{catalog, NamedPattern};
use crate::ff::FieldElement;
use crate::model::{PatternDocument, PatternError, StoragePattern};
use crate::scheme::{
    answer, decode, decode_compute, encode_storage, evaluate_lambda, gen_queries, CompositePlan, Demand, NoiseTape,
    Query, SchemeError, SchemeInstance, ServerStorage,
};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("cannot parse {source_name} at {path}: {message}")]
    Parse {
        source_name: String,
        path: String,
        message: String,
    },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("invalid session config: {0}")]
    Config(String),
}

impl SessionError {
    /// Configuration or protocol preconditions, as opposed to I/O and parsing.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Self::Parse { .. } | Self::Io { .. } | Self::Pattern(PatternError::Parse { .. }))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> SessionError {
    SessionError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Retrieve,
    Compute,
    Theorem3,
}

/// Demand in a config; message positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemandSpec {
    Retrieve { set: usize, index: usize },
    Compute { lambda: Vec<Vec<u64>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternDocument>,
    /// Relative paths are resolved against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<DemandSpec>,
}

/// Pattern and parameters after resolving a config.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub pattern: StoragePattern,
    pub x: usize,
    pub t: usize,
    pub q: Option<u64>,
    pub seed: u64,
    pub mode: Mode,
    pub demand: Option<DemandSpec>,
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, source_name: &str) -> Result<T, SessionError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| SessionError::Parse {
        source_name: source_name.to_string(),
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_pattern_document(path: &Path) -> Result<PatternDocument, SessionError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_json(&text, &path.display().to_string())
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        parse_json(text, "session config")
    }

    pub fn from_file(path: &Path) -> Result<(Self, PathBuf), SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let cfg = parse_json(&text, &path.display().to_string())?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedConfig, SessionError> {
        let doc = match (&self.pattern, &self.pattern_path) {
            (Some(doc), None) => doc.clone(),
            (None, Some(p)) => read_pattern_document(&base_dir.join(p))?,
            _ => {
                return Err(SessionError::Config(
                    "exactly one of `pattern` and `pattern_path` is required".into(),
                ))
            }
        };
        Ok(ResolvedConfig {
            pattern: doc.pattern()?,
            x: self.x.unwrap_or(doc.x),
            t: self.t.unwrap_or(doc.t),
            q: self.q.or(doc.q),
            seed: self.seed,
            mode: self.mode,
            demand: self.demand.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// One thread per server actor.
    #[default]
    Threaded,
    Sequential,
}

/// Which scheme a query belongs to; the composite scheme sends two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Base,
    Outer,
    Inner,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Request {
    pub role: Role,
    pub query: Query,
}

/// What a server actor received, recorded by the actor itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActorLog {
    pub server: usize,
    pub storage: BTreeMap<Role, ServerStorage>,
    pub requests: Vec<Request>,
}

struct ServerActor {
    server: usize,
    storage: BTreeMap<Role, ServerStorage>,
    log: Vec<Request>,
}

impl ServerActor {
    fn handle(&mut self, req: Request) -> Result<FieldElement, SchemeError> {
        let storage = self
            .storage
            .get(&req.role)
            .ok_or_else(|| SchemeError::Shape(format!("server {} holds no {:?} storage", self.server, req.role)))?;
        let a = answer(storage, &req.query);
        self.log.push(req);
        a
    }

    fn into_log(self) -> ActorLog {
        ActorLog {
            server: self.server,
            storage: self.storage,
            requests: self.log,
        }
    }
}

/// Delivers `requests[i]` to actor `i` and returns the answers in the same
/// shape, plus the actors' logs.
fn exchange(
    actors: Vec<ServerActor>,
    requests: Vec<Vec<Request>>,
    scheduler: Scheduler,
) -> Result<(Vec<Vec<FieldElement>>, Vec<ActorLog>), SchemeError> {
    match scheduler {
        Scheduler::Sequential => {
            let mut answers = Vec::with_capacity(actors.len());
            let mut logs = Vec::with_capacity(actors.len());
            for (mut actor, reqs) in actors.into_iter().zip(requests) {
                answers.push(reqs.into_iter().map(|r| actor.handle(r)).collect::<Result<Vec<_>, _>>()?);
                logs.push(actor.into_log());
            }
            Ok((answers, logs))
        }
        Scheduler::Threaded => {
            let (reply_tx, reply_rx) = mpsc::channel();
            let mut inboxes = Vec::with_capacity(actors.len());
            let mut handles = Vec::with_capacity(actors.len());
            for (i, mut actor) in actors.into_iter().enumerate() {
                let (tx, rx) = mpsc::channel::<(usize, Request)>();
                let reply_tx = reply_tx.clone();
                inboxes.push(tx);
                handles.push(thread::spawn(move || {
                    for (slot, req) in rx {
                        let a = actor.handle(req);
                        if reply_tx.send((i, slot, a)).is_err() {
                            break;
                        }
                    }
                    actor.into_log()
                }));
            }
            drop(reply_tx);
            let mut answers: Vec<Vec<Option<FieldElement>>> = requests.iter().map(|r| vec![None; r.len()]).collect();
            let mut expected = 0;
            for (inbox, reqs) in inboxes.iter().zip(requests) {
                for (slot, req) in reqs.into_iter().enumerate() {
                    inbox.send((slot, req)).expect("actor alive");
                    expected += 1;
                }
            }
            drop(inboxes);
            let mut first_error = None;
            for (i, slot, a) in reply_rx.iter().take(expected) {
                match a {
                    Ok(v) => answers[i][slot] = Some(v),
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
            }
            let logs = handles
                .into_iter()
                .map(|h| h.join().expect("server actor panicked"))
                .collect();
            if let Some(e) = first_error {
                return Err(e);
            }
            let answers = answers
                .into_iter()
                .map(|v| v.into_iter().map(|a| a.expect("every request answered")).collect())
                .collect();
            Ok((answers, logs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub mode: Mode,
    pub scheduler: Scheduler,
    pub seed: u64,
    pub q: u64,
    pub n_servers: usize,
    pub x: usize,
    pub t: usize,
    pub decoded: Vec<FieldElement>,
    pub expected: Vec<FieldElement>,
    pub correct: bool,
    /// Symbols downloaded per server, indexed by server id minus one.
    pub downloads: Vec<usize>,
    pub total_download: usize,
    pub rate: String,
    pub transcript_hash: String,
    /// Wall-clock time; not part of the transcript hash.
    pub elapsed_micros: u128,
}

impl SessionReport {
    /// Everything but the scheduler and the timing.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self {
            scheduler: Scheduler::Sequential,
            elapsed_micros: 0,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

#[derive(Serialize)]
struct HashedTranscript<'a> {
    mode: Mode,
    seed: u64,
    q: u64,
    requests: &'a [Vec<Request>],
    answers: &'a [Vec<FieldElement>],
    decoded: &'a [FieldElement],
}

fn transcript_hash(t: &HashedTranscript<'_>) -> String {
    let bytes = serde_json::to_vec(t).expect("transcript serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_session(config: &ResolvedConfig, scheduler: Scheduler) -> Result<SessionReport, SessionError> {
    run_session_logged(config, scheduler).map(|(r, _)| r)
}

/// Also returns what each server actor received.
pub fn run_session_logged(
    config: &ResolvedConfig,
    scheduler: Scheduler,
) -> Result<(SessionReport, Vec<ActorLog>), SessionError> {
    let start = Instant::now();
    let outcome = match config.mode {
        Mode::Retrieve | Mode::Compute => run_base(config, scheduler)?,
        Mode::Theorem3 => run_composite(config, scheduler)?,
    };
    let total: usize = outcome.downloads.iter().sum();
    let rate = if total == 0 {
        num_rational::BigRational::zero()
    } else {
        rational(outcome.decoded.len() as i64, total as i64)
    };
    let hash = transcript_hash(&HashedTranscript {
        mode: config.mode,
        seed: config.seed,
        q: outcome.q,
        requests: &outcome.requests,
        answers: &outcome.answers,
        decoded: &outcome.decoded,
    });
    let report = SessionReport {
        mode: config.mode,
        scheduler,
        seed: config.seed,
        q: outcome.q,
        n_servers: config.pattern.n_servers(),
        x: config.x,
        t: config.t,
        correct: outcome.decoded == outcome.expected,
        decoded: outcome.decoded,
        expected: outcome.expected,
        downloads: outcome.downloads,
        total_download: total,
        rate: format_rational(&rate),
        transcript_hash: hash,
        elapsed_micros: start.elapsed().as_micros(),
    };
    Ok((report, outcome.logs))
}

struct Outcome {
    q: u64,
    requests: Vec<Vec<Request>>,
    answers: Vec<Vec<FieldElement>>,
    decoded: Vec<FieldElement>,
    expected: Vec<FieldElement>,
    downloads: Vec<usize>,
    logs: Vec<ActorLog>,
}

fn retrieve_target(demand: &Option<DemandSpec>, pattern: &StoragePattern) -> Result<(usize, usize), SessionError> {
    let (set, index) = match demand {
        None => (1, 1),
        Some(DemandSpec::Retrieve { set, index }) => (*set, *index),
        Some(DemandSpec::Compute { .. }) => {
            return Err(SessionError::Config("a lambda demand needs compute mode".into()))
        }
    };
    if set == 0 || set > pattern.n_sets() || index == 0 || index > pattern.set(set - 1).count {
        return Err(SessionError::Config(format!("no message ({set}, {index}) in the pattern")));
    }
    Ok((set - 1, index - 1))
}

fn run_base(config: &ResolvedConfig, scheduler: Scheduler) -> Result<Outcome, SessionError> {
    let instance = SchemeInstance::build(&config.pattern, config.x, config.t, config.q)?;
    let f = instance.field();
    let tape = NoiseTape::new(config.seed);
    let messages = tape.messages(&instance);
    let (demand, expected) = match config.mode {
        Mode::Compute => {
            let counts: Vec<usize> = instance.pattern().sets().iter().map(|s| s.count).collect();
            let lambda: Vec<Vec<FieldElement>> = match &config.demand {
                None => counts.iter().map(|&k| vec![f.one(); k]).collect(),
                Some(DemandSpec::Compute { lambda }) => lambda.iter().map(|r| r.iter().map(|&v| f.elem(v)).collect()).collect(),
                Some(DemandSpec::Retrieve { .. }) => {
                    return Err(SessionError::Config("compute mode needs a lambda demand".into()))
                }
            };
            let expected = if lambda.len() == counts.len() && lambda.iter().zip(&counts).all(|(l, &k)| l.len() == k) {
                vec![evaluate_lambda(&messages, &lambda)]
            } else {
                return Err(SchemeError::Shape("lambda does not match the pattern".into()).into());
            };
            (Demand::Compute { lambda }, expected)
        }
        _ => {
            let (set, index) = retrieve_target(&config.demand, instance.pattern())?;
            (Demand::Retrieve { set, index }, messages.message(set, index))
        }
    };
    let storage = encode_storage(&instance, &messages, &tape.storage_noise(&instance))?;
    let queries = gen_queries(&instance, &demand, &tape.query_noise(&instance))?;
    let actors = storage
        .into_iter()
        .map(|s| ServerActor {
            server: s.server,
            storage: BTreeMap::from([(Role::Base, s)]),
            log: Vec::new(),
        })
        .collect();
    let requests: Vec<Vec<Request>> = queries
        .into_iter()
        .map(|query| vec![Request { role: Role::Base, query }])
        .collect();
    let (answers, logs) = exchange(actors, requests.clone(), scheduler)?;
    let flat: Vec<FieldElement> = answers.iter().map(|a| a[0]).collect();
    let decoded = match &demand {
        Demand::Retrieve { set, .. } => decode(&instance, &flat, *set)?,
        Demand::Compute { .. } => vec![decode_compute(&instance, &flat)?],
    };
    Ok(Outcome {
        q: f.modulus(),
        requests,
        downloads: answers.iter().map(Vec::len).collect(),
        answers,
        decoded,
        expected,
        logs,
    })
}

fn run_composite(config: &ResolvedConfig, scheduler: Scheduler) -> Result<Outcome, SessionError> {
    if config.x != 0 {
        return Err(SchemeError::PreconditionViolated("the composite scheme needs X = 0".into()).into());
    }
    let plan = CompositePlan::new(&config.pattern, config.t, config.q, None)?;
    let (set, index) = retrieve_target(&config.demand, &config.pattern)?;
    let tape = NoiseTape::new(config.seed);
    let messages = plan.messages(tape);
    let queries = plan.queries(set, index, tape)?;
    let n = config.pattern.n_servers();

    let mut actors = Vec::with_capacity(n);
    for plain in plan.plain_storage(&messages) {
        let split = plan.split_storage(&plain);
        let mut storage = BTreeMap::new();
        if let Some(s) = split.outer {
            storage.insert(Role::Outer, s);
        }
        if let Some(s) = split.inner {
            storage.insert(Role::Inner, s);
        }
        actors.push(ServerActor {
            server: plain.server,
            storage,
            log: Vec::new(),
        });
    }
    let mut requests: Vec<Vec<Request>> = vec![Vec::new(); n];
    for (i, query) in queries.outer.into_iter().enumerate() {
        requests[plan.outer_servers()[i] - 1].push(Request { role: Role::Outer, query });
    }
    for (i, query) in queries.inner.into_iter().enumerate() {
        requests[plan.inner_servers()[i] - 1].push(Request { role: Role::Inner, query });
    }
    let (answers, logs) = exchange(actors, requests.clone(), scheduler)?;
    let pick = |role: Role, servers: &[usize]| -> Vec<FieldElement> {
        servers
            .iter()
            .map(|&s| {
                let slot = requests[s - 1].iter().position(|r| r.role == role).expect("request sent");
                answers[s - 1][slot]
            })
            .collect()
    };
    let outer_answers = pick(Role::Outer, plan.outer_servers());
    let inner_answers = pick(Role::Inner, plan.inner_servers());
    let decoded = plan.decode(&outer_answers, &inner_answers, set)?;
    Ok(Outcome {
        q: plan.field().modulus(),
        downloads: answers.iter().map(Vec::len).collect(),
        requests,
        answers,
        decoded,
        expected: messages.message(set, index),
        logs,
    })
}

/// Session recorded in each fixture.
fn fixture_sessions(named: &NamedPattern) -> Vec<ResolvedConfig> {
    let base = ResolvedConfig {
        pattern: named.pattern.clone(),
        x: named.x,
        t: named.t,
        q: None,
        seed: 2024,
        mode: Mode::Retrieve,
        demand: Some(DemandSpec::Retrieve { set: 1, index: 1 }),
    };
    let mut sessions = vec![base.clone()];
    if named.name == "example_5" || named.name == "example_6" {
        sessions.push(ResolvedConfig {
            mode: Mode::Theorem3,
            ..base
        });
    }
    sessions
}

/// Canonical JSON of one fixture: the pattern document, its capacity
/// report and the sessions replayed from fixed seeds.
pub fn fixture_value(named: &NamedPattern) -> Result<serde_json::Value, SessionError> {
    let doc = PatternDocument::from_pattern(&named.pattern, named.x, named.t, None);
    let report = capacity_report(&named.pattern, named.x, named.t)?;
    let sessions = fixture_sessions(named)
        .iter()
        .map(|cfg| {
            let r = run_session(cfg, Scheduler::Sequential)?;
            Ok(serde_json::json!({
                "mode": r.mode,
                "seed": r.seed,
                "demand": cfg.demand,
                "q": r.q,
                "decoded": r.decoded,
                "downloads": r.downloads,
                "total_download": r.total_download,
                "rate": r.rate,
                "transcript_hash": r.transcript_hash,
            }))
        })
        .collect::<Result<Vec<_>, SessionError>>()?;
    let mut value = serde_json::to_value(&doc).expect("document serializes");
    let obj = value.as_object_mut().expect("object");
    obj.insert("name".into(), named.name.into());
    obj.insert("expected_capacity".into(), serde_json::to_value(&report).expect("report serializes"));
    obj.insert("sessions".into(), sessions.into());
    Ok(value)
}

/// Writes one `<name>.json` per catalog pattern into `dir`.
pub fn regenerate_fixtures(dir: &Path) -> Result<Vec<PathBuf>, SessionError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut written = Vec::new();
    for named in catalog() {
        let path = dir.join(format!("{}.json", named.name));
        let mut text = serde_json::to_string_pretty(&fixture_value(&named)?).expect("json");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::by_name;

    fn config(name: &str, mode: Mode, t: usize) -> ResolvedConfig {
        ResolvedConfig {
            pattern: by_name(name).unwrap().pattern,
            x: 0,
            t,
            q: None,
            seed: 17,
            mode,
            demand: None,
        }
    }

    #[test]
    fn retrieval_session_example_2() {
        let r = run_session(&config("example_2", Mode::Retrieve, 1), Scheduler::Threaded).unwrap();
        assert!(r.correct);
        assert_eq!(r.rate, "2/5");
        assert_eq!(r.total_download, 5);
        assert_eq!(r.decoded.len(), 2);
    }

    #[test]
    fn composite_session_example_5() {
        let r = run_session(&config("example_5", Mode::Theorem3, 1), Scheduler::Threaded).unwrap();
        assert!(r.correct);
        assert_eq!(r.total_download, 7);
        assert_eq!(r.rate, "2/7");
    }

    #[test]
    fn computation_session() {
        let r = run_session(&config("example_2", Mode::Compute, 2), Scheduler::Threaded).unwrap();
        assert!(r.correct);
        assert_eq!(r.rate, "1/5");
        assert_eq!(r.downloads, vec![1; 5]);
        assert!(run_session(&config("example_2", Mode::Compute, 1), Scheduler::Sequential).is_err());
    }

    #[test]
    fn schedulers_agree() {
        for (name, mode) in [("example_3", Mode::Retrieve), ("example_6", Mode::Theorem3), ("example_1", Mode::Compute)] {
            let cfg = config(name, mode, if mode == Mode::Compute { 2 } else { 1 });
            let a = run_session(&cfg, Scheduler::Threaded).unwrap();
            let b = run_session(&cfg, Scheduler::Sequential).unwrap();
            let c = run_session(&cfg, Scheduler::Threaded).unwrap();
            assert!(a.same_outcome(&b) && a.same_outcome(&c), "{name}");
        }
        let mut other = config("example_3", Mode::Retrieve, 1);
        other.seed = 18;
        let a = run_session(&config("example_3", Mode::Retrieve, 1), Scheduler::Sequential).unwrap();
        let b = run_session(&other, Scheduler::Sequential).unwrap();
        assert_ne!(a.transcript_hash, b.transcript_hash);
    }

    #[test]
    fn actors_see_only_their_own_inputs() {
        let cfg = config("example_6", Mode::Retrieve, 1);
        let (_, logs) = run_session_logged(&cfg, Scheduler::Threaded).unwrap();
        let instance = SchemeInstance::build(&cfg.pattern, 0, 1, None).unwrap();
        let tape = NoiseTape::new(cfg.seed);
        let storage = encode_storage(&instance, &tape.messages(&instance), &tape.storage_noise(&instance)).unwrap();
        let queries = gen_queries(&instance, &Demand::Retrieve { set: 0, index: 0 }, &tape.query_noise(&instance)).unwrap();
        for log in &logs {
            let n = log.server;
            assert_eq!(serde_json::to_value(&log.storage).unwrap(), serde_json::json!({ "base": storage[n - 1] }));
            assert_eq!(log.requests.len(), 1);
            assert_eq!(log.requests[0].query, queries[n - 1]);
        }
    }

    #[test]
    fn config_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let doc = PatternDocument::from_pattern(&by_name("example_4").unwrap().pattern, 0, 1, None);
        std::fs::write(dir.path().join("p.json"), serde_json::to_string(&doc).unwrap()).unwrap();
        let cfg = SessionConfig::from_json(r#"{"pattern_path": "p.json", "seed": 3, "demand": {"set": 2, "index": 1}}"#).unwrap();
        let resolved = cfg.resolve(dir.path()).unwrap();
        assert_eq!(resolved.pattern.n_servers(), 5);
        let r = run_session(&resolved, Scheduler::Sequential).unwrap();
        assert_eq!(r.rate, "3/5");

        match SessionConfig::from_json(r#"{"seed": "x"}"#) {
            Err(SessionError::Parse { path, .. }) => assert_eq!(path, "seed"),
            other => panic!("{other:?}"),
        }
        let both = SessionConfig::from_json(r#"{"seed": 1}"#).unwrap();
        assert!(matches!(both.resolve(dir.path()), Err(SessionError::Config(_))));
        let bad = SessionConfig::from_json(r#"{"pattern_path": "p.json", "demand": {"set": 3, "index": 1}}"#).unwrap();
        let resolved = bad.resolve(dir.path()).unwrap();
        assert!(matches!(run_session(&resolved, Scheduler::Sequential), Err(SessionError::Config(_))));
    }

    #[test]
    fn fixture_contents() {
        let v = fixture_value(&by_name("example_1").unwrap()).unwrap();
        assert_eq!(v["expected_capacity"]["lower"], "1/2");
        assert_eq!(v["expected_capacity"]["matched"], true);
        let v = fixture_value(&by_name("sec2_running").unwrap()).unwrap();
        assert!(!v["expected_capacity"]["lower_witness"].as_array().unwrap().contains(&2.into()));
        let v = fixture_value(&by_name("example_6").unwrap()).unwrap();
        assert_eq!(v["expected_capacity"]["certificates"]["stable_set"], serde_json::json!([5, 6]));
        assert_eq!(v["expected_capacity"]["certificates"]["nu2"], 5);
        assert_eq!(v["sessions"][1]["total_download"], 9);
    }
}
