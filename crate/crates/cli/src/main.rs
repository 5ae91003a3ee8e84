use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gxstpir::capacity::{capacity_report_with, CapacityError, DEFAULT_ELIMINATION_CAP};
use gxstpir::simnet::{read_pattern_document, regenerate_fixtures, run_session, Scheduler, SessionConfig, SessionError};
use gxstpir::verify::{
    verify_correctness, verify_privacy_exhaustive, verify_privacy_structural, verify_security_exhaustive,
    EnumerationBudget, VerifyError, DEFAULT_MAX_STATES,
};
use gxstpir::{Execution, SchemeInstance};
use serde_json::json;

const EXIT_PRECONDITION: u8 = 2;
const EXIT_GUARANTEE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "gxstpir", version, about = "Secure private retrieval over replicated storage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact capacity bounds for a pattern document.
    Capacity {
        pattern: PathBuf,
        #[arg(long)]
        x: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Largest N for the exhaustive server-elimination search.
        #[arg(long, default_value_t = DEFAULT_ELIMINATION_CAP)]
        cap: usize,
        #[arg(long)]
        sequential: bool,
    },
    /// Run one session described by a config file.
    Simulate {
        config: PathBuf,
        /// Single-threaded scheduler instead of one thread per server.
        #[arg(long)]
        sequential: bool,
    },
    /// Check correctness, privacy and security of the configured instance.
    Verify {
        config: PathBuf,
        #[arg(long)]
        privacy: bool,
        #[arg(long)]
        security: bool,
        #[arg(long)]
        correctness: bool,
        /// Colluding servers, e.g. `1,3`. Defaults to the first T (privacy)
        /// or X (security) servers.
        #[arg(long, value_delimiter = ',')]
        colluders: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        budget: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Fixture maintenance.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// Rewrite the canonical fixture files.
    Regen {
        #[arg(long, default_value = "crates/core/fixtures")]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_IO };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CapacityError> for Failure {
    fn from(e: CapacityError) -> Self {
        Self {
            code: EXIT_PRECONDITION,
            message: e.to_string(),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        Self {
            code: EXIT_PRECONDITION,
            message: e.to_string(),
        }
    }
}

impl From<gxstpir::scheme::SchemeError> for Failure {
    fn from(e: gxstpir::scheme::SchemeError) -> Self {
        Self {
            code: EXIT_PRECONDITION,
            message: e.to_string(),
        }
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn capacity(pattern: &Path, x: Option<usize>, t: Option<usize>, cap: usize, sequential: bool) -> Result<u8, Failure> {
    let doc = read_pattern_document(pattern)?;
    let p = doc.pattern().map_err(SessionError::from)?;
    let (x, t) = (x.unwrap_or(doc.x), t.unwrap_or(doc.t));
    let report = capacity_report_with(&p, x, t, cap, execution(sequential))?;
    print_json(&serde_json::to_value(&report).expect("json"));
    eprintln!(
        "capacity bounds: {} <= C <= {} ({})",
        gxstpir::capacity::format_rational(&report.lower),
        gxstpir::capacity::format_rational(&report.upper),
        if report.matched { "matched" } else { "gap" }
    );
    Ok(0)
}

fn simulate(config: &Path, sequential: bool) -> Result<u8, Failure> {
    let (cfg, base) = SessionConfig::from_file(config)?;
    let resolved = cfg.resolve(&base)?;
    let scheduler = if sequential { Scheduler::Sequential } else { Scheduler::Threaded };
    let report = run_session(&resolved, scheduler)?;
    print_json(&serde_json::to_value(&report).expect("json"));
    eprintln!(
        "decoded {} symbol(s) from {} downloads, rate {}, {}",
        report.decoded.len(),
        report.total_download,
        report.rate,
        if report.correct { "correct" } else { "MISMATCH" }
    );
    Ok(if report.correct { 0 } else { EXIT_GUARANTEE })
}

struct VerifyArgs {
    privacy: bool,
    security: bool,
    correctness: bool,
    colluders: Option<Vec<usize>>,
    budget: u64,
    trials: u64,
    sequential: bool,
}

fn verify(config: &Path, args: VerifyArgs) -> Result<u8, Failure> {
    let (cfg, base) = SessionConfig::from_file(config)?;
    let resolved = cfg.resolve(&base)?;
    let instance = SchemeInstance::build(&resolved.pattern, resolved.x, resolved.t, resolved.q)?;
    let exec = execution(args.sequential);
    let budget = EnumerationBudget {
        max_states: args.budget,
    };
    let all = !(args.privacy || args.security || args.correctness);
    let colluders = |default: usize| -> BTreeSet<usize> {
        args.colluders
            .clone()
            .map(|c| c.into_iter().collect())
            .unwrap_or_else(|| (1..=default).collect())
    };
    let mut out = serde_json::Map::new();
    let mut ok = true;

    if all || args.correctness {
        let rep = verify_correctness(&instance, args.trials, resolved.seed, exec)?;
        eprintln!("correctness: {}/{} trials decoded exactly", rep.passes, rep.trials);
        ok &= rep.holds();
        out.insert("correctness".into(), json!({ "holds": rep.holds(), "report": rep }));
    }
    if all || args.privacy {
        let set = colluders(instance.t());
        let rep = verify_privacy_exhaustive(&instance, &set, budget, exec)?;
        let structural = verify_privacy_structural(&instance);
        eprintln!(
            "privacy: colluders {:?}, {} states per demand, tables {}; structural check {}",
            rep.colluders,
            rep.states_per_demand,
            if rep.holds { "identical" } else { "DIFFER" },
            if structural { "passes" } else { "FAILS" }
        );
        ok &= rep.holds && structural;
        out.insert(
            "privacy".into(),
            json!({
                "holds": rep.holds,
                "colluders": rep.colluders,
                "states_per_demand": rep.states_per_demand,
                "demands": rep.tables.len(),
                "structural": structural,
            }),
        );
    }
    if args.security || all && instance.x() > 0 {
        let set = colluders(instance.x());
        let rep = verify_security_exhaustive(&instance, &set, budget, exec)?;
        eprintln!(
            "security: colluders {:?}, uniform {}, message-independent {}{}",
            rep.colluders,
            rep.uniform,
            rep.message_independent,
            if rep.partial { " (partial message grid)" } else { "" }
        );
        ok &= rep.holds();
        out.insert("security".into(), json!({ "holds": rep.holds(), "report": rep }));
    }
    print_json(&serde_json::Value::Object(out));
    Ok(if ok { 0 } else { EXIT_GUARANTEE })
}

fn fixtures_regen(out: &Path) -> Result<u8, Failure> {
    let written = regenerate_fixtures(out)?;
    print_json(&json!(written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()));
    eprintln!("wrote {} fixtures to {}", written.len(), out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity {
            pattern,
            x,
            t,
            cap,
            sequential,
        } => capacity(&pattern, x, t, cap, sequential),
        Command::Simulate { config, sequential } => simulate(&config, sequential),
        Command::Verify {
            config,
            privacy,
            security,
            correctness,
            colluders,
            budget,
            trials,
            sequential,
        } => verify(
            &config,
            VerifyArgs {
                privacy,
                security,
                correctness,
                colluders,
                budget,
                trials,
                sequential,
            },
        ),
        Command::Fixtures {
            action: FixtureAction::Regen { out },
        } => fixtures_regen(&out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
