use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use simforge::config::BackendChoice;
use simforge::pipeline::{CSV_FILE, RESULT_FILE, SVG_FILE};
use simforge::session::ArtifactKind;
use simforge::{Config, FrontendKind, Mode, NewSession, Session, State, Store, Workflow, WorkflowError};
use simforge_core::frontend::render;
use simforge_core::testkit::example_inventory;
use simforge_llm::mock::queue_fixture_spec;
use simforge_llm::Approach;

#[derive(Parser)]
#[command(name = "simforge", version, about = "Turn simulation descriptions into verified simulation runs")]
struct Cli {
    /// Directory holding sessions and their artifacts.
    #[arg(long, env = "SIMFORGE_STORE", default_value = "simforge-store", global = true)]
    store: PathBuf,
    /// TOML file with backend, generation and limit settings.
    #[arg(long, env = "SIMFORGE_CONFIG", global = true)]
    config: Option<PathBuf>,
    /// Overrides the backend named in the config file.
    #[arg(long, value_enum, global = true)]
    backend: Option<BackendArg>,
    /// Replay cache file for the replay and record backends.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Mock,
    Replay,
    Record,
    Live,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Gated,
    SingleRuntime,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrontendArg {
    Llm,
    #[value(alias = "deterministic")]
    Det,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    Inventory,
    Queue,
}

#[derive(Subcommand)]
enum Command {
    /// Start a session from a description file (`-` reads stdin).
    New {
        #[arg(long, value_enum, default_value = "gated")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "llm")]
        frontend: FrontendArg,
        /// Prompt approach: A, B or C. Picked from the description when omitted.
        #[arg(long)]
        approach: Option<String>,
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Build the artifact; `-f` replaces the description first.
    Generate {
        id: String,
        #[arg(short = 'f', long = "file")]
        file: Option<PathBuf>,
    },
    Approve {
        id: String,
        #[arg(long)]
        actor: String,
        #[arg(long)]
        reason: Option<String>,
    },
    Reject {
        id: String,
        #[arg(long)]
        actor: String,
        #[arg(long)]
        reason: Option<String>,
    },
    /// Execute the artifact.
    Run {
        id: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Attach the validation report; with `--actor`, sign the session off.
    Verify {
        id: String,
        #[arg(long)]
        actor: Option<String>,
        #[arg(long)]
        reason: Option<String>,
    },
    Show {
        id: String,
        #[arg(long)]
        json: bool,
    },
    List,
    /// Copy the log, artifact, reports and run files of a session into a directory.
    Export {
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a bundled example end to end on the mock backend.
    Demo {
        #[arg(value_enum)]
        kind: DemoKind,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn read_text(path: &Path) -> Result<String, WorkflowError> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    text.map_err(|e| WorkflowError::InvalidInput { reason: format!("{}: {e}", path.display()) })
}

fn workflow(cli: &Cli, backend: Option<BackendArg>) -> Result<Workflow, WorkflowError> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(b) = backend {
        config.backend.kind = match b {
            BackendArg::Mock => BackendChoice::Mock,
            BackendArg::Replay => BackendChoice::Replay,
            BackendArg::Record => BackendChoice::Record,
            BackendArg::Live => BackendChoice::Live,
            BackendArg::None => BackendChoice::None,
        };
    }
    if let Some(c) = &cli.cache {
        config.backend.cache = Some(c.clone());
    }
    Workflow::from_config(Store::open(&cli.store)?, &config)
}

fn summary(wf: &Workflow, s: &Session) -> String {
    let mut out = format!("{}  {}  ({:?}, {:?})", s.id, s.state, s.mode, s.frontend);
    if let Some(f) = &s.failure {
        out.push_str(&format!("\n  failed at {}: {}: {}", f.stage, f.kind, f.message));
    }
    if let Some(r) = s.static_report() {
        out.push_str(&format!("\n  static checks: {}", if r.passed() { "pass" } else { "FAIL" }));
    }
    for run in &s.runs {
        let dir = wf.store().run_dir(&s.id, run.n);
        out.push_str(&format!(
            "\n  run {} (seed {}, {:?}{}): {}",
            run.n,
            run.seed,
            run.runner,
            if run.partial { ", partial" } else { "" },
            dir.display()
        ));
        if let Some(r) = s.run_report(run.n) {
            out.push_str(&format!("\n  run {} checks: {}", run.n, if r.passed() { "pass" } else { "FAIL" }));
        }
    }
    if let Some(so) = &s.sign_off {
        out.push_str(&format!("\n  signed off by {}", so.actor));
    }
    out
}

fn show(wf: &Workflow, s: &Session) -> String {
    let mut out = summary(wf, s);
    out.push_str(&format!("\n\ndescription:\n{}\n", s.description));
    if let Some(p) = s.prompts.last() {
        out.push_str(&format!("\nprompt ({} {}):\n{}\n", p.template_id, &p.template_hash[..12.min(p.template_hash.len())], p.prompt));
    }
    if let Some(a) = &s.artifact {
        out.push_str(&format!("\nartifact ({:?}):\n{}", a.kind, a.text));
    }
    if let Some(r) = s.static_report() {
        out.push_str(&format!("\nstatic report:\n{r}"));
    }
    for run in &s.runs {
        if let Some(r) = s.run_report(run.n) {
            out.push_str(&format!("\nrun {} report:\n{r}", run.n));
        }
    }
    for a in &s.approvals {
        out.push_str(&format!("\n{:?} by {}: {}", a.decision, a.actor, a.reason.as_deref().unwrap_or("-")));
    }
    out
}

fn export(wf: &Workflow, id: &str, out: &Path) -> Result<Vec<PathBuf>, WorkflowError> {
    let s = wf.session(id)?;
    let store = wf.store();
    let mut written = Vec::new();
    let mut put = |name: String, bytes: &[u8]| -> Result<(), WorkflowError> {
        let path = out.join(name);
        store.write_file(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    put("events.jsonl".into(), &store.read_file(&store.log_path(id))?)?;
    if let Some(a) = &s.artifact {
        let name = match a.kind {
            ArtifactKind::Spec => "artifact.simspec",
            ArtifactKind::Program => "artifact.simscript",
        };
        put(name.into(), a.text.as_bytes())?;
    }
    if let Some(p) = s.prompts.last() {
        put("prompt.txt".into(), p.prompt.as_bytes())?;
    }
    let reports = serde_json::to_vec_pretty(&s.reports).map_err(|e| WorkflowError::Storage { reason: e.to_string() })?;
    put("reports.json".into(), &reports)?;
    for run in &s.runs {
        for file in [RESULT_FILE, CSV_FILE, SVG_FILE] {
            put(format!("run-{}-{file}", run.n), &wf.run_file(id, run.n, file)?)?;
        }
    }
    Ok(written)
}

fn demo(cli: &Cli, kind: DemoKind) -> Result<Session, WorkflowError> {
    let wf = workflow(cli, Some(BackendArg::Mock))?;
    let spec = match kind {
        DemoKind::Inventory => {
            let mut spec = example_inventory();
            spec.output.grid = true;
            spec.output.legend = true;
            spec.output.replenishment_markers = true;
            spec
        }
        DemoKind::Queue => queue_fixture_spec(),
    };
    let description = render(&spec);
    println!("description:\n{description}\n");
    let s = wf.submit(NewSession::new(description, Mode::Gated, FrontendKind::Llm))?;
    let s = wf.generate(&s.id, None)?;
    println!("generated: {}", s.state);
    if s.state != State::Generated {
        return Ok(s);
    }
    let s = wf.approve(&s.id, "demo", Some("bundled example".into()))?;
    let s = wf.execute(&s.id, None)?;
    if s.state != State::Executed {
        return Ok(s);
    }
    wf.verify(&s.id, Some(("demo".into(), Some("bundled example".into()))))
}

fn report(wf: &Workflow, s: &Session) -> ExitCode {
    println!("{}", summary(wf, s));
    if s.state == State::Failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, WorkflowError> {
    if let Command::Demo { kind } = &cli.command {
        let s = demo(cli, *kind)?;
        let wf = workflow(cli, Some(BackendArg::Mock))?;
        return Ok(report(&wf, &s));
    }
    let wf = workflow(cli, cli.backend)?;
    let s = match &cli.command {
        Command::New { mode, frontend, approach, file } => {
            let approach = match approach {
                Some(a) => Some(
                    Approach::parse(a)
                        .ok_or_else(|| WorkflowError::InvalidInput { reason: format!("unknown approach {a:?}") })?,
                ),
                None => None,
            };
            let mode = match mode {
                ModeArg::Gated => Mode::Gated,
                ModeArg::SingleRuntime => Mode::SingleRuntime,
            };
            let frontend = match frontend {
                FrontendArg::Llm => FrontendKind::Llm,
                FrontendArg::Det => FrontendKind::Deterministic,
            };
            let new = NewSession { description: read_text(file)?, mode, frontend, approach };
            wf.submit(new)?
        }
        Command::Generate { id, file } => {
            let description = file.as_deref().map(read_text).transpose()?;
            wf.generate(id, description)?
        }
        Command::Approve { id, actor, reason } => wf.approve(id, actor, reason.clone())?,
        Command::Reject { id, actor, reason } => wf.reject(id, actor, reason.clone())?,
        Command::Run { id, seed } => wf.execute(id, *seed)?,
        Command::Verify { id, actor, reason } => wf.verify(id, actor.clone().map(|a| (a, reason.clone())))?,
        Command::Show { id, json } => {
            let s = wf.session(id)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&s).unwrap_or_default());
            } else {
                println!("{}", show(&wf, &s));
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::List => {
            for s in wf.sessions()? {
                println!("{}  {:<11} {:?}", s.id, s.state.to_string(), s.mode);
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Export { id, out } => {
            for p in export(&wf, id, out)? {
                println!("{}", p.display());
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| WorkflowError::Storage { reason: e.to_string() })?;
            rt.block_on(simforge::http::serve(Arc::new(wf), addr))
                .map_err(|e| WorkflowError::Storage { reason: format!("{addr}: {e}") })?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Demo { .. } => unreachable!("handled above"),
    };
    Ok(report(&wf, &s))
}
