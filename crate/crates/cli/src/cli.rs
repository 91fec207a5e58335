//! Command-line front end. [`run`] takes explicit streams so the commands can
//! be exercised without a terminal.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use belief_forge_core::value::{render, to_f64};
use belief_forge_core::{
    check_focusing, CompletionOptions, Error as CoreError, ExistenceReport, Frame, Rational,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::document::{
    parse_set_text, parse_spec, to_canonical, verdict_tag, MethodName, ReportDocument,
    ResultDocument, SpecDocument,
};
use crate::engine::{is_no_solution, run as run_method, RunSettings};
use crate::journal::Journal;
use crate::service::{router, AnswerRequest, Registry, ServiceError, SessionView};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "belief-forge",
    version,
    about = "Complete partially specified belief functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Completion method; defaults to the spec's `method`, then min-spec.
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Largest variable count for which the optimal face is enumerated.
    #[arg(long, env = "BELIEF_FORGE_CAP")]
    pub cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Complete the spec and print the result document.
    Complete {
        #[command(flatten)]
        engine: EngineArgs,
        /// Extra set to report belief and plausibility for, e.g. `u1,u2`.
        #[arg(long = "query")]
        queries: Vec<String>,
        /// Write the result here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Spec file, or `-` for standard input.
        spec: PathBuf,
    },
    /// Print the existence conditions with their residuals.
    Check {
        #[arg(long)]
        json: bool,
        spec: PathBuf,
    },
    /// Complete the spec and print specificity, focal elements and a belief table.
    Info {
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long = "query")]
        queries: Vec<String>,
        spec: PathBuf,
    },
    /// Ask for missing beliefs on standard input until focusing applies.
    Elicit {
        #[arg(long, env = "BELIEF_FORGE_CAP")]
        cap: Option<usize>,
        /// Append the session to this journal.
        #[arg(long)]
        journal: Option<PathBuf>,
        spec: PathBuf,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, env = "BELIEF_FORGE_CAP")]
        cap: Option<usize>,
        /// Replay this journal on startup and append new events to it.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // help and version requests are not errors
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, stdin, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn read_spec(path: &Path, stdin: &mut dyn BufRead) -> anyhow::Result<SpecDocument> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .context("reading the spec from standard input")?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_spec(&text).with_context(|| format!("invalid spec {}", path.display()))
}

fn query_sets(
    spec: &SpecDocument,
    frame: &Frame,
    extra: &[String],
) -> anyhow::Result<Vec<belief_forge_core::Subset>> {
    let mut sets = spec.query_sets()?;
    for q in extra {
        sets.push(parse_set_text(frame, q)?);
    }
    Ok(sets)
}

fn exact(v: &Rational) -> String {
    format!("{} ({})", render(v), to_f64(v))
}

#[derive(Serialize)]
struct FailureDocument {
    error: String,
    report: Option<ReportDocument>,
}

/// Reports a completion error. Errors that carry an existence report print
/// it, both as text on `err` and as a JSON document on `out`.
fn report_failure(
    frame: &Frame,
    e: &CoreError,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    let report = match e {
        CoreError::Infeasible(r) | CoreError::FocusingInapplicable(r) => Some(r.as_ref()),
        CoreError::Impossible { report, .. } => Some(report.as_ref()),
        _ => None,
    };
    writeln!(err, "error: {e}")?;
    if let Some(r) = report {
        write_report(frame, r, err)?;
    }
    let doc = FailureDocument {
        error: e.to_string(),
        report: report.map(|r| ReportDocument::new(frame, r)),
    };
    out.write_all(to_canonical(&doc).as_bytes())?;
    Ok(if is_no_solution(e) {
        EXIT_NO_SOLUTION
    } else {
        EXIT_USAGE
    })
}

fn write_report(frame: &Frame, report: &ExistenceReport, w: &mut dyn Write) -> std::io::Result<()> {
    for r in &report.records {
        let lower: Vec<String> = r.lower_family.iter().map(|s| frame.render(s)).collect();
        writeln!(
            w,
            "  {:<16} below [{}]  bound {}  residual {}  {}",
            frame.render(r.set),
            lower.join(", "),
            render(&r.bound),
            render(&r.residual),
            if r.provably_impossible {
                "IMPOSSIBLE"
            } else if r.passed {
                "ok"
            } else {
                "FAIL"
            }
        )?;
    }
    write!(w, "verdict: {}", verdict_tag(report.verdict))?;
    match report.first_impossible() {
        Some(at) => writeln!(
            w,
            " (no belief function exists; condition fails at {})",
            frame.render(at)
        ),
        None => writeln!(w),
    }
}

fn execute(
    command: Command,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    match command {
        Command::Complete {
            engine,
            queries,
            output,
            spec,
        } => {
            let doc = read_spec(&spec, stdin)?;
            let known = doc.known_beliefs()?;
            let queries = query_sets(&doc, known.frame(), &queries)?;
            let settings = RunSettings::resolve(&doc, engine.method, engine.cap);
            match run_method(&known, &settings) {
                Ok(r) => {
                    let text = ResultDocument::new(&r, &queries).to_json();
                    match output {
                        Some(path) => std::fs::write(&path, text)
                            .with_context(|| format!("writing {}", path.display()))?,
                        None => out.write_all(text.as_bytes())?,
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => report_failure(known.frame(), &e, out, err),
            }
        }
        Command::Check { json, spec } => {
            let doc = read_spec(&spec, stdin)?;
            let known = doc.known_beliefs()?;
            let report = check_focusing(&known);
            if json {
                out.write_all(
                    to_canonical(&ReportDocument::new(known.frame(), &report)).as_bytes(),
                )?;
            } else {
                let closed = known.family().is_closed_under_intersection();
                writeln!(
                    out,
                    "family of {} sets, {}closed under intersection",
                    known.family().len(),
                    if closed { "" } else { "not " }
                )?;
                write_report(known.frame(), &report, out)?;
            }
            Ok(match report.verdict {
                belief_forge_core::Verdict::ProvablyImpossible => EXIT_NO_SOLUTION,
                _ => EXIT_OK,
            })
        }
        Command::Info {
            engine,
            queries,
            spec,
        } => {
            let doc = read_spec(&spec, stdin)?;
            let known = doc.known_beliefs()?;
            let frame = known.frame().clone();
            let mut sets = query_sets(&doc, &frame, &queries)?;
            if sets.is_empty() {
                sets = known.constraints().map(|(s, _)| s).collect();
            }
            let settings = RunSettings::resolve(&doc, engine.method, engine.cap);
            let r = match run_method(&known, &settings) {
                Ok(r) => r,
                Err(e) => return report_failure(&frame, &e, &mut std::io::sink(), err),
            };
            let m = &r.mass;
            writeln!(out, "method: {}", r.method.tag())?;
            writeln!(out, "specificity: {}", exact(&m.specificity()))?;
            writeln!(out, "focal elements:")?;
            for (s, v) in m.entries() {
                writeln!(out, "  {:<16} {}", frame.render(s), exact(v))?;
            }
            if !sets.is_empty() {
                writeln!(out, "{:<18} {:<24} {}", "set", "belief", "plausibility")?;
                for s in sets {
                    writeln!(
                        out,
                        "{:<18} {:<24} {}",
                        frame.render(s),
                        exact(&m.belief(s)),
                        exact(&m.plausibility(s))
                    )?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Elicit { cap, journal, spec } => {
            let doc = read_spec(&spec, &mut std::io::empty())?;
            let mut options = CompletionOptions::default();
            if let Some(c) = cap {
                options.vertex_cap = c;
            }
            let registry = match journal {
                Some(path) => Registry::with_journal(options, Journal::open(path)?)?,
                None => Registry::new(options),
            };
            elicit_loop(&registry, &doc, stdin, out, err)
        }
        Command::Serve {
            port,
            bind,
            cap,
            journal,
        } => {
            let mut options = CompletionOptions::default();
            if let Some(c) = cap {
                options.vertex_cap = c;
            }
            let registry = match journal {
                Some(path) => Registry::with_journal(options, Journal::open(path)?)?,
                None => Registry::new(options),
            };
            serve(Arc::new(registry), bind, port, err)?;
            Ok(EXIT_OK)
        }
    }
}

fn write_failures(view: &SessionView, err: &mut dyn Write) -> std::io::Result<()> {
    if view.failed_conditions.is_empty() {
        return Ok(());
    }
    writeln!(err, "failing conditions:")?;
    for c in &view.failed_conditions {
        let lower: Vec<String> = c.lower_family.iter().map(|s| braces(s)).collect();
        writeln!(
            err,
            "  {:<16} below [{}]  needs at least {}, residual {}",
            braces(&c.set),
            lower.join(", "),
            c.bound.0,
            c.residual.0
        )?;
    }
    Ok(())
}

fn braces(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(","))
}

fn elicit_loop(
    registry: &Registry,
    spec: &SpecDocument,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> anyhow::Result<i32> {
    let mut view = registry.create(spec)?;
    let id = view.id.clone();
    writeln!(err, "session {id}")?;
    while let Some(q) = view.pending.clone() {
        write_failures(&view, err)?;
        write!(
            err,
            "Bel({}) in [{}, {}]? (empty for unknown) ",
            braces(&q.set),
            q.low.0,
            q.high.0
        )?;
        err.flush()?;
        let mut line = String::new();
        let read = stdin.read_line(&mut line)?;
        let text = line.trim();
        let req = if read == 0 || text.is_empty() || text == "?" {
            if read == 0 {
                writeln!(err)?;
            }
            AnswerRequest {
                set: Some(q.set.clone()),
                belief: None,
                unavailable: true,
            }
        } else {
            AnswerRequest {
                set: Some(q.set.clone()),
                belief: Some(text.to_string()),
                unavailable: false,
            }
        };
        match registry.answer(&id, &req) {
            Ok(v) => view = v,
            Err(e @ (ServiceError::Rejected { .. } | ServiceError::Document(_))) => {
                writeln!(err, "rejected: {e}")?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    match view.state.as_str() {
        "completed" => {
            out.write_all(registry.result(&id)?.to_json().as_bytes())?;
            Ok(EXIT_OK)
        }
        "impossible" => {
            write_failures(&view, err)?;
            writeln!(
                err,
                "no belief function exists: the condition at {} fails using known values only",
                braces(view.impossible_at.as_deref().unwrap_or_default())
            )?;
            Ok(EXIT_NO_SOLUTION)
        }
        other => {
            write_failures(&view, err)?;
            writeln!(err, "no completion found (session {other})")?;
            Ok(EXIT_NO_SOLUTION)
        }
    }
}

fn serve(
    registry: Arc<Registry>,
    bind: IpAddr,
    port: u16,
    err: &mut dyn Write,
) -> anyhow::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting the runtime")?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port))
            .await
            .with_context(|| format!("binding {bind}:{port}"))?;
        let addr = listener.local_addr()?;
        writeln!(err, "listening on http://{addr}")?;
        err.flush()?;
        if !bind.is_loopback() {
            writeln!(
                err,
                "warning: the API has no authentication and is reachable beyond this host"
            )?;
        }
        axum::serve(listener, router(registry))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("serving")?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}
