//! The `policymodel` command line.
//!
//! Exit codes: 0 on success, 1 when the model (or a journal run against it)
//! is at fault, 2 for usage errors such as bad flags, a path that holds no
//! model or a malformed query.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use policymodel_core::analysis::{self, enumerate_outcomes};
use policymodel_core::graph::{export_dot, DotOptions};
use policymodel_core::{Diagnostic, Journal, Session};
use serde::Serialize;

use crate::files::{DirSource, FileError};
use crate::manifest::{load_model, LoadError, LoadedModel, MANIFEST_FILE};
use crate::prompt::prompt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MODEL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "policymodel", version, about = "Validate, analyze and run policy models")]
pub struct Cli {
    /// Output format for reports and analysis results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Directory holding `policy-model.json`.
    pub model: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model; exits 0 iff there are no errors.
    Validate(ModelArg),
    /// List TODO constructs and unused space entities.
    Report(ModelArg),
    /// Export the decision graph as GraphViz.
    Dot {
        #[command(flatten)]
        model: ModelArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Draw sections as clusters.
        #[arg(long)]
        sections: bool,
    },
    /// Run an interview on the terminal, or replay a saved answer journal.
    Run {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        locale: Option<String>,
        /// Journal of answers to replay instead of asking.
        #[arg(long)]
        answers: Option<PathBuf>,
        /// Write the answers given to this journal file.
        #[arg(long)]
        save_journal: Option<PathBuf>,
    },
    /// List the answer paths whose outcome satisfies a predicate.
    Query {
        #[command(flatten)]
        model: ModelArg,
        predicate: String,
        #[arg(long, default_value_t = 100_000)]
        max_paths: usize,
    },
    /// Enumerate every answer path and its outcome.
    Enumerate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 100_000)]
        max_paths: usize,
    },
    /// Start the interview service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn model(message: impl Into<String>) -> Self {
        Failure { code: EXIT_MODEL, message: message.into() }
    }
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

type Out<'a> = &'a mut dyn Write;

/// Runs the command line with explicit streams; returns the exit code.
pub fn run(args: impl IntoIterator<Item = OsString>, stdin: &mut dyn BufRead, stdout: Out<'_>, stderr: Out<'_>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message.trim_end());
            f.code
        }
    }
}

fn open(path: &Path, stderr: Out<'_>) -> Result<LoadedModel, Failure> {
    if !path.join(MANIFEST_FILE).is_file() {
        return Err(Failure::usage(format!("{}: no {MANIFEST_FILE} found", path.display())));
    }
    let loaded = load_model(&DirSource::new(path)).map_err(|e| match e {
        LoadError::File(FileError::Io { .. }) if !path.is_dir() => Failure::usage(e.to_string()),
        e => Failure::model(e.to_string()),
    })?;
    for w in loaded.model.warnings().iter().chain(&loaded.localization_warnings) {
        let _ = writeln!(stderr, "{w}");
    }
    Ok(loaded)
}

fn json<T: Serialize>(out: Out<'_>, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::model(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_failure)
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::usage(format!("i/o error: {e}"))
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    valid: bool,
    model: Option<&'a str>,
    diagnostics: Vec<Diagnostic>,
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, stdout: Out<'_>, stderr: Out<'_>) -> Result<i32, Failure> {
    match &cli.command {
        Command::Validate(m) => validate(&m.model, cli.format, stdout, stderr),
        Command::Report(m) => {
            let loaded = open(&m.model, stderr)?;
            let report = loaded.model.todo_report();
            match cli.format {
                Format::Json => json(stdout, &report)?,
                Format::Text => write!(stdout, "{}", report.render_text()).map_err(io_failure)?,
            }
            Ok(EXIT_OK)
        }
        Command::Dot { model, output, sections } => {
            let loaded = open(&model.model, stderr)?;
            let dot = export_dot(loaded.model.graph(), DotOptions { section_clusters: *sections });
            match output {
                Some(p) => std::fs::write(p, dot).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?,
                None => stdout.write_all(dot.as_bytes()).map_err(io_failure)?,
            }
            Ok(EXIT_OK)
        }
        Command::Run { model, locale, answers, save_journal } => {
            let loaded = open(&model.model, stderr)?;
            let session = match answers {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    let journal: Journal = serde_json::from_str(&text)
                        .map_err(|e| Failure::usage(format!("{}: not an answer journal: {e}", path.display())))?;
                    let s = Session::replay(&loaded.model, &journal)
                        .map_err(|e| Failure::model(format!("{}: {e}", path.display())))?;
                    if !s.is_finished() {
                        return Err(Failure::model(format!(
                            "{}: journal ends before the interview finishes",
                            path.display()
                        )));
                    }
                    s
                }
                None => interactive(&loaded, locale.as_deref(), stdin, stderr)?,
            };
            if let Some(p) = save_journal {
                let text = serde_json::to_string_pretty(&session.journal()).map_err(|e| Failure::model(e.to_string()))?;
                std::fs::write(p, text + "\n").map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
            }
            let report = session
                .final_report(&loaded.model, loaded.package(locale.as_deref()))
                .map_err(|e| Failure::model(e.to_string()))?;
            match cli.format {
                Format::Json => json(stdout, &report)?,
                Format::Text => write!(stdout, "{}", report.render_text()).map_err(io_failure)?,
            }
            Ok(EXIT_OK)
        }
        Command::Query { model, predicate, max_paths } => {
            let loaded = open(&model.model, stderr)?;
            let space = loaded.model.space();
            let pred = analysis::parse_query(space, predicate)
                .map_err(|e| Failure::usage(format!("query: {e}")))?;
            let set = enumerate_outcomes(&loaded.model, *max_paths);
            let result = analysis::query(&set, &pred);
            match cli.format {
                Format::Json => json(stdout, &result)?,
                Format::Text => {
                    let table = analysis::render_outcomes(space, &set, Some(&result.outcomes));
                    // the header counts the whole set; restate it for the matches
                    let body = table.split_once('\n').map_or("", |(_, rest)| rest);
                    writeln!(
                        stdout,
                        "{} of {} paths match{}",
                        result.paths.len(),
                        set.paths.len(),
                        if set.partial { " (partial: path limit reached)" } else { "" }
                    )
                    .map_err(io_failure)?;
                    for line in body.lines().filter(|l| !l.starts_with("fault: ")) {
                        writeln!(stdout, "{line}").map_err(io_failure)?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Enumerate { model, max_paths } => {
            let loaded = open(&model.model, stderr)?;
            let set = enumerate_outcomes(&loaded.model, *max_paths);
            match cli.format {
                Format::Json => json(stdout, &set)?,
                Format::Text => write!(stdout, "{}", analysis::render_outcomes(loaded.model.space(), &set, None))
                    .map_err(io_failure)?,
            }
            Ok(if set.faults.is_empty() { EXIT_OK } else { EXIT_MODEL })
        }
        Command::Serve { config } => {
            let cfg = crate::service::Config::load(config, |k| std::env::var(k).ok())
                .map_err(|e| Failure::usage(e.to_string()))?;
            let rt = tokio::runtime::Runtime::new().map_err(io_failure)?;
            rt.block_on(crate::service::serve(cfg, stderr))
                .map_err(|e| Failure::model(e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

fn validate(path: &Path, format: Format, stdout: Out<'_>, stderr: Out<'_>) -> Result<i32, Failure> {
    if !path.join(MANIFEST_FILE).is_file() {
        return Err(Failure::usage(format!("{}: no {MANIFEST_FILE} found", path.display())));
    }
    let (model, diagnostics) = match load_model(&DirSource::new(path)) {
        Ok(l) => {
            let d = l.model.warnings().iter().chain(&l.localization_warnings).cloned().collect();
            (Some(l), d)
        }
        Err(e) => match e.diagnostics() {
            Some(d) => (None, d.0.clone()),
            None => return Err(Failure::model(e.to_string())),
        },
    };
    let valid = !diagnostics.iter().any(Diagnostic::is_error);
    match format {
        Format::Json => json(
            stdout,
            &ValidateOutput {
                valid,
                model: model.as_ref().map(|m| m.manifest.id.as_str()),
                diagnostics,
            },
        )?,
        Format::Text => {
            for d in &diagnostics {
                let _ = writeln!(stderr, "{d}");
            }
            if let Some(l) = &model {
                writeln!(
                    stdout,
                    "ok: {} {} ({} dimensions, {} nodes, {} locales)",
                    l.manifest.id,
                    l.manifest.version,
                    l.model.space().dimension_count(),
                    l.model.graph().nodes().len(),
                    l.packages.len()
                )
                .map_err(io_failure)?;
            }
        }
    }
    Ok(if valid { EXIT_OK } else { EXIT_MODEL })
}

/// Asks on `stderr` and reads answers from `stdin`: an answer key, its
/// display label, or its 1-based number.
fn interactive(loaded: &LoadedModel, locale: Option<&str>, stdin: &mut dyn BufRead, out: Out<'_>) -> Result<Session, Failure> {
    let model = &loaded.model;
    let pkg = loaded.package(locale);
    let mut session = Session::start(model).map_err(|e| Failure::model(e.to_string()))?;
    while let Some(p) = prompt(model, &session, pkg) {
        let _ = writeln!(out, "\n{}", p.text);
        if let Some(e) = &p.elaboration {
            let _ = writeln!(out, "{e}");
        }
        for (i, l) in p.answer_labels.iter().enumerate() {
            let _ = writeln!(out, "  {}) {l}", i + 1);
        }
        let _ = write!(out, "> ");
        let _ = out.flush();
        let mut line = String::new();
        if stdin.read_line(&mut line).map_err(io_failure)? == 0 {
            return Err(Failure::model("input ended before the interview finished"));
        }
        let input = line.trim();
        let chosen = input
            .parse::<usize>()
            .ok()
            .and_then(|n| n.checked_sub(1))
            .and_then(|i| p.answers.get(i))
            .or_else(|| p.answers.iter().find(|k| k.as_str() == input))
            .or_else(|| {
                p.answer_labels
                    .iter()
                    .position(|l| l.eq_ignore_ascii_case(input))
                    .map(|i| &p.answers[i])
            });
        match chosen {
            Some(k) => session.answer(model, k).map_err(|e| Failure::model(e.to_string()))?,
            None => {
                let _ = writeln!(out, "unknown answer `{input}`");
            }
        }
    }
    Ok(session)
}
