use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use ibismeet_core::assist::{apply_suggestion, suggest_annotations, SuggestConfig};
use ibismeet_core::dialogue::{parse_transcript, TranscriptFormat, Vocabulary};
use ibismeet_core::edit::apply_edit_script;
use ibismeet_core::index::{build_indexes, IndexConfig, IndexSet};
use ibismeet_core::mds::{validate, ValidationReport};
use ibismeet_core::query::{execute, parse_query};
use ibismeet_core::store::{to_canonical, Store};
use ibismeet_core::text::Analyzer;
use ibismeet_core::xml::{export_mds_xml, import_mds_xml};
use ibismeet_core::{Execution, GrammarRuleSet, Meeting};
use serde_json::json;

use crate::api;

#[derive(Parser)]
#[command(name = "ibismeet", version, about = "Meeting transcript corpus engine", arg_required_else_help = true)]
struct Cli {
    /// Store directory.
    #[arg(long, env = "IBISMEET_STORE", global = true)]
    store: Option<PathBuf>,
    /// Grammar file overriding the one kept in the store.
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Input {
    Tsv,
    Structured,
    Xml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportAs {
    Xml,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Read a transcript into the store.
    Ingest {
        file: PathBuf,
        /// Input format; guessed from the extension when absent.
        #[arg(long, value_enum)]
        input: Option<Input>,
        #[arg(long)]
        overwrite: bool,
        /// Dialogue-act vocabulary file.
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Apply an edit script to a stored meeting.
    Annotate {
        meeting: String,
        script: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Check meetings against the grammar (every stored meeting if none given).
    Validate { meetings: Vec<String> },
    /// Propose discussion episodes for a meeting.
    Suggest {
        meeting: String,
        /// Apply every suggestion and save the result.
        #[arg(long)]
        apply: bool,
    },
    /// Rebuild the index snapshot.
    Index,
    /// Run a query such as 'chosen(issue="I1")'.
    Query { query: String },
    /// Write a meeting as MDS XML or as its store document.
    Export {
        meeting: String,
        #[arg(long, value_enum, default_value_t = ExportAs::Xml)]
        to: ExportAs,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
}

/// Runs the command line with process stdout and stderr. Returns the exit
/// code: 0 on success, 1 on domain errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                return 2;
            }
            let _ = write!(out, "{rendered}");
            return 0;
        }
    };
    let Some(root) = cli.store.clone() else {
        let _ = writeln!(err, "error: no store given; pass --store DIR or set IBISMEET_STORE");
        return 2;
    };
    match dispatch(&cli, &root, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

struct Ctx {
    store: Store,
    grammar: GrammarRuleSet,
    format: Format,
}

impl Ctx {
    fn emit(&self, out: &mut dyn Write, text: &str, structured: serde_json::Value) -> anyhow::Result<()> {
        match self.format {
            Format::Text => out.write_all(text.as_bytes())?,
            Format::Structured => {
                serde_json::to_writer_pretty(&mut *out, &structured)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }

    /// The cached index if it matches the store, else a fresh one (cached).
    fn index(&self, corpus: &[Meeting]) -> anyhow::Result<IndexSet> {
        if let Some(index) = self.store.load_index_cache() {
            return Ok(index);
        }
        let index = build_indexes(corpus, &IndexConfig::default(), Execution::default());
        self.store.save_index_cache(&index)?;
        Ok(index)
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn vocabulary(path: Option<&Path>) -> anyhow::Result<Vocabulary> {
    match path {
        Some(p) => Ok(Vocabulary::parse(&String::from_utf8(read(p)?)?)?),
        None => Ok(Vocabulary::default_swbd_damsl()),
    }
}

fn report_text(r: &ValidationReport) -> String {
    let mut s = format!("{}: {} violations\n", r.meeting, r.violations.len());
    for v in &r.violations {
        let related = v.related.as_ref().map(|x| format!(" -> {x}")).unwrap_or_default();
        s.push_str(&format!("  {} {}{related}: {}\n", v.code, v.episode, v.message));
    }
    s
}

fn summary(m: &Meeting) -> serde_json::Value {
    json!({
        "meeting": m.id,
        "utterances": m.utterances.len(),
        "turns": m.turns.len(),
        "episodes": m.episodes.len(),
    })
}

fn dispatch(cli: &Cli, root: &Path, out: &mut dyn Write) -> anyhow::Result<i32> {
    let store = Store::open(root)?;
    let grammar = match &cli.grammar {
        Some(p) => GrammarRuleSet::parse(&String::from_utf8(read(p)?)?)?,
        None => store.grammar()?,
    };
    let mut ctx = Ctx { store, grammar, format: cli.format };
    let analyzer = Analyzer::default();
    match &cli.command {
        Command::Ingest { file, input, overwrite, vocab } => {
            let raw = read(file)?;
            let input = input.unwrap_or_else(|| match file.extension().and_then(|e| e.to_str()) {
                Some("json") => Input::Structured,
                Some("xml") => Input::Xml,
                _ => Input::Tsv,
            });
            let vocab = vocabulary(vocab.as_deref())?;
            let meeting = match input {
                Input::Tsv => parse_transcript(&raw, TranscriptFormat::Tsv, &vocab)?,
                Input::Structured => parse_transcript(&raw, TranscriptFormat::StructuredDoc, &vocab)?,
                Input::Xml => import_mds_xml(&raw)?,
            };
            ctx.store.save_meeting(&meeting, *overwrite)?;
            let text = format!(
                "ingested {}: {} utterances, {} turns, {} episodes\n",
                meeting.id,
                meeting.utterances.len(),
                meeting.turns.len(),
                meeting.episodes.len()
            );
            ctx.emit(out, &text, summary(&meeting))?;
        }
        Command::Annotate { meeting, script, vocab } => {
            let current = ctx.store.load_meeting(meeting)?;
            let script = String::from_utf8(read(script)?)?;
            let updated = apply_edit_script(&current, &script, &ctx.grammar, &vocabulary(vocab.as_deref())?)?;
            ctx.store.save_meeting(&updated, true)?;
            let report = validate(&updated, &ctx.grammar);
            let text = format!("annotated {}: {} episodes\n{}", updated.id, updated.episodes.len(), report_text(&report));
            let mut s = summary(&updated);
            s["report"] = json!(report);
            ctx.emit(out, &text, s)?;
        }
        Command::Validate { meetings } => {
            let corpus = if meetings.is_empty() {
                ctx.store.load_all()?
            } else {
                meetings.iter().map(|id| ctx.store.load_meeting(id)).collect::<Result<_, _>>()?
            };
            let reports: Vec<ValidationReport> = corpus.iter().map(|m| validate(m, &ctx.grammar)).collect();
            let text: String = reports.iter().map(report_text).collect();
            ctx.emit(out, &text, json!(reports))?;
            if reports.iter().any(|r| !r.is_valid()) {
                return Ok(1);
            }
        }
        Command::Suggest { meeting, apply } => {
            let m = ctx.store.load_meeting(meeting)?;
            let found = suggest_annotations(&m, &ctx.grammar, &SuggestConfig::default(), &analyzer);
            let mut text = String::new();
            for s in &found {
                text.push_str(&format!("{}\t{}\t{}\t{:.3}\n", s.parent, s.label, s.turn_span, s.confidence));
                for c in &s.children {
                    text.push_str(&format!("  {}\t{}\n", c.label, c.turn_span));
                }
            }
            if *apply {
                let mut updated = m;
                for s in &found {
                    updated = apply_suggestion(&updated, s, &ctx.grammar)?;
                }
                ctx.store.save_meeting(&updated, true)?;
                text.push_str(&format!("applied {} suggestions\n", found.len()));
            }
            ctx.emit(out, &text, json!(found))?;
        }
        Command::Index => {
            let corpus = ctx.store.load_all()?;
            let index = build_indexes(&corpus, &IndexConfig::default(), Execution::default());
            ctx.store.save_index_cache(&index)?;
            let text = format!(
                "indexed {} meetings: {} segments, {} stems, {} document links\n",
                index.meetings.len(),
                index.segments.len(),
                index.stems.len(),
                index.doc_links.len()
            );
            let s = json!({
                "meetings": index.meetings.len(),
                "segments": index.segments.len(),
                "stems": index.stems.len(),
                "doc_links": index.doc_links.len(),
            });
            ctx.emit(out, &text, s)?;
        }
        Command::Query { query } => {
            let ast = parse_query(query)?;
            let corpus = ctx.store.load_all()?;
            let index = ctx.index(&corpus)?;
            let answer = execute(&ast, &index, &corpus, &analyzer)?;
            ctx.emit(out, &answer.to_text(), json!(answer))?;
        }
        Command::Export { meeting, to, output } => {
            let m = ctx.store.load_meeting(meeting)?;
            let bytes = match to {
                ExportAs::Xml => export_mds_xml(&m),
                ExportAs::Structured => to_canonical(&m),
            };
            match output {
                Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(&bytes)?,
            }
        }
        Command::Serve { port, bind } => {
            let override_grammar = cli.grammar.as_ref().map(|_| ctx.grammar.clone());
            let state = Arc::new(api::AppState::new(ctx.store, override_grammar)?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((bind.as_str(), *port))
                    .await
                    .with_context(|| format!("binding {bind}:{port}"))?;
                writeln!(out, "listening on http://{}", listener.local_addr()?)?;
                out.flush()?;
                axum::serve(listener, api::router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(0)
}
