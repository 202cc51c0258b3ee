use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Stdio};

use ibismeet_core::store::{to_canonical, Store};
use ibismeet_core::xml::import_mds_xml;
use ibismeet_testkit::{fixtures_dir, m1, mutation};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(store: &Path, args: &[&str]) -> Out {
    let mut argv = vec!["ibismeet", "--store", store.to_str().unwrap()];
    argv.extend_from_slice(args);
    bare(&argv)
}

fn bare(argv: &[&str]) -> Out {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ibismeet::run_with(argv, &mut out, &mut err);
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn fixture(name: &str) -> String {
    fixtures_dir().join(name).to_str().unwrap().to_owned()
}

/// A store holding the annotated M1.
fn annotated_store() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(dir.path(), &["ingest", &fixture("M1.tsv")]).code, 0);
    assert_eq!(cli(dir.path(), &["annotate", "M1", &fixture("M1.edits")]).code, 0);
    dir
}

#[test]
fn usage_errors_exit_2() {
    let out = bare(&["ibismeet"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("Usage"), "{}", out.stderr);
    assert_eq!(bare(&["ibismeet", "frobnicate"]).code, 2);
    assert_eq!(bare(&["ibismeet", "--store", "x", "query"]).code, 2);
    assert_eq!(bare(&["ibismeet", "--store", "x", "index", "--format", "yaml"]).code, 2);
    let help = bare(&["ibismeet", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("serve"));
}

#[test]
fn missing_store_is_a_usage_error() {
    let exe = env!("CARGO_BIN_EXE_ibismeet");
    let out = Command::new(exe).args(["validate"]).env_remove("IBISMEET_STORE").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("IBISMEET_STORE"));
}

#[test]
fn store_can_come_from_the_environment() {
    let dir = annotated_store();
    let exe = env!("CARGO_BIN_EXE_ibismeet");
    let out = Command::new(exe).args(["validate", "M1"]).env("IBISMEET_STORE", dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "M1: 0 violations\n");
}

#[test]
fn pipeline_in_text_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(dir.path(), &["ingest", &fixture("M1.tsv")]);
    assert_eq!(out.stdout, "ingested M1: 24 utterances, 14 turns, 1 episodes\n");
    let out = cli(dir.path(), &["annotate", "M1", &fixture("M1.edits")]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("annotated M1: 17 episodes\nM1: 0 violations\n"), "{}", out.stdout);
    let out = cli(dir.path(), &["validate", "M1"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "M1: 0 violations\n"));
    let out = cli(dir.path(), &["index"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("indexed 1 meetings"), "{}", out.stdout);
    let out = cli(dir.path(), &["query", "objections(alternative=\"P1\")", "--format", "text"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 2, "{}", out.stdout);
    assert!(lines[0].starts_with("M1\te8\tREJECT(alternative)"));
    assert!(lines[1].starts_with("M1\te9\tJUSTIFY"));
}

#[test]
fn structured_output_parses() {
    let dir = annotated_store();
    let out = cli(dir.path(), &["query", "chosen(issue=\"I1\")", "--format", "structured"]);
    let answer: ibismeet_core::query::Answer = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(answer.ids(), ["P2"]);
    let out = cli(dir.path(), &["--format", "structured", "validate"]);
    let reports: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(reports[0]["meeting"], "M1");
    assert_eq!(reports[0]["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn domain_errors_exit_1() {
    let dir = annotated_store();
    let again = cli(dir.path(), &["ingest", &fixture("M1.tsv")]);
    assert_eq!(again.code, 1);
    assert!(again.stderr.contains("already stored"), "{}", again.stderr);
    assert_eq!(cli(dir.path(), &["ingest", &fixture("M1.tsv"), "--overwrite"]).code, 0);
    let missing = cli(dir.path(), &["validate", "M9"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("M9 not found"));
    let bad_query = cli(dir.path(), &["query", "objections(alternative=P1)"]);
    assert_eq!(bad_query.code, 1);
    assert!(bad_query.stderr.contains("byte 23"), "{}", bad_query.stderr);
    assert_eq!(cli(dir.path(), &["ingest", "/nonexistent/file.tsv"]).code, 1);
    assert_eq!(cli(dir.path(), &["query", "chosen(issue=\"I404\")"]).code, 1);
}

#[test]
fn violations_exit_1_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("M1.json");
    std::fs::write(&file, to_canonical(&mutation("late_reply"))).unwrap();
    let store = dir.path().join("store");
    assert_eq!(cli(&store, &["ingest", file.to_str().unwrap()]).code, 0);
    let out = cli(&store, &["validate"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("M1: 1 violations\n  REPLY_NOT_EARLIER e13 -> e16"), "{}", out.stdout);
}

#[test]
fn grammar_file_overrides_the_store() {
    let dir = annotated_store();
    let text = ibismeet_core::GrammarRuleSet::default_mds().to_text();
    let stripped: String = text.lines().filter(|l| !l.starts_with("reply JUSTIFY")).map(|l| format!("{l}\n")).collect();
    let grammar = dir.path().join("strict.grammar");
    std::fs::write(&grammar, stripped).unwrap();
    let out = cli(dir.path(), &["--grammar", grammar.to_str().unwrap(), "validate", "M1"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("REPLY_UNLICENSED e9 -> e8"), "{}", out.stdout);
    std::fs::write(&grammar, "child MEETING\n").unwrap();
    let out = cli(dir.path(), &["--grammar", grammar.to_str().unwrap(), "validate"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("grammar line 1"), "{}", out.stderr);
}

#[test]
fn export_round_trips_through_ingest() {
    let dir = annotated_store();
    let xml = cli(dir.path(), &["export", "M1"]);
    assert_eq!(xml.code, 0);
    assert_eq!(import_mds_xml(xml.stdout.as_bytes()).unwrap(), m1());
    let file = dir.path().join("M1.xml");
    assert_eq!(cli(dir.path(), &["export", "M1", "-o", file.to_str().unwrap()]).code, 0);
    let other = dir.path().join("other");
    assert_eq!(cli(&other, &["ingest", file.to_str().unwrap()]).code, 0);
    assert_eq!(Store::open(&other).unwrap().load_meeting("M1").unwrap(), m1());
    let doc = cli(dir.path(), &["export", "M1", "--to", "structured"]);
    assert_eq!(doc.stdout.as_bytes(), to_canonical(&m1()));
}

#[test]
fn suggest_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    cli(dir.path(), &["ingest", &fixture("M1.tsv")]);
    let out = cli(dir.path(), &["suggest", "M1"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("e0\tDISCUSSION\tt6..t12\t"), "{}", out.stdout);
    let out = cli(dir.path(), &["suggest", "M1", "--apply"]);
    assert!(out.stdout.contains("applied"));
    let stored = Store::open(dir.path()).unwrap().load_meeting("M1").unwrap();
    assert!(stored.episodes.len() > 1);
    assert_eq!(cli(dir.path(), &["validate", "M1"]).code, 0);
}

#[test]
fn serve_answers_over_tcp() {
    let dir = annotated_store();
    let exe = env!("CARGO_BIN_EXE_ibismeet");
    let mut child = Command::new(exe)
        .args(["--store", dir.path().to_str().unwrap(), "serve", "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_owned();

    let request = |raw: String| {
        let mut s = TcpStream::connect(&addr).unwrap();
        s.write_all(raw.as_bytes()).unwrap();
        let mut resp = String::new();
        s.read_to_string(&mut resp).unwrap();
        resp
    };
    let list = request(format!("GET /meetings HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"));
    let body = r#"{"query": "chosen(issue=\"I1\")"}"#;
    let query = request(format!(
        "POST /query HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    ));
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(list.starts_with("HTTP/1.1 200"), "{list}");
    assert!(list.contains("\"id\":\"M1\""), "{list}");
    assert!(query.starts_with("HTTP/1.1 200"), "{query}");
    assert!(query.contains("\"id\":\"P2\""), "{query}");
}
