//! Acceptance run: one line per criterion with its timing. Exits non-zero
//! if any criterion fails or overruns its time budget.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use ibismeet_core::assist::{detect_adjacency_pairs, PairPatterns};
use ibismeet_core::index::{build_indexes, search_meetings, IndexConfig};
use ibismeet_core::mds::{validate, GrammarRuleSet};
use ibismeet_core::query::{assess_democratic, find_contradictions, summarize_decisions, AlternativeStatus};
use ibismeet_core::store::{from_canonical, to_canonical, Store};
use ibismeet_core::synth::{arbitrary_meeting, deliberation_meeting, SynthConfig};
use ibismeet_core::text::Analyzer;
use ibismeet_core::xml::{export_mds_xml, import_mds_xml};
use ibismeet_core::{Execution, Meeting};
use ibismeet_testkit::query_oracle::check_against_oracle;
use ibismeet_testkit::retrieval::{mixed_corpus, self_retrieval};
use ibismeet_testkit::tfidf::meeting_scores;
use ibismeet_testkit::validator_oracle::brute_force_violations;
use ibismeet_testkit::{
    contradiction_mutant, discrimination_corpus, expected, fixtures_dir, m1, m1_transcript, m1_untagged, mutation,
    turn, MUTATIONS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn validator_correctness() -> Outcome {
    let g = GrammarRuleSet::default_mds();
    let report = validate(&m1(), &g);
    ensure(report.is_valid(), || format!("M1 has {} violations", report.violations.len()))?;
    let exp = expected();
    for name in MUTATIONS {
        let codes: Vec<String> = validate(&mutation(name), &g).violations.iter().map(|v| v.code.to_string()).collect();
        let want = exp["mutations"][name].as_str().unwrap();
        ensure(codes == [want], || format!("{name}: {codes:?}, expected [{want}]"))?;
    }
    Ok(format!("M1 clean, {}/{} mutations flagged exactly", MUTATIONS.len(), MUTATIONS.len()))
}

fn validator_brute_force() -> Outcome {
    let g = GrammarRuleSet::default_mds();
    let cfg = SynthConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut with_violations = 0;
    for i in 0..200 {
        let m = arbitrary_meeting(&mut rng, &format!("R{i}"), &cfg, &g);
        ensure(m.episodes.len() <= 30 + 1, || format!("R{i} has {} episodes", m.episodes.len()))?;
        let got: std::collections::BTreeSet<_> = validate(&m, &g)
            .violations
            .iter()
            .map(|v| {
                let (c, e, r) = v.key();
                (c.as_str().to_owned(), e, r)
            })
            .collect();
        let want = brute_force_violations(&m, &g);
        ensure(got == want, || format!("R{i}: engine {got:?}, oracle {want:?}"))?;
        with_violations += usize::from(!got.is_empty());
    }
    Ok(format!("200/200 equal ({with_violations} with violations)"))
}

fn query_oracle() -> Outcome {
    let mut covered: BTreeMap<_, usize> = BTreeMap::new();
    let mut add = |c: BTreeMap<_, usize>| {
        for (t, n) in c {
            *covered.entry(t).or_insert(0) += n;
        }
    };
    add(check_against_oracle(&[m1()])?);
    add(check_against_oracle(&[contradiction_mutant()])?);
    let g = GrammarRuleSet::default_mds();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..50 {
        let m = deliberation_meeting(&mut rng, &format!("Q{i}"), &SynthConfig::default(), &g);
        add(check_against_oracle(std::slice::from_ref(&m))?);
    }
    ensure(covered.len() == 12, || format!("only {} templates had non-empty answers", covered.len()))?;
    let answered: usize = covered.values().sum();
    Ok(format!("12/12 templates agree on M1, mutant and 50 random meetings ({answered} non-empty answers)"))
}

fn decision_analytics() -> Outcome {
    let m = m1();
    let summaries = summarize_decisions(&m);
    let status = |issue: &str, alt: &str| {
        summaries
            .iter()
            .find(|s| s.issue == issue)
            .and_then(|s| s.alternatives.iter().find(|a| a.alternative == alt))
            .map(|a| a.status)
    };
    let open = |issue: &str| summaries.iter().find(|s| s.issue == issue).map(|s| s.open);
    ensure(status("I1", "P1") == Some(AlternativeStatus::Rejected), || "P1 not rejected".into())?;
    ensure(status("I1", "P2") == Some(AlternativeStatus::Accepted), || "P2 not accepted".into())?;
    ensure(open("I1") == Some(false) && open("I2") == Some(true), || "open/closed issues wrong".into())?;
    let j = assess_democratic(&m, "e15").map_err(|e| e.to_string())?;
    ensure(j.verdict && j.explicit_accepts == 2 && j.participants == 3, || format!("{j:?}"))?;
    let found = find_contradictions(&contradiction_mutant(), None);
    ensure(found.len() == 1, || format!("{} contradictions in the mutant", found.len()))?;
    ensure(find_contradictions(&m, None).is_empty(), || "contradiction in M1".into())?;
    Ok("I1 closed (P2), I2 open, e15 democratic 2/3, 1 contradiction".into())
}

fn index_retrieval() -> Outcome {
    let corpus = mixed_corpus(5);
    let analyzer = Analyzer::default();
    let index = build_indexes(&corpus, &IndexConfig::default(), Execution::default());
    let checked = self_retrieval(&corpus, &index, &analyzer)?;

    let corpus = discrimination_corpus();
    let index = build_indexes(&corpus, &IndexConfig::default(), Execution::default());
    let exp = expected()["discrimination"].as_object().unwrap().clone();
    let queries = exp.len();
    for (query, want) in exp {
        let want: Vec<(String, f64)> = serde_json::from_value(want).unwrap();
        let got = search_meetings(&index, &query, &analyzer);
        let direct = meeting_scores(&corpus, &query, &analyzer);
        let (top, (id, score)) = (&got.hits[0], &want[0]);
        ensure(&top.segment.id == id, || format!("{query}: top {} not {id}", top.segment.id))?;
        ensure((top.score - score).abs() < 1e-9, || format!("{query}: {} vs {score}", top.score))?;
        ensure((direct[0].1 - score).abs() < 1e-9, || format!("{query}: oracle {} vs {score}", direct[0].1))?;
    }
    Ok(format!("{checked}/{checked} segments self-retrieved, {queries} discrimination top-1 within 1e-9"))
}

fn adjacency_pairs() -> Outcome {
    let pairs = detect_adjacency_pairs(&m1_transcript(), &PairPatterns::default());
    let want = expected()["pairs"].as_array().unwrap().clone();
    let found = want
        .iter()
        .filter(|p| {
            let (a, b) = (turn(p["first"].as_str().unwrap()), turn(p["second"].as_str().unwrap()));
            pairs.iter().any(|q| q.kind.as_str() == p["kind"].as_str().unwrap() && q.first_turn == a && q.second_turn == b)
        })
        .count();
    ensure(found == want.len() && pairs.len() == want.len(), || {
        format!("{found}/{} found, {} detected", want.len(), pairs.len())
    })?;
    let false_pos = detect_adjacency_pairs(&m1_untagged(), &PairPatterns::default()).len();
    ensure(false_pos == 0, || format!("{false_pos} pairs on the untagged copy"))?;
    Ok(format!("{found}/{} found, 0 on the untagged copy", want.len()))
}

fn round_trips() -> Outcome {
    let g = GrammarRuleSet::default_mds();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut all: Vec<Meeting> = vec![m1(), m1_transcript(), contradiction_mutant()];
    all.extend(MUTATIONS.iter().map(|n| mutation(n)));
    for i in 0..100 {
        all.push(if i % 2 == 0 {
            arbitrary_meeting(&mut rng, &format!("A{i}"), &SynthConfig::default(), &g)
        } else {
            deliberation_meeting(&mut rng, &format!("D{i}"), &SynthConfig::default(), &g)
        });
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut store = Store::open(dir.path()).map_err(|e| e.to_string())?;
    for (i, m) in all.iter().enumerate() {
        // mutants share M1's id
        let mut m = m.clone();
        m.id = format!("{}-{i}", m.id).as_str().into();
        store.save_meeting(&m, false).map_err(|e| e.to_string())?;
        let back = Store::open(dir.path()).and_then(|s| s.load_meeting(m.id.as_str())).map_err(|e| e.to_string())?;
        ensure(back == m, || format!("{}: store load differs", m.id))?;
        ensure(from_canonical(&to_canonical(&m)).ok().as_ref() == Some(&m), || format!("{}: canonical", m.id))?;
        let first = export_mds_xml(&m);
        let imported = import_mds_xml(&first).map_err(|e| format!("{}: {e}", m.id))?;
        ensure(imported == m, || format!("{}: XML import differs", m.id))?;
        ensure(export_mds_xml(&imported) == first, || format!("{}: second export differs", m.id))?;
    }
    Ok(format!("{} meetings: store value-identical, XML byte-identical", all.len()))
}

fn end_to_end_cli() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_ibismeet");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = dir.path().to_str().unwrap().to_owned();
    let fx = |name: &str| fixtures_dir().join(name).to_str().unwrap().to_owned();
    let step = |args: &[&str]| -> Result<String, String> {
        let out = Command::new(exe).arg("--store").arg(&store).args(args).output().map_err(|e| e.to_string())?;
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
        Ok(stdout)
    };
    step(&["ingest", &fx("M1.tsv")])?;
    step(&["annotate", "M1", &fx("M1.edits")])?;
    let v = step(&["validate", "M1"])?;
    ensure(v == "M1: 0 violations\n", || v.clone())?;
    step(&["index"])?;
    let q = step(&["query", "objections(alternative=\"P1\")", "--format", "text"])?;
    let ids: Vec<&str> = q.lines().filter_map(|l| l.split('\t').nth(1)).collect();
    ensure(ids == ["e8", "e9"], || format!("answer {ids:?}"))?;
    Ok("ingest, annotate, validate, index, query -> e8, e9 (no UI built)".into())
}

fn main() {
    let criteria: [Check; 8] = [
        ("validator correctness", Duration::from_secs(1), validator_correctness),
        ("validator equals brute force on 200 meetings", Duration::from_secs(30), validator_brute_force),
        ("query templates equal traversal oracle", Duration::from_secs(10), query_oracle),
        ("decision analytics on M1", Duration::MAX, decision_analytics),
        ("index self-retrieval and TF-IDF top-1", Duration::MAX, index_retrieval),
        ("adjacency pairs on M1", Duration::MAX, adjacency_pairs),
        ("store and XML round-trips", Duration::MAX, round_trips),
        ("end-to-end command line", Duration::from_secs(5), end_to_end_cli),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let t = Instant::now();
        let outcome = check();
        let took = t.elapsed();
        let budget_note = if budget == Duration::MAX { String::new() } else { format!(" / {budget:?}") };
        let (ok, detail) = match outcome {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!("{} {name} [{took:.2?}{budget_note}] {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {}/{} criteria passed", 8 - failed, 8);
    if failed > 0 {
        std::process::exit(1);
    }
}
