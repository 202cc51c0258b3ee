use std::path::PathBuf;

use ibismeet_core::dialogue::{parse_transcript, TranscriptFormat, Vocabulary};
use ibismeet_core::edit::apply_edit_script;
use ibismeet_core::mds::{Episode, GrammarRuleSet};
use ibismeet_core::{ArgLabel, Category, EpisodeId, Meeting, ParticipantId, TurnSpan};

/// The six scripted validator mutations, by name.
pub const MUTATIONS: [&str; 6] = [
    "late_reply",
    "unlicensed_child",
    "unlicensed_reply",
    "empty_episode",
    "bad_parameter",
    "containment_break",
];

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn read_fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn expected() -> serde_json::Value {
    serde_json::from_str(&read_fixture("M1.expected.json")).expect("expected answers parse")
}

/// `"t5"` to the 0-based turn index 4.
pub fn turn(label: &str) -> usize {
    let n: usize = label.trim_start_matches('t').parse().expect("turn label");
    n - 1
}

fn parse_tsv(text: &str) -> Meeting {
    parse_transcript(text.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl())
        .expect("fixture transcript parses")
}

/// M1 as ingested: dialogue structure and tags, no episodes below the root.
pub fn m1_transcript() -> Meeting {
    parse_tsv(&read_fixture("M1.tsv"))
}

/// M1 with the dialogue-act column blanked.
pub fn m1_untagged() -> Meeting {
    let text: String = read_fixture("M1.tsv")
        .lines()
        .map(|line| {
            if line.starts_with('#') || line.trim().is_empty() {
                return format!("{line}\n");
            }
            let mut fields: Vec<&str> = line.splitn(8, '\t').collect();
            fields[6] = "";
            format!("{}\n", fields.join("\t"))
        })
        .collect();
    parse_tsv(&text)
}

/// The fully annotated M1 (17 episodes).
pub fn m1() -> Meeting {
    apply_edit_script(
        &m1_transcript(),
        &read_fixture("M1.edits"),
        &GrammarRuleSet::default_mds(),
        &Vocabulary::default_swbd_damsl(),
    )
    .expect("fixture edits apply")
}

fn episode_mut<'a>(m: &'a mut Meeting, id: &str) -> &'a mut Episode {
    m.episodes.iter_mut().find(|e| e.id == id).expect("fixture episode")
}

fn push_leaf(m: &mut Meeting, id: &str, parent: &str, label: ArgLabel, span: Option<TurnSpan>, at: (f64, f64)) {
    let speaker = span.map(|s| m.turns[s.first].speaker.clone());
    m.episodes.push(Episode {
        id: EpisodeId::new(id),
        label,
        start: at.0,
        end: at.1,
        turn_span: span,
        parent: Some(EpisodeId::new(parent)),
        children: Vec::new(),
        attributed_speaker: speaker,
        target: None,
    });
    episode_mut(m, parent).children.push(EpisodeId::new(id));
}

/// M1 with one defect injected. Each mutation is expected to produce
/// exactly the violation code listed for it in the expected-answer file.
pub fn mutation(name: &str) -> Meeting {
    let mut m = m1();
    match name {
        "late_reply" => {
            // ACCEPT at t10 replying to the PROPOSE at t13
            let edge = m.reply_to.iter_mut().find(|e| e.from == "e13").expect("edge");
            edge.to.push(EpisodeId::new("e16"));
        }
        "unlicensed_child" => {
            let span = TurnSpan::single(turn("t14"));
            let at = m.span_interval(span);
            push_leaf(&mut m, "e17", "e0", ArgLabel::with_param(Category::Reject, "alternative"), Some(span), at);
        }
        "unlicensed_reply" => {
            m = m.add_reply_to("e9", &[EpisodeId::new("e6")]).expect("earlier target");
        }
        "empty_episode" => {
            let start = m.episode("e14").expect("e14").start;
            push_leaf(&mut m, "e17", "e14", ArgLabel::with_param(Category::Propose, "alternative"), None, (start, start));
        }
        "bad_parameter" => {
            episode_mut(&mut m, "e13").label = ArgLabel::with_param(Category::Accept, "bogus");
        }
        "containment_break" => {
            let span = TurnSpan::new(turn("t11"), turn("t13"));
            let (start, end) = m.span_interval(span);
            let e9 = episode_mut(&mut m, "e9");
            e9.turn_span = Some(span);
            e9.start = start;
            e9.end = end;
        }
        other => panic!("unknown mutation {other}"),
    }
    m
}

/// M1 where A first accepts and later rejects P1, both replying to e6.
pub fn contradiction_mutant() -> Meeting {
    let script = "episode e17 e3 ACCEPT(alternative) t9 speaker=A\n\
                  reply e17 e6\n\
                  episode e18 e3 REJECT(alternative) t12 speaker=A\n\
                  reply e18 e6\n";
    apply_edit_script(&m1(), script, &GrammarRuleSet::default_mds(), &Vocabulary::default_swbd_damsl())
        .expect("mutation script applies")
}

/// Three short meetings with distinct vocabularies, for ranking checks.
pub fn discrimination_corpus() -> Vec<Meeting> {
    ["D1", "D2", "D3"]
        .iter()
        .map(|id| parse_tsv(&read_fixture(&format!("discrimination/{id}.tsv"))))
        .collect()
}

pub fn participant(id: &str) -> ParticipantId {
    ParticipantId::new(id)
}
