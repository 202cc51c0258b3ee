//! Seeded random meetings for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dialogue::{Meeting, Modality, Participant, TurnSpan, Utterance};
use crate::ids::{EpisodeId, MeetingId, ParticipantId, UtteranceId};
use crate::mds::{ArgLabel, Category, Episode, EpisodeSpec, GrammarRuleSet, ReplyToEdge};

const WORDS: &[&str] = &[
    "budget", "printer", "vendor", "training", "course", "warranty", "price", "office", "staff",
    "schedule", "deadline", "contract", "supplier", "meeting", "report", "design", "remote",
    "button", "battery", "screen", "colour", "plastic", "market", "customer", "survey", "cost",
    "proposal", "decision", "option", "agenda", "project", "manager", "team", "quality",
    "delivery", "software", "license", "server", "backup", "holiday",
];

const TAGS: &[&str] = &[
    "statement", "opinion", "question", "wh-question", "answer", "yes-answer", "accept", "reject",
    "open-option", "offer", "topic-change", "acknowledge",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub min_utterances: usize,
    pub max_utterances: usize,
    pub participants: usize,
    pub max_episodes: usize,
    /// Probability that an utterance carries a dialogue-act tag.
    pub tag_probability: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_utterances: 6,
            max_utterances: 40,
            participants: 3,
            max_episodes: 30,
            tag_probability: 0.6,
        }
    }
}

fn speaker_name(i: usize) -> String {
    char::from(b'A' + (i % 26) as u8).to_string()
}

/// An unannotated meeting with random speakers, timing, text and tags.
pub fn random_transcript<R: Rng>(rng: &mut R, id: &str, cfg: &SynthConfig) -> Meeting {
    let n = rng.gen_range(cfg.min_utterances.max(1)..=cfg.max_utterances.max(cfg.min_utterances.max(1)));
    let speakers: Vec<String> = (0..cfg.participants.max(1)).map(speaker_name).collect();
    let mut t = 0.0f64;
    let mut utterances = Vec::with_capacity(n);
    let mut prev_speaker = 0usize;
    for i in 0..n {
        let s = if rng.gen_bool(0.6) { rng.gen_range(0..speakers.len()) } else { prev_speaker };
        prev_speaker = s;
        // quarter-second grid keeps times exact in any decimal rendering
        let len = f64::from(rng.gen_range(1..=24u32)) / 4.0;
        let silence = rng.gen_ratio(1, 25);
        let words = rng.gen_range(3..=12);
        let text = if silence {
            String::new()
        } else {
            (0..words).map(|_| *WORDS.choose(rng).expect("non-empty")).collect::<Vec<_>>().join(" ")
        };
        let mut da_tags = std::collections::BTreeSet::new();
        if !silence && rng.gen_bool(cfg.tag_probability) {
            da_tags.insert((*TAGS.choose(rng).expect("non-empty")).to_owned());
        }
        utterances.push(Utterance {
            id: UtteranceId::new(format!("u{}", i + 1)),
            speaker: ParticipantId::new(speakers[s].as_str()),
            start: t,
            end: t + len,
            modality: if silence { Modality::Silence } else { Modality::Speech },
            text,
            da_tags,
        });
        t += len + if rng.gen_bool(0.2) { 0.0 } else { 0.25 };
    }
    let participants = speakers
        .iter()
        .map(|s| Participant { id: ParticipantId::new(s.as_str()), name: format!("Speaker {s}"), role: None })
        .collect();
    Meeting::from_utterances(MeetingId::new(id), format!("Synthetic {id}"), Some("2020-01-01".into()), participants, utterances)
        .expect("generated utterances are consistent")
}

fn random_label<R: Rng>(rng: &mut R, grammar: &GrammarRuleSet) -> ArgLabel {
    let category = *Category::ALL[1..].choose(rng).expect("non-empty");
    let known = grammar.params.get(&category).cloned().unwrap_or_default();
    let parameter = match rng.gen_range(0..10) {
        0 => Some("bogus".to_owned()),
        1..=5 if !known.is_empty() => known.choose(rng).cloned(),
        _ => None,
    };
    ArgLabel { category, parameter, topic: None }
}

/// A meeting whose episode tree and reply-to edges are arbitrary: labels,
/// spans and edges may break any grammar rule. The tree itself is always
/// well formed.
pub fn arbitrary_meeting<R: Rng>(rng: &mut R, id: &str, cfg: &SynthConfig, grammar: &GrammarRuleSet) -> Meeting {
    let mut m = random_transcript(rng, id, cfg);
    let n_turns = m.turns.len();
    let n_eps = rng.gen_range(0..cfg.max_episodes.max(1));
    for k in 1..=n_eps {
        let parent = rng.gen_range(0..m.episodes.len());
        let id = EpisodeId::new(format!("e{k}"));
        let a = rng.gen_range(0..n_turns);
        let b = rng.gen_range(a..n_turns.min(a + 6));
        let span = TurnSpan::new(a, b);
        let (mut start, mut end) = m.span_interval(span);
        if rng.gen_ratio(1, 12) {
            // interval that disagrees with the span
            start -= 1.0;
            end += 0.5;
        }
        let parent_id = m.episodes[parent].id.clone();
        m.episodes[parent].children.push(id.clone());
        let label = random_label(rng, grammar);
        m.episodes.push(Episode {
            id,
            label,
            start,
            end,
            turn_span: Some(span),
            parent: Some(parent_id),
            children: Vec::new(),
            attributed_speaker: Some(m.turns[a].speaker.clone()),
            target: None,
        });
    }
    for e in m.episodes.iter_mut().skip(1) {
        if e.children.is_empty() && rng.gen_ratio(1, 15) {
            e.turn_span = None;
        }
    }
    let ids: Vec<EpisodeId> = m.episodes.iter().map(|e| e.id.clone()).collect();
    let n_edges = if ids.len() > 1 { rng.gen_range(0..ids.len()) } else { 0 };
    let mut sources: Vec<EpisodeId> = ids.clone();
    sources.shuffle(rng);
    for from in sources.into_iter().take(n_edges) {
        let k = rng.gen_range(1..=3);
        let mut to: Vec<EpisodeId> = Vec::new();
        for _ in 0..k {
            let t = ids.choose(rng).expect("non-empty").clone();
            if t != from && !to.contains(&t) {
                to.push(t);
            }
        }
        if !to.is_empty() {
            m.reply_to.push(ReplyToEdge { from, to });
        }
    }
    m.normalize_episode_order();
    m
}

/// A deliberation that follows the default grammar's shape: discussions
/// with issues, proposals, responses, justifications and decisions wired
/// by reply-to edges to earlier episodes.
pub fn deliberation_meeting<R: Rng>(rng: &mut R, id: &str, cfg: &SynthConfig, grammar: &GrammarRuleSet) -> Meeting {
    let mut m = random_transcript(rng, id, cfg);
    let n_turns = m.turns.len();
    let budget = cfg.max_episodes.max(2);
    let mut made = 1usize;
    let mut first = 0usize;
    let mut issue_no = 0;
    let mut alt_no = 0;
    let mut dec_no = 0;
    while first < n_turns && made < budget {
        let last = (first + rng.gen_range(2..8)).min(n_turns - 1);
        issue_no += 1;
        let mut spec = EpisodeSpec::new(ArgLabel::new(Category::Discussion), TurnSpan::new(first, last));
        if rng.gen_bool(0.8) {
            spec.target = Some(format!("I{issue_no}"));
        }
        let Ok((next, disc)) = m.insert_episode(m.episode_root.as_str(), spec, grammar) else { break };
        m = next;
        made += 1;
        let mut acts: Vec<(EpisodeId, Category)> = Vec::new();
        for t in first..=last {
            if made >= budget {
                break;
            }
            let category = *[
                Category::Issue,
                Category::Propose,
                Category::Propose,
                Category::Accept,
                Category::Reject,
                Category::Justify,
                Category::Decision,
                Category::Ask,
                Category::Provide,
            ]
            .choose(rng)
            .expect("non-empty");
            let label = match category {
                Category::Propose | Category::Accept | Category::Reject => ArgLabel::with_param(category, "alternative"),
                Category::Ask | Category::Provide => ArgLabel::with_param(category, "clarification"),
                c => ArgLabel::new(c),
            };
            let mut spec = EpisodeSpec::new(label, TurnSpan::single(t));
            if category == Category::Propose && rng.gen_bool(0.7) {
                alt_no += 1;
                spec.target = Some(format!("P{alt_no}"));
            }
            if category == Category::Decision && rng.gen_bool(0.7) {
                dec_no += 1;
                spec.target = Some(format!("D{dec_no}"));
            }
            if let Some(p) = m.participants.choose(rng) {
                if rng.gen_bool(0.3) {
                    spec.speaker = Some(p.id.clone());
                }
            }
            let Ok((next, ep)) = m.insert_episode(disc.as_str(), spec, grammar) else { continue };
            m = next;
            made += 1;
            let start = m.episode(ep.as_str()).expect("inserted").start;
            let earlier: Vec<&(EpisodeId, Category)> = acts
                .iter()
                .filter(|(e, _)| m.episode(e.as_str()).is_some_and(|x| x.start < start))
                .collect();
            let wanted: &[Category] = match category {
                Category::Accept | Category::Reject | Category::Decision => &[Category::Propose],
                Category::Justify => &[Category::Accept, Category::Reject, Category::Decision],
                Category::Provide => &[Category::Ask],
                Category::Ask => &[Category::Propose, Category::Issue],
                _ => &[],
            };
            let candidates: Vec<EpisodeId> =
                earlier.iter().filter(|(_, c)| wanted.contains(c)).map(|(e, _)| e.clone()).collect();
            if let Some(target) = candidates.choose(rng) {
                let mut to = vec![target.clone()];
                if rng.gen_ratio(1, 5) {
                    if let Some(other) = candidates.choose(rng) {
                        if other != target {
                            to.push(other.clone());
                        }
                    }
                }
                m = m.add_reply_to(ep.as_str(), &to).expect("targets start earlier");
            }
            acts.push((ep, category));
        }
        first = last + 1;
    }
    m
}
