use ibismeet_core::dialogue::{parse_transcript, segment_turns, Modality, TranscriptFormat, Vocabulary};
use ibismeet_core::synth::{random_transcript, SynthConfig};
use ibismeet_testkit::{expected, m1, m1_transcript, turn};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn m1_has_fourteen_turns() {
    let m = m1_transcript();
    let exp = expected();
    assert_eq!(m.utterances.len() as u64, exp["utterances"].as_u64().unwrap());
    assert_eq!(m.turns.len() as u64, exp["turns"].as_u64().unwrap());
    // brute-force count of speaker changes over the raw rows
    let changes = m.utterances.windows(2).filter(|w| w[0].speaker != w[1].speaker).count();
    assert_eq!(m.turns.len(), changes + 1);
    assert_eq!(m.participants.len(), 3);
}

#[test]
fn m1_annotation_has_seventeen_episodes() {
    let m = m1();
    assert_eq!(m.episodes.len() as u64, expected()["episodes"].as_u64().unwrap());
    let first_level: Vec<_> = m.root().children.iter().map(|c| c.to_string()).collect();
    assert_eq!(first_level, ["e1", "e3", "e14"]);
    assert_eq!(m.turns[turn("t6")].utterances[0], "u9");
}

#[test]
fn bad_row_is_rejected_with_its_line() {
    let raw = "M\tu1\tA\t0\t1\tspeech\t\tfine\nM\tu2\tB\t2\t1\tspeech\t\tbackwards\n";
    let err = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl())
        .unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

#[test]
fn unknown_tag_is_rejected() {
    let raw = "M\tu1\tA\t0\t1\tspeech\tqestion\twhat\n";
    let err = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl())
        .unwrap_err();
    assert!(err.to_string().contains("qestion"), "{err}");
}

fn seeded(seed: u64) -> ibismeet_core::Meeting {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_transcript(&mut rng, "R", &SynthConfig::default())
}

proptest! {
    #[test]
    fn turns_partition_the_utterances(seed in any::<u64>()) {
        let m = seeded(seed);
        let flat: Vec<_> = m.turns.iter().flat_map(|t| t.utterances.iter().cloned()).collect();
        let ids: Vec<_> = m.utterances.iter().map(|u| u.id.clone()).collect();
        prop_assert_eq!(flat, ids);
        for t in &m.turns {
            prop_assert!(!t.utterances.is_empty());
            for u in &t.utterances {
                prop_assert_eq!(&m.utterance(u.as_str()).unwrap().speaker, &t.speaker);
            }
        }
    }

    #[test]
    fn adjacent_turns_change_speaker(seed in any::<u64>()) {
        let m = seeded(seed);
        let turns = segment_turns(&m.utterances).unwrap();
        prop_assert_eq!(&turns, &m.turns);
        for w in turns.windows(2) {
            if w[0].speaker == w[1].speaker {
                // only a silence may separate two turns of one speaker
                let last = m.utterance(w[0].utterances.last().unwrap().as_str()).unwrap();
                let next = m.utterance(w[1].utterances[0].as_str()).unwrap();
                prop_assert!(last.modality == Modality::Silence || next.modality == Modality::Silence);
            }
        }
    }
}
