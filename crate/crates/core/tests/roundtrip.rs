use ibismeet_core::mds::GrammarRuleSet;
use ibismeet_core::store::{from_canonical, to_canonical, Store, StoreError};
use ibismeet_core::synth::{arbitrary_meeting, deliberation_meeting, SynthConfig};
use ibismeet_core::xml::{export_mds_xml, import_mds_xml, XmlError};
use ibismeet_core::Meeting;
use ibismeet_testkit::{expected, m1};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_meetings(n: usize, seed: u64) -> Vec<Meeting> {
    let g = GrammarRuleSet::default_mds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                arbitrary_meeting(&mut rng, &format!("A{i}"), &SynthConfig::default(), &g)
            } else {
                deliberation_meeting(&mut rng, &format!("D{i}"), &SynthConfig::default(), &g)
            }
        })
        .collect()
}

#[test]
fn store_round_trip_is_value_identity() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    let mut all = vec![m1()];
    all.extend(random_meetings(40, 1));
    for m in &all {
        store.save_meeting(m, false).unwrap();
    }
    let reopened = Store::open(dir.path()).unwrap();
    for m in &all {
        assert_eq!(&reopened.load_meeting(m.id.as_str()).unwrap(), m);
        assert_eq!(&from_canonical(&to_canonical(m)).unwrap(), m);
    }
    assert_eq!(reopened.meeting_ids().len(), all.len());
    assert!(matches!(store.save_meeting(&all[0], false), Err(StoreError::AlreadyExists(_))));
}

#[test]
fn truncated_file_is_reported_as_corrupted() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    store.save_meeting(&m1(), false).unwrap();
    let file = std::fs::read_dir(dir.path().join("meetings"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("M1."))
        .unwrap();
    let raw = std::fs::read(&file).unwrap();
    std::fs::write(&file, &raw[..raw.len() / 2]).unwrap();
    match store.load_meeting("M1") {
        Err(StoreError::Corrupted { path, .. }) => assert_eq!(path, file),
        other => panic!("{other:?}"),
    }
    let err = store.load_meeting("M1").unwrap_err().to_string();
    assert!(err.contains(&file.display().to_string()), "{err}");
}

#[test]
fn m1_xml_has_every_episode_and_edge() {
    let m = m1();
    let xml = String::from_utf8(export_mds_xml(&m)).unwrap();
    assert_eq!(xml.matches("<episode ").count() as u64, expected()["episodes"].as_u64().unwrap());
    let targets: usize = m.reply_to.iter().map(|e| e.to.len()).sum();
    assert_eq!(xml.matches("<reply-to ").count(), m.reply_to.len());
    assert_eq!(xml.matches("<target ").count(), targets);
    let back = import_mds_xml(xml.as_bytes()).unwrap();
    assert_eq!(back, m);
    assert_eq!(export_mds_xml(&back), xml.as_bytes());
}

#[test]
fn xml_round_trip_is_byte_identical_on_random_meetings() {
    for m in random_meetings(60, 2) {
        let first = export_mds_xml(&m);
        let back = import_mds_xml(&first).unwrap_or_else(|e| panic!("{}: {e}", m.id));
        assert_eq!(back, m, "{}", m.id);
        assert_eq!(export_mds_xml(&back), first, "{}", m.id);
    }
}

#[test]
fn broken_xml_is_rejected() {
    let xml = export_mds_xml(&m1());
    assert!(matches!(import_mds_xml(&xml[..xml.len() / 2]), Err(XmlError::Syntax { .. } | XmlError::Content { .. })));
    let text = String::from_utf8(xml).unwrap().replacen("<target ref=\"e5\"/>", "<target ref=\"e99\"/>", 1);
    assert!(import_mds_xml(text.as_bytes()).is_err());
}

fn xml_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            Just('<'),
            Just('&'),
            Just('"'),
            Just('\''),
            Just('\n'),
            Just('\r'),
            Just('\t'),
            Just(']'),
            proptest::char::range(' ', '~'),
            proptest::char::range('\u{a0}', '\u{2fff}'),
        ],
        1..40,
    )
    .prop_map(|cs| cs.into_iter().collect::<String>())
    .prop_filter("speech needs text", |s| !s.trim().is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn awkward_text_survives_both_formats(texts in proptest::collection::vec(xml_text(), 24), title in xml_text()) {
        let mut m = m1();
        for (u, t) in m.utterances.iter_mut().zip(texts) {
            u.text = t;
        }
        m.title = title;
        let xml = export_mds_xml(&m);
        let back = import_mds_xml(&xml).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(export_mds_xml(&back), xml);
        prop_assert_eq!(from_canonical(&to_canonical(&m)).unwrap(), m);
    }
}
