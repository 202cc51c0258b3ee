use std::collections::BTreeSet;

use ibismeet_core::dialogue::Vocabulary;
use ibismeet_core::edit::apply_edit_script;
use ibismeet_core::mds::{validate, validate_corpus, GrammarRuleSet, ViolationCode};
use ibismeet_core::synth::{arbitrary_meeting, SynthConfig};
use ibismeet_core::{EpisodeId, Execution, Meeting};
use ibismeet_testkit::validator_oracle::brute_force_violations;
use ibismeet_testkit::{expected, m1, mutation, MUTATIONS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn keys(m: &Meeting, g: &GrammarRuleSet) -> BTreeSet<(String, String, Option<String>)> {
    validate(m, g)
        .violations
        .iter()
        .map(|v| {
            let (code, ep, rel) = v.key();
            (code.as_str().to_owned(), ep, rel)
        })
        .collect()
}

#[test]
fn m1_is_clean() {
    let g = GrammarRuleSet::default_mds();
    let report = validate(&m1(), &g);
    assert!(report.is_valid(), "{:#?}", report.violations);
    assert_eq!(expected()["violations"], 0);
    assert!(brute_force_violations(&m1(), &g).is_empty());
}

#[test]
fn each_mutation_yields_its_code() {
    let g = GrammarRuleSet::default_mds();
    let exp = expected();
    for name in MUTATIONS {
        let report = validate(&mutation(name), &g);
        let codes: Vec<&str> = report.violations.iter().map(|v| v.code.as_str()).collect();
        assert_eq!(codes, [exp["mutations"][name].as_str().unwrap()], "mutation {name}");
    }
}

#[test]
fn accept_explanation_may_not_answer_a_question() {
    let script = "episode e17 e3 ASK(explanation) t10 speaker=C\n\
                  episode e18 e3 ACCEPT(explanation) t12 speaker=A\n\
                  reply e18 e17\n";
    let g = GrammarRuleSet::default_mds();
    let m = apply_edit_script(&m1(), script, &g, &Vocabulary::default_swbd_damsl()).unwrap();
    let report = validate(&m, &g);
    assert_eq!(report.violations.len(), 1, "{:#?}", report.violations);
    assert_eq!(report.violations[0].code, ViolationCode::ReplyUnlicensed);
    assert_eq!(report.violations[0].episode, "e18");
}

#[test]
fn later_reply_edit_is_refused() {
    let err = m1().add_reply_to("e6", &[EpisodeId::new("e15")]).unwrap_err();
    assert!(err.to_string().contains("REPLY_NOT_EARLIER"), "{err}");
}

#[test]
fn context_chain_of_e12() {
    let chain: Vec<String> = m1().context_chain("e12").unwrap().iter().map(ToString::to_string).collect();
    let exp: Vec<String> = serde_json::from_value(expected()["context_chain"]["e12"].clone()).unwrap();
    assert_eq!(chain, exp);
}

#[test]
fn validator_matches_brute_force_on_200_meetings() {
    let g = GrammarRuleSet::default_mds();
    let cfg = SynthConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut with_violations = 0;
    for i in 0..200 {
        let m = arbitrary_meeting(&mut rng, &format!("R{i}"), &cfg, &g);
        assert!(m.episodes.len() <= cfg.max_episodes + 1);
        let got = keys(&m, &g);
        assert_eq!(got, brute_force_violations(&m, &g), "meeting R{i}");
        with_violations += usize::from(!got.is_empty());
    }
    // the generator must actually exercise the rules
    assert!(with_violations > 100, "{with_violations}");
}

#[test]
fn corpus_validation_is_order_preserving_either_way() {
    let g = GrammarRuleSet::default_mds();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corpus: Vec<Meeting> =
        (0..20).map(|i| arbitrary_meeting(&mut rng, &format!("C{i}"), &SynthConfig::default(), &g)).collect();
    let seq = validate_corpus(&corpus, &g, Execution::Sequential);
    let par = validate_corpus(&corpus, &g, Execution::Parallel);
    assert_eq!(seq, par);
    for (m, r) in corpus.iter().zip(&seq) {
        assert_eq!(r.meeting, m.id);
    }
}

#[test]
fn grammar_text_round_trips() {
    let g = GrammarRuleSet::default_mds();
    assert_eq!(GrammarRuleSet::parse(&g.to_text()).unwrap(), g);
}

#[test]
fn grammar_errors_name_the_line() {
    let err = GrammarRuleSet::parse("child MEETING AGENDA\nchild MEETING\n").unwrap_err();
    assert_eq!(err.line, 2);
    let err = GrammarRuleSet::parse("reply ACCEPT(* PROPOSE\n").unwrap_err();
    assert_eq!(err.line, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn context_chain_is_closed(seed in any::<u64>()) {
        let g = GrammarRuleSet::default_mds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = arbitrary_meeting(&mut rng, "P", &SynthConfig::default(), &g);
        for ep in &m.episodes {
            let chain = m.context_chain(ep.id.as_str()).unwrap();
            let set: BTreeSet<&str> = chain.iter().map(EpisodeId::as_str).collect();
            prop_assert!(!set.contains(ep.id.as_str()));
            let mut members = vec![ep.id.as_str()];
            members.extend(set.iter().copied());
            for x in members {
                for t in m.replies_of(x) {
                    prop_assert!(t == &ep.id || set.contains(t.as_str()));
                }
                for a in m.ancestors(x) {
                    prop_assert!(a.id == ep.id || set.contains(a.id.as_str()));
                }
            }
            for w in chain.windows(2) {
                prop_assert!(m.episode(w[0].as_str()).unwrap().start <= m.episode(w[1].as_str()).unwrap().start);
            }
        }
    }

    #[test]
    fn grammar_round_trip_on_random_subsets(mask in proptest::collection::vec(any::<bool>(), 64)) {
        let full = GrammarRuleSet::default_mds();
        let mut g = full.clone();
        let mut bits = mask.iter().cycle();
        g.child_rules.retain(|_| *bits.next().unwrap());
        g.reply_rules.retain(|_| *bits.next().unwrap());
        prop_assert_eq!(GrammarRuleSet::parse(&g.to_text()).unwrap(), g);
    }
}
