//! Sequential against rayon execution for the corpus-wide operations.
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ibismeet_core::assist::{suggest_corpus, SuggestConfig};
use ibismeet_core::index::{build_indexes, IndexConfig};
use ibismeet_core::mds::{validate_corpus, GrammarRuleSet};
use ibismeet_core::synth::{deliberation_meeting, random_transcript, SynthConfig};
use ibismeet_core::text::Analyzer;
use ibismeet_core::{Execution, Meeting};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus(n: usize, annotated: bool) -> Vec<Meeting> {
    let g = GrammarRuleSet::default_mds();
    let cfg = SynthConfig { max_utterances: 120, ..SynthConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..n)
        .map(|i| {
            let id = format!("B{i}");
            if annotated {
                deliberation_meeting(&mut rng, &id, &cfg, &g)
            } else {
                random_transcript(&mut rng, &id, &cfg)
            }
        })
        .collect()
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench(c: &mut Criterion) {
    let g = GrammarRuleSet::default_mds();
    let analyzer = Analyzer::default();
    let annotated = corpus(200, true);
    let raw = corpus(200, false);

    let mut group = c.benchmark_group("build_indexes");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| build_indexes(&annotated, &IndexConfig::default(), mode))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("validate_corpus");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| validate_corpus(&annotated, &g, mode))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("suggest_corpus");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| suggest_corpus(&raw, &g, &SuggestConfig::default(), &analyzer, mode))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
