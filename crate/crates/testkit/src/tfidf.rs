//! Direct TF-IDF cosine over whole meetings: no inverted index, every
//! meeting scored against the query term by term.

use std::collections::BTreeMap;

use ibismeet_core::text::Analyzer;
use ibismeet_core::Meeting;

fn counts(analyzer: &Analyzer, text: &str) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for s in analyzer.stems(text) {
        *out.entry(s).or_insert(0.0) += 1.0;
    }
    out
}

/// Meeting-level scores for `query`, best first; meetings scoring 0 are
/// left out.
pub fn meeting_scores(corpus: &[Meeting], query: &str, analyzer: &Analyzer) -> Vec<(String, f64)> {
    let docs: Vec<(String, BTreeMap<String, f64>)> = corpus
        .iter()
        .map(|m| {
            let text: Vec<&str> = m.utterances.iter().map(|u| u.text.as_str()).collect();
            (m.id.to_string(), counts(analyzer, &text.join(" ")))
        })
        .collect();
    let n = docs.len() as f64;
    let idf = |t: &str| {
        let df = docs.iter().filter(|(_, c)| c.contains_key(t)).count() as f64;
        if df == 0.0 {
            0.0
        } else {
            (1.0 + n / df).ln()
        }
    };
    let q = counts(analyzer, query);
    let qv: BTreeMap<&str, f64> = q.iter().filter(|(t, _)| idf(t) > 0.0).map(|(t, k)| (t.as_str(), k * idf(t))).collect();
    let qn = qv.values().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::new();
    for (id, c) in &docs {
        let dn = c.iter().map(|(t, k)| (k * idf(t)).powi(2)).sum::<f64>().sqrt();
        let dot: f64 = qv.iter().map(|(t, w)| w * c.get(*t).copied().unwrap_or(0.0) * idf(t)).sum();
        if dot > 0.0 {
            out.push((id.clone(), dot / (qn * dn)));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
