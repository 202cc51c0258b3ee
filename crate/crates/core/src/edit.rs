//! Line-oriented annotation scripts, so a sequence of edits can be kept
//! under version control and replayed.
//!
//! ```text
//! # comment
//! tags u3 open-option,statement
//! shift u9 u20
//! episode e3 e0 DISCUSSION t6..t12 speaker=C target=I1 topic="printer vendor"
//! reply e12 e5 e11
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::dialogue::{attach_dialogue_acts, mark_topic_shifts, Meeting, TurnSpan, Vocabulary};
use crate::ids::{EpisodeId, ParticipantId, UtteranceId};
use crate::mds::{ArgLabel, EpisodeSpec, GrammarRuleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("edit script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Splits on whitespace; double quotes group (also after `key=`), with
/// `\"` and `\\` escapes inside.
fn tokens(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_token = false;
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                in_token = true;
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e) => cur.push(e),
                            None => return Err("dangling escape".into()),
                        },
                        Some(c) => cur.push(c),
                        None => return Err("unterminated quote".into()),
                    }
                }
            }
            c if c.is_whitespace() => {
                if in_token {
                    out.push(std::mem::take(&mut cur));
                    in_token = false;
                }
            }
            c => {
                in_token = true;
                cur.push(c);
            }
        }
    }
    if in_token {
        out.push(cur);
    }
    Ok(out)
}

pub fn apply_edit_script(
    meeting: &Meeting,
    script: &str,
    grammar: &GrammarRuleSet,
    vocabulary: &Vocabulary,
) -> Result<Meeting, ScriptError> {
    let mut m = meeting.clone();
    for (i, raw) in script.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ScriptError { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks = tokens(trimmed).map_err(err)?;
        match toks[0].as_str() {
            "tags" => {
                if toks.len() != 3 {
                    return Err(err("usage: tags <utterance> <tag,...>".into()));
                }
                let tags: BTreeSet<String> =
                    toks[2].split(',').filter(|t| !t.is_empty()).map(str::to_owned).collect();
                let assignments = BTreeMap::from([(UtteranceId::new(toks[1].as_str()), tags)]);
                m = attach_dialogue_acts(&m, &assignments, vocabulary).map_err(|e| err(e.to_string()))?;
            }
            "shift" => {
                let ids: Vec<UtteranceId> = toks[1..].iter().map(|t| UtteranceId::new(t.as_str())).collect();
                if ids.is_empty() {
                    return Err(err("usage: shift <utterance>...".into()));
                }
                m = mark_topic_shifts(&m, &ids).map_err(|e| err(e.to_string()))?;
            }
            "episode" => {
                if toks.len() < 5 {
                    return Err(err("usage: episode <id> <parent> <LABEL> <span> [key=value]...".into()));
                }
                let mut label: ArgLabel =
                    toks[3].parse().map_err(|e: crate::mds::PatternError| err(e.message))?;
                let span: TurnSpan = toks[4].parse().map_err(err)?;
                let mut spec = EpisodeSpec::new(label.clone(), span).id(&toks[1]);
                for kv in &toks[5..] {
                    let (k, v) = kv.split_once('=').ok_or_else(|| err(format!("expected key=value, got {kv:?}")))?;
                    match k {
                        "speaker" => spec.speaker = Some(ParticipantId::new(v)),
                        "target" => spec.target = Some(v.to_owned()),
                        "topic" => label.topic = Some(v.to_owned()),
                        other => return Err(err(format!("unknown key {other:?}"))),
                    }
                }
                spec.label = label;
                m = m.insert_episode(&toks[2], spec, grammar).map_err(|e| err(e.to_string()))?.0;
            }
            "reply" => {
                if toks.len() < 3 {
                    return Err(err("usage: reply <from> <to>...".into()));
                }
                let to: Vec<EpisodeId> = toks[2..].iter().map(|t| EpisodeId::new(t.as_str())).collect();
                m = m.add_reply_to(&toks[1], &to).map_err(|e| err(e.to_string()))?;
            }
            other => return Err(err(format!("unknown command {other:?}"))),
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_handles_quotes() {
        assert_eq!(
            tokens(r#"episode e1 e0 X t1 topic="a \"b\" c" x"#).unwrap(),
            vec!["episode", "e1", "e0", "X", "t1", r#"topic=a "b" c"#, "x"]
        );
        assert_eq!(tokens(r#"a "" b"#).unwrap(), vec!["a", "", "b"]);
        assert!(tokens(r#"a "open"#).is_err());
    }
}
