use std::collections::{BTreeMap, BTreeSet};

use crate::ids::UtteranceId;

use super::{DialogueError, Meeting};

const DEFAULT_VOCABULARY: &str = include_str!("../../data/swbd-damsl.vocab");

/// Controlled vocabulary of dialogue-act tag names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tags: BTreeMap<String, String>,
}

impl Vocabulary {
    /// Parses `name<TAB>code<TAB>description` lines; only the name is
    /// required.
    pub fn parse(text: &str) -> Result<Self, DialogueError> {
        let mut tags = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let name = fields.next().unwrap_or_default().trim();
            if name.is_empty() || name.contains(',') || name.contains(char::is_whitespace) {
                return Err(DialogueError::Vocabulary {
                    line: i + 1,
                    reason: format!("bad tag name {name:?}"),
                });
            }
            let code = fields.next().unwrap_or_default().trim().to_owned();
            tags.insert(name.to_owned(), code);
        }
        Ok(Self { tags })
    }

    pub fn default_swbd_damsl() -> Self {
        Self::parse(DEFAULT_VOCABULARY).expect("bundled vocabulary parses")
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.contains_key(tag)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Up to three vocabulary entries closest to `tag` by edit distance.
    pub fn nearest(&self, tag: &str) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .tags
            .keys()
            .map(|name| (strsim::levenshtein(tag, name), name))
            .collect();
        scored.sort();
        scored.into_iter().take(3).map(|(_, n)| n.clone()).collect()
    }

    pub(crate) fn check_all<'a>(
        &self,
        tags: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), DialogueError> {
        for tag in tags {
            if !self.contains(tag) {
                return Err(DialogueError::UnknownTag {
                    tag: tag.to_owned(),
                    suggestions: self.nearest(tag),
                });
            }
        }
        Ok(())
    }
}

/// Merges dialogue-act tags onto utterances.
pub fn attach_dialogue_acts(
    meeting: &Meeting,
    assignments: &BTreeMap<UtteranceId, BTreeSet<String>>,
    vocabulary: &Vocabulary,
) -> Result<Meeting, DialogueError> {
    let mut out = meeting.clone();
    for (uid, tags) in assignments {
        vocabulary.check_all(tags.iter().map(String::as_str))?;
        let utterance = out
            .utterances
            .iter_mut()
            .find(|u| u.id == *uid)
            .ok_or_else(|| DialogueError::UnknownUtterance(uid.clone()))?;
        utterance.da_tags.extend(tags.iter().cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{parse_transcript, TranscriptFormat};

    fn sample() -> Meeting {
        let raw = "M\tu1\tA\t0\t1\tspeech\t\thi\nM\tu2\tB\t1\t2\tspeech\t\tyo\nM\tu3\tA\t2\t3\tspeech\t\tso\n";
        parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl())
            .unwrap()
    }

    fn assign(pairs: &[(&str, &str)]) -> BTreeMap<UtteranceId, BTreeSet<String>> {
        let mut map: BTreeMap<UtteranceId, BTreeSet<String>> = BTreeMap::new();
        for (u, t) in pairs {
            map.entry((*u).into()).or_default().insert((*t).to_owned());
        }
        map
    }

    #[test]
    fn empty_assignment_is_identity() {
        let m = sample();
        let v = Vocabulary::default_swbd_damsl();
        assert_eq!(attach_dialogue_acts(&m, &BTreeMap::new(), &v).unwrap(), m);
    }

    #[test]
    fn repeated_assignment_is_idempotent() {
        let m = sample();
        let v = Vocabulary::default_swbd_damsl();
        let a = assign(&[("u3", "statement")]);
        let once = attach_dialogue_acts(&m, &a, &v).unwrap();
        let twice = attach_dialogue_acts(&once, &a, &v).unwrap();
        assert_eq!(once, twice);
        assert!(once.utterances[2].da_tags.contains("statement"));
    }

    #[test]
    fn unknown_tag_suggests_neighbours() {
        let v = Vocabulary::default_swbd_damsl();
        match attach_dialogue_acts(&sample(), &assign(&[("u3", "zzz")]), &v) {
            Err(DialogueError::UnknownTag { tag, suggestions }) => {
                assert_eq!(tag, "zzz");
                assert_eq!(suggestions.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        match v.check_all(["questoin"]) {
            Err(DialogueError::UnknownTag { suggestions, .. }) => {
                assert_eq!(suggestions[0], "question")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_utterance() {
        let v = Vocabulary::default_swbd_damsl();
        assert!(matches!(
            attach_dialogue_acts(&sample(), &assign(&[("u9", "statement")]), &v),
            Err(DialogueError::UnknownUtterance(_))
        ));
    }
}
