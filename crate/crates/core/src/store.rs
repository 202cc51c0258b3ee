//! Directory store: one canonical JSON document per meeting, a manifest
//! with checksums, the grammar in force and an optional index cache.
//!
//! ```text
//! <root>/manifest.json
//! <root>/meetings/<id>.<sha256 prefix>.json
//! <root>/grammar.grammar      (absent: default grammar)
//! <root>/index.json           (derived, safe to delete)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dialogue::{DialogueError, Meeting};
use crate::ids::MeetingId;
use crate::index::IndexSet;
use crate::mds::{GrammarError, GrammarRuleSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("meeting {0} not found")]
    NotFound(MeetingId),
    #[error("meeting {0} already stored; pass overwrite to replace it")]
    AlreadyExists(MeetingId),
    #[error("meeting id {0:?} is not usable as a file name")]
    BadId(String),
    #[error("corrupted file {}: {reason}", .path.display())]
    Corrupted { path: PathBuf, reason: String },
    #[error("store schema version {found} is newer than supported version {SCHEMA_VERSION}")]
    Version { found: u32 },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Invalid(#[from] DialogueError),
    #[error("grammar line {}: {}", .0.line, .0.message)]
    Grammar(GrammarError),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

/// Canonical document bytes: pretty JSON with a trailing newline.
pub fn to_canonical(meeting: &Meeting) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(meeting).expect("meeting serializes");
    out.push(b'\n');
    out
}

pub fn from_canonical(raw: &[u8]) -> Result<Meeting, DialogueError> {
    let meeting: Meeting = serde_json::from_slice(raw)?;
    meeting.check_integrity()?;
    Ok(meeting)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    meetings: BTreeMap<String, ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct IndexCache {
    manifest_sha256: String,
    index: IndexSet,
}

/// Single-writer directory store. Every write goes to a temporary file
/// first and is published by rename, so a reader sees the old or the new
/// state, never a partial one.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    manifest: Manifest,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(path))?;
    tmp.as_file().sync_all().map_err(io(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io { path: path.to_owned(), source: e.error })?;
    Ok(())
}

impl Store {
    /// Opens a store, creating an empty one if `root` has no manifest.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let root = root.into();
        let meetings_dir = root.join("meetings");
        fs::create_dir_all(&meetings_dir).map_err(io(&meetings_dir))?;
        let path = root.join("manifest.json");
        let manifest = match fs::read(&path) {
            Ok(raw) => serde_json::from_slice::<Manifest>(&raw).map_err(|e| StoreError::Corrupted {
                path: path.clone(),
                reason: e.to_string(),
            })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Manifest { schema_version: SCHEMA_VERSION, meetings: BTreeMap::new() }
            }
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        if manifest.schema_version > SCHEMA_VERSION {
            return Err(StoreError::Version { found: manifest.schema_version });
        }
        Ok(Store { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn meeting_ids(&self) -> Vec<MeetingId> {
        self.manifest.meetings.keys().map(MeetingId::new).collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.manifest.meetings.contains_key(id)
    }

    /// Writes the meeting document under its content-addressed name.
    fn stage(&self, meeting: &Meeting) -> Result<ManifestEntry, StoreError> {
        let bytes = to_canonical(meeting);
        let sha = sha256_hex(&bytes);
        let file = format!("meetings/{}.{}.json", meeting.id, &sha[..16]);
        write_atomic(&self.root.join(&file), &bytes)?;
        Ok(ManifestEntry { file, sha256: sha })
    }

    fn commit(&mut self, manifest: Manifest) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&self.root.join("manifest.json"), &bytes)?;
        self.manifest = manifest;
        Ok(())
    }

    pub fn save_meeting(&mut self, meeting: &Meeting, overwrite: bool) -> Result<(), StoreError> {
        if !valid_id(meeting.id.as_str()) {
            return Err(StoreError::BadId(meeting.id.to_string()));
        }
        if !overwrite && self.contains(meeting.id.as_str()) {
            return Err(StoreError::AlreadyExists(meeting.id.clone()));
        }
        meeting.check_integrity()?;
        let entry = self.stage(meeting)?;
        let mut next = self.manifest.clone();
        next.schema_version = SCHEMA_VERSION;
        let old = next.meetings.insert(meeting.id.to_string(), entry.clone());
        self.commit(next)?;
        if let Some(old) = old.filter(|o| o.file != entry.file) {
            // an unreferenced old version is harmless if this fails
            let _ = fs::remove_file(self.root.join(old.file));
        }
        Ok(())
    }

    pub fn load_meeting(&self, id: &str) -> Result<Meeting, StoreError> {
        let entry = self
            .manifest
            .meetings
            .get(id)
            .ok_or_else(|| StoreError::NotFound(MeetingId::new(id)))?;
        let path = self.root.join(&entry.file);
        let raw = fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => StoreError::Corrupted {
                path: path.clone(),
                reason: "file listed in the manifest is missing".into(),
            },
            _ => StoreError::Io { path: path.clone(), source: e },
        })?;
        let actual = sha256_hex(&raw);
        if actual != entry.sha256 {
            return Err(StoreError::Corrupted {
                path,
                reason: format!("checksum mismatch: expected {}, found {actual}", entry.sha256),
            });
        }
        from_canonical(&raw).map_err(|e| StoreError::Corrupted { path, reason: e.to_string() })
    }

    pub fn load_all(&self) -> Result<Vec<Meeting>, StoreError> {
        self.manifest.meetings.keys().map(|id| self.load_meeting(id)).collect()
    }

    pub fn delete_meeting(&mut self, id: &str) -> Result<(), StoreError> {
        let mut next = self.manifest.clone();
        let entry = next.meetings.remove(id).ok_or_else(|| StoreError::NotFound(MeetingId::new(id)))?;
        self.commit(next)?;
        let _ = fs::remove_file(self.root.join(entry.file));
        Ok(())
    }

    pub fn grammar(&self) -> Result<GrammarRuleSet, StoreError> {
        let path = self.root.join("grammar.grammar");
        match fs::read_to_string(&path) {
            Ok(text) => GrammarRuleSet::parse(&text).map_err(StoreError::Grammar),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(GrammarRuleSet::default_mds()),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }

    pub fn save_grammar(&mut self, grammar: &GrammarRuleSet) -> Result<(), StoreError> {
        write_atomic(&self.root.join("grammar.grammar"), grammar.to_text().as_bytes())
    }

    fn manifest_digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(&self.manifest).expect("manifest serializes"))
    }

    pub fn save_index_cache(&self, index: &IndexSet) -> Result<(), StoreError> {
        let cache = IndexCache { manifest_sha256: self.manifest_digest(), index: index.clone() };
        let bytes = serde_json::to_vec(&cache).expect("index serializes");
        write_atomic(&self.root.join("index.json"), &bytes)
    }

    /// The cached index, if present and built from the current manifest.
    pub fn load_index_cache(&self) -> Option<IndexSet> {
        let raw = fs::read(self.root.join("index.json")).ok()?;
        let cache: IndexCache = serde_json::from_slice(&raw).ok()?;
        (cache.manifest_sha256 == self.manifest_digest()).then_some(cache.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{parse_transcript, TranscriptFormat, Vocabulary};

    fn meeting(id: &str) -> Meeting {
        let raw = format!("{id}\tu1\tA\t0\t1\tspeech\t\thello\n{id}\tu2\tB\t1\t2\tspeech\t\tworld\n");
        parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl()).unwrap()
    }

    #[test]
    fn interrupted_save_keeps_old_version() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let old = meeting("M");
        store.save_meeting(&old, false).unwrap();
        let mut new = old.clone();
        new.title = "changed".into();
        // the document is written but the manifest never switches over
        store.stage(&new).unwrap();
        let reopened = Store::open(dir.path()).unwrap();
        assert_eq!(reopened.load_meeting("M").unwrap(), old);
    }

    #[test]
    fn overwrite_must_be_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store.save_meeting(&meeting("M"), false).unwrap();
        assert!(matches!(store.save_meeting(&meeting("M"), false), Err(StoreError::AlreadyExists(_))));
        store.save_meeting(&meeting("M"), true).unwrap();
        assert_eq!(fs::read_dir(dir.path().join("meetings")).unwrap().count(), 1);
    }

    #[test]
    fn newer_schema_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("manifest.json"), r#"{"schema_version": 99, "meetings": {}}"#).unwrap();
        assert!(matches!(Store::open(dir.path()), Err(StoreError::Version { found: 99 })));
    }

    #[test]
    fn bad_ids_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let mut m = meeting("M");
        m.id = MeetingId::new("../evil");
        assert!(matches!(store.save_meeting(&m, false), Err(StoreError::BadId(_))));
    }

    #[test]
    fn index_cache_tracks_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store.save_meeting(&meeting("M"), false).unwrap();
        let index = IndexSet::default();
        store.save_index_cache(&index).unwrap();
        assert_eq!(store.load_index_cache(), Some(index));
        store.save_meeting(&meeting("N"), false).unwrap();
        assert_eq!(store.load_index_cache(), None);
    }
}
