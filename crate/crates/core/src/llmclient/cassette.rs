use super::{digest, non_empty, prompt_hash, LlmBackend, LlmError, LlmRequest};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestSummary {
    pub model: String,
    pub stage_tag: String,
    pub prompt_hash: String,
}

/// One line of a cassette file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub request_summary: RequestSummary,
    pub response: String,
    pub recorded_at: String,
}

impl CassetteEntry {
    pub fn new(request: &LlmRequest, response: impl Into<String>) -> Self {
        CassetteEntry {
            digest: digest(request),
            request_summary: RequestSummary {
                model: request.model.clone(),
                stage_tag: request.stage_tag.clone(),
                prompt_hash: prompt_hash(&request.prompt),
            },
            response: response.into(),
            recorded_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("entry serializes")
    }
}

/// Immutable digest -> response index, in file order.
#[derive(Debug, Clone, Default)]
pub struct Cassette {
    entries: Vec<CassetteEntry>,
    index: HashMap<String, usize>,
}

impl Cassette {
    pub fn parse(text: &str) -> Result<Self, LlmError> {
        let mut c = Cassette::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CassetteEntry =
                serde_json::from_str(line).map_err(|e| LlmError::Cassette(format!("line {}: {e}", n + 1)))?;
            c.insert(entry)
                .map_err(|e| LlmError::Cassette(format!("line {}: {e}", n + 1)))?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Cassette(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// An absent file loads as an empty cassette.
    pub fn load_or_empty(path: &Path) -> Result<Self, LlmError> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Cassette::default())
        }
    }

    pub fn insert(&mut self, entry: CassetteEntry) -> Result<(), LlmError> {
        if self.index.contains_key(&entry.digest) {
            return Err(LlmError::Cassette(format!("duplicate digest {}", entry.digest)));
        }
        self.index.insert(entry.digest.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, digest: &str) -> Option<&str> {
        self.index.get(digest).map(|&i| self.entries[i].response.as_str())
    }

    pub fn entries(&self) -> &[CassetteEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        self.entries.iter().map(|e| e.to_line() + "\n").collect()
    }
}

/// Serves responses from a cassette. A miss is an error unless a fallback
/// backend is configured.
pub struct ReplayBackend {
    cassette: Cassette,
    fallback: Option<Box<dyn LlmBackend>>,
    misses: AtomicUsize,
}

impl ReplayBackend {
    pub fn strict(cassette: Cassette) -> Self {
        ReplayBackend {
            cassette,
            fallback: None,
            misses: AtomicUsize::new(0),
        }
    }

    pub fn with_fallback(cassette: Cassette, fallback: Box<dyn LlmBackend>) -> Self {
        ReplayBackend {
            cassette,
            fallback: Some(fallback),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl LlmBackend for ReplayBackend {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        let d = digest(request);
        if let Some(r) = self.cassette.get(&d) {
            return non_empty(r.to_string());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        match &self.fallback {
            Some(b) => b.complete(request),
            None => Err(LlmError::CacheMiss { digest: d }),
        }
    }
}

struct RecordState {
    known: HashMap<String, String>,
    file: File,
}

/// Replays known digests and records every miss served by `inner`,
/// appending one JSONL line per new response.
pub struct RecordingBackend<B> {
    inner: B,
    path: PathBuf,
    state: Mutex<RecordState>,
    recorded: AtomicUsize,
}

impl<B: LlmBackend> RecordingBackend<B> {
    pub fn open(inner: B, path: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let path = path.into();
        let existing = Cassette::load_or_empty(&path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| LlmError::Cassette(format!("{}: {e}", path.display())))?;
        let known = existing
            .entries()
            .iter()
            .map(|e| (e.digest.clone(), e.response.clone()))
            .collect();
        Ok(RecordingBackend {
            inner,
            path,
            state: Mutex::new(RecordState { known, file }),
            recorded: AtomicUsize::new(0),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn recorded(&self) -> usize {
        self.recorded.load(Ordering::Relaxed)
    }
}

impl<B: LlmBackend> LlmBackend for RecordingBackend<B> {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        let d = digest(request);
        if let Some(r) = self.state.lock().expect("cassette lock").known.get(&d) {
            return non_empty(r.clone());
        }
        // the inner call runs unlocked so parallel misses do not serialize
        let response = self.inner.complete(request)?;
        let mut st = self.state.lock().expect("cassette lock");
        if let Some(r) = st.known.get(&d) {
            return Ok(r.clone());
        }
        let line = CassetteEntry::new(request, response.clone()).to_line();
        writeln!(st.file, "{line}").map_err(|e| LlmError::Cassette(format!("{}: {e}", self.path.display())))?;
        st.known.insert(d, response.clone());
        self.recorded.fetch_add(1, Ordering::Relaxed);
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llmclient::ScriptedBackend;

    fn req(p: &str) -> LlmRequest {
        LlmRequest::new("m", p, "post_process")
    }

    #[test]
    fn parse_round_trip_and_lookup() {
        let mut c = Cassette::default();
        c.insert(CassetteEntry::new(&req("a"), "ra")).unwrap();
        c.insert(CassetteEntry::new(&req("b"), "rb")).unwrap();
        let back = Cassette::parse(&c.to_jsonl()).unwrap();
        assert_eq!(back.entries(), c.entries());
        assert_eq!(back.get(&digest(&req("b"))), Some("rb"));
        assert_eq!(back.entries()[0].request_summary.stage_tag, "post_process");
    }

    #[test]
    fn duplicate_digest_is_rejected() {
        let line = CassetteEntry::new(&req("a"), "ra").to_line();
        let err = Cassette::parse(&format!("{line}\n{line}\n")).unwrap_err();
        assert!(matches!(err, LlmError::Cassette(m) if m.contains("line 2") && m.contains("duplicate")));
    }

    #[test]
    fn malformed_line_is_reported() {
        assert!(matches!(Cassette::parse("{not json}\n"), Err(LlmError::Cassette(m)) if m.starts_with("line 1")));
    }

    #[test]
    fn strict_replay_misses_name_the_digest() {
        let mut c = Cassette::default();
        c.insert(CassetteEntry::new(&req("a"), "ra")).unwrap();
        let b = ReplayBackend::strict(c);
        assert_eq!(b.complete(&req("a")).unwrap(), "ra");
        let miss = req("a ");
        assert_eq!(b.complete(&miss), Err(LlmError::CacheMiss { digest: digest(&miss) }));
        assert_eq!(b.misses(), 1);
    }

    #[test]
    fn replay_fallback_serves_misses() {
        let b = ReplayBackend::with_fallback(Cassette::default(), Box::new(ScriptedBackend::new(["live"])));
        assert_eq!(b.complete(&req("x")).unwrap(), "live");
    }

    #[test]
    fn recording_appends_misses_and_replays_them() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        {
            let rec = RecordingBackend::open(ScriptedBackend::new(["one", "two"]), &path).unwrap();
            assert_eq!(rec.complete(&req("a")).unwrap(), "one");
            assert_eq!(rec.complete(&req("a")).unwrap(), "one");
            assert_eq!(rec.complete(&req("b")).unwrap(), "two");
            assert_eq!(rec.recorded(), 2);
        }
        let c = Cassette::load(&path).unwrap();
        assert_eq!(c.len(), 2);
        let replay = ReplayBackend::strict(c);
        assert_eq!(replay.complete(&req("b")).unwrap(), "two");

        let rec = RecordingBackend::open(ScriptedBackend::new(["three"]), &path).unwrap();
        assert_eq!(rec.complete(&req("a")).unwrap(), "one");
        assert_eq!(rec.complete(&req("c")).unwrap(), "three");
        assert_eq!(Cassette::load(&path).unwrap().len(), 3);
    }
}
