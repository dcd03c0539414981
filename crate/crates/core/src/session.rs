//! Versioned documents. Every accepted edit reparses the whole text, so a
//! snapshot's tree is always exactly `parse_blocks` of its text.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, Weak};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blockparse::{parse_blocks, BlockTree, ParseDiagnostic};
use crate::grammar::{GrammarError, GrammarSet, StructureGrammar};
use crate::source::SourceText;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("E_ENCODING: text is not valid UTF-8 ({0})")]
    Encoding(String),
    #[error("E_UNKNOWN_GRAMMAR: no grammar named {0:?}")]
    UnknownGrammar(String),
    #[error("E_STALE: edit is based on version {base}, document is at version {current}")]
    Stale { base: u64, current: u64 },
    #[error("E_RANGE: bytes {start}..{end} are outside the text of length {len}")]
    Range { start: usize, end: usize, len: usize },
    #[error("E_BOUNDARY: byte {0} is not on a character boundary")]
    Boundary(usize),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Encoding(_) => "E_ENCODING",
            SessionError::UnknownGrammar(_) => "E_UNKNOWN_GRAMMAR",
            SessionError::Stale { .. } => "E_STALE",
            SessionError::Range { .. } => "E_RANGE",
            SessionError::Boundary(_) => "E_BOUNDARY",
        }
    }
}

/// Replace `start_byte..end_byte` with `replacement`, computed against `base_version`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub start_byte: usize,
    pub end_byte: usize,
    pub replacement: String,
    pub base_version: u64,
}

/// Hex SHA-256 of the text.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Immutable view of one document version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub version: u64,
    pub source: SourceText,
    pub tree: BlockTree,
    pub diagnostics: Vec<ParseDiagnostic>,
    pub digest: String,
}

impl Snapshot {
    fn build(version: u64, text: String, grammar: &StructureGrammar) -> Snapshot {
        let source = SourceText::new(text);
        let (tree, diagnostics) = parse_blocks(&source, grammar);
        let digest = digest(source.as_str());
        Snapshot {
            version,
            source,
            tree,
            diagnostics,
            digest,
        }
    }

    pub fn text(&self) -> &str {
        self.source.as_str()
    }
}

type Listener = Box<dyn Fn(&Arc<Snapshot>) + Send + Sync>;

/// A document open for editing. Edits are serialized by an internal lock; listeners
/// run under that lock, so they observe versions in order.
pub struct Session {
    grammar: Arc<StructureGrammar>,
    current: Mutex<Arc<Snapshot>>,
    listeners: Mutex<Vec<(u64, Listener)>>,
    next_listener: AtomicU64,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("grammar", &self.grammar.name)
            .field("version", &self.snapshot().version)
            .finish()
    }
}

impl Session {
    pub fn open(text: impl Into<String>, grammar: Arc<StructureGrammar>) -> Session {
        let snapshot = Snapshot::build(0, text.into(), &grammar);
        Session {
            grammar,
            current: Mutex::new(Arc::new(snapshot)),
            listeners: Mutex::new(Vec::new()),
            next_listener: AtomicU64::new(0),
        }
    }

    /// Opens raw bytes with the grammar registered under `grammar_name`.
    pub fn open_bytes(bytes: &[u8], grammar_name: &str, grammars: &GrammarSet) -> Result<Session, SessionError> {
        let grammar = grammars.get(grammar_name).map_err(|e| match e {
            GrammarError::Unknown(name) => SessionError::UnknownGrammar(name),
            other => SessionError::UnknownGrammar(other.to_string()),
        })?;
        let text = std::str::from_utf8(bytes).map_err(|e| SessionError::Encoding(e.to_string()))?;
        Ok(Session::open(text, grammar))
    }

    pub fn grammar(&self) -> &Arc<StructureGrammar> {
        &self.grammar
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.lock().expect("session lock").clone()
    }

    pub fn version(&self) -> u64 {
        self.snapshot().version
    }

    /// Splices the edit into the text and publishes the reparsed snapshot to every
    /// listener before returning it. Rejected edits change nothing.
    pub fn apply_edit(&self, edit: &Edit) -> Result<Arc<Snapshot>, SessionError> {
        let mut current = self.current.lock().expect("session lock");
        if edit.base_version != current.version {
            return Err(SessionError::Stale {
                base: edit.base_version,
                current: current.version,
            });
        }
        let text = current.text();
        if edit.start_byte > edit.end_byte || edit.end_byte > text.len() {
            return Err(SessionError::Range {
                start: edit.start_byte,
                end: edit.end_byte,
                len: text.len(),
            });
        }
        for b in [edit.start_byte, edit.end_byte] {
            if !text.is_char_boundary(b) {
                return Err(SessionError::Boundary(b));
            }
        }
        let mut new_text = String::with_capacity(text.len() + edit.replacement.len());
        new_text.push_str(&text[..edit.start_byte]);
        new_text.push_str(&edit.replacement);
        new_text.push_str(&text[edit.end_byte..]);
        let next = Arc::new(Snapshot::build(current.version + 1, new_text, &self.grammar));
        *current = next.clone();
        for (_, listener) in self.listeners.lock().expect("listener lock").iter() {
            listener(&next);
        }
        Ok(next)
    }

    /// Replaces the whole text as one edit.
    pub fn replace_all(&self, base_version: u64, text: impl Into<String>) -> Result<Arc<Snapshot>, SessionError> {
        let len = self.snapshot().text().len();
        self.apply_edit(&Edit {
            start_byte: 0,
            end_byte: len,
            replacement: text.into(),
            base_version,
        })
    }

    /// Registers `listener` for every snapshot published after this call. The
    /// registration lasts until the returned handle is dropped.
    pub fn subscribe(self: &Arc<Self>, listener: impl Fn(&Arc<Snapshot>) + Send + Sync + 'static) -> Subscription {
        let id = self.next_listener.fetch_add(1, Ordering::Relaxed);
        self.listeners
            .lock()
            .expect("listener lock")
            .push((id, Box::new(listener)));
        Subscription {
            session: Arc::downgrade(self),
            id,
        }
    }

    pub fn listener_count(&self) -> usize {
        self.listeners.lock().expect("listener lock").len()
    }
}

#[must_use = "dropping the subscription unregisters the listener"]
pub struct Subscription {
    session: Weak<Session>,
    id: u64,
}

impl Drop for Subscription {
    fn drop(&mut self) {
        if let Some(session) = self.session.upgrade() {
            session
                .listeners
                .lock()
                .expect("listener lock")
                .retain(|(id, _)| *id != self.id);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "void f() {\n  if (x > 0) {\n    y = 1;\n  }\n}\n";

    fn c() -> Arc<StructureGrammar> {
        Arc::new(StructureGrammar::c())
    }

    #[test]
    fn open_empty_and_sample() {
        let s = Session::open("", c());
        let snap = s.snapshot();
        assert_eq!(snap.version, 0);
        assert!(snap.tree.is_empty());
        assert_eq!(snap.digest, digest(""));
        assert_eq!(
            snap.digest,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );

        let s = Session::open(SAMPLE, c());
        let (tree, diags) = parse_blocks(&SourceText::new(SAMPLE), &StructureGrammar::c());
        assert_eq!(s.snapshot().tree, tree);
        assert_eq!(s.snapshot().diagnostics, diags);
    }

    #[test]
    fn open_errors() {
        let set = GrammarSet::builtin();
        let err = Session::open_bytes(&[0x66, 0xff, 0x00], "c", &set).unwrap_err();
        assert_eq!(err.code(), "E_ENCODING");
        let err = Session::open_bytes(b"x", "fortran", &set).unwrap_err();
        assert_eq!(err.code(), "E_UNKNOWN_GRAMMAR");
        assert!(Session::open_bytes(b"x", "c", &set).is_ok());
    }

    #[test]
    fn commenting_out_inner_opener() {
        let s = Session::open(SAMPLE, c());
        let at = SAMPLE.find("  if").unwrap();
        let snap = s
            .apply_edit(&Edit {
                start_byte: at,
                end_byte: at,
                replacement: "//".into(),
                base_version: 0,
            })
            .unwrap();
        assert_eq!(snap.version, 1);
        assert_eq!(snap.tree.len(), 1);
        let (tree, _) = parse_blocks(&snap.source, &StructureGrammar::c());
        assert_eq!(snap.tree, tree);
    }

    #[test]
    fn empty_edit_bumps_version_only() {
        let s = Session::open(SAMPLE, c());
        let before = s.snapshot();
        let after = s
            .apply_edit(&Edit {
                start_byte: 3,
                end_byte: 3,
                replacement: String::new(),
                base_version: 0,
            })
            .unwrap();
        assert_eq!(after.version, 1);
        assert_eq!(after.digest, before.digest);
        assert_eq!(after.tree, before.tree);
    }

    #[test]
    fn rejected_edits_change_nothing() {
        let s = Session::open("é{}", c());
        let edit = |start, end, base| Edit {
            start_byte: start,
            end_byte: end,
            replacement: "x".into(),
            base_version: base,
        };
        assert_eq!(s.apply_edit(&edit(0, 99, 0)).unwrap_err().code(), "E_RANGE");
        assert_eq!(s.apply_edit(&edit(2, 1, 0)).unwrap_err().code(), "E_RANGE");
        assert_eq!(s.apply_edit(&edit(1, 1, 0)).unwrap_err().code(), "E_BOUNDARY");
        assert_eq!(s.apply_edit(&edit(0, 0, 3)).unwrap_err().code(), "E_STALE");
        assert_eq!(s.version(), 0);
        assert_eq!(s.snapshot().text(), "é{}");
    }

    #[test]
    fn listeners_see_every_version_in_order() {
        let s = Arc::new(Session::open("", c()));
        let seen = Arc::new(Mutex::new(Vec::new()));
        let sink = seen.clone();
        let sub = s.subscribe(move |snap| sink.lock().unwrap().push(snap.version));
        for v in 0..5 {
            s.replace_all(v, format!("{{{v}}}")).unwrap();
        }
        assert_eq!(*seen.lock().unwrap(), vec![1, 2, 3, 4, 5]);
        drop(sub);
        assert_eq!(s.listener_count(), 0);
        s.replace_all(5, "").unwrap();
        assert_eq!(seen.lock().unwrap().len(), 5);
    }
}
