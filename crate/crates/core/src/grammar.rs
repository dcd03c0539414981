//! Per-language structure grammars: which delimiters open and close a block,
//! how comments and strings look, and which keywords name which kind of block.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

pub const C_GRAMMAR: &str = include_str!("../grammars/c.grammar.json");
pub const JAVA_GRAMMAR: &str = include_str!("../grammars/java.grammar.json");
pub const BRACE_GRAMMAR: &str = include_str!("../grammars/brace.grammar.json");

/// File name suffix of grammar documents inside a grammars directory.
pub const GRAMMAR_FILE_SUFFIX: &str = ".grammar.json";

/// What kind of control structure a block represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Branch,
    Loop,
    Guard,
    Callable,
    TypeDecl,
    ConditionalRegion,
    Generic,
}

impl BlockKind {
    pub const ALL: [BlockKind; 7] = [
        BlockKind::Branch,
        BlockKind::Loop,
        BlockKind::Guard,
        BlockKind::Callable,
        BlockKind::TypeDecl,
        BlockKind::ConditionalRegion,
        BlockKind::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Branch => "branch",
            BlockKind::Loop => "loop",
            BlockKind::Guard => "guard",
            BlockKind::Callable => "callable",
            BlockKind::TypeDecl => "type_decl",
            BlockKind::ConditionalRegion => "conditional_region",
            BlockKind::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<BlockKind> {
        BlockKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StringDelimiter {
    pub open: String,
    pub close: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDelimiter {
    pub open: String,
    pub close: String,
}

/// Directive spellings for conditional compilation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conditionals {
    #[serde(rename = "if")]
    pub if_: String,
    pub ifdef: String,
    pub ifndef: String,
    #[serde(rename = "else")]
    pub else_: String,
    pub elif: String,
    pub end: String,
}

impl Default for Conditionals {
    fn default() -> Self {
        Conditionals {
            if_: "#if".into(),
            ifdef: "#ifdef".into(),
            ifndef: "#ifndef".into(),
            else_: "#else".into(),
            elif: "#elif".into(),
            end: "#endif".into(),
        }
    }
}

/// A loaded structure grammar. Serializes back to the config schema it was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureGrammar {
    pub name: String,
    pub extensions: Vec<String>,
    pub line_comments: Vec<String>,
    pub block_comments: Vec<(String, String)>,
    pub strings: Vec<StringDelimiter>,
    pub blocks: Vec<BlockDelimiter>,
    pub kinds: BTreeMap<String, BlockKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<String>,
    pub default_type: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditionals: Option<Conditionals>,
}

impl StructureGrammar {
    /// Re-serializes the grammar in the config document schema.
    pub fn to_config_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grammar serializes")
    }

    /// Whether `word` is reserved: a kind keyword, a plain keyword or a type word.
    pub fn is_reserved(&self, word: &str) -> bool {
        self.kinds.contains_key(word) || self.is_keyword(word) || self.is_type_word(word)
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.iter().any(|k| k == word)
    }

    pub fn is_type_word(&self, word: &str) -> bool {
        self.types.iter().any(|t| t == word)
    }

    pub fn matches_path(&self, path: &Path) -> bool {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        self.extensions.iter().any(|ext| name.ends_with(ext.as_str()))
    }

    pub fn c() -> StructureGrammar {
        load_grammar(C_GRAMMAR).expect("shipped c grammar is valid")
    }

    pub fn java() -> StructureGrammar {
        load_grammar(JAVA_GRAMMAR).expect("shipped java grammar is valid")
    }

    pub fn brace() -> StructureGrammar {
        load_grammar(BRACE_GRAMMAR).expect("shipped brace grammar is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrammarDiagnostic {
    /// Slash-separated field path, e.g. `blocks/0/close`. Empty for the document root.
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for GrammarDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let path = if self.path.is_empty() { "(root)" } else { &self.path };
        write!(f, "{sev}: {path}: {}", self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GrammarError {
    #[error("E_GRAMMAR: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<GrammarDiagnostic>),
    #[error("E_GRAMMAR: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("E_UNKNOWN_GRAMMAR: no grammar named {0:?}")]
    Unknown(String),
}

impl GrammarError {
    pub fn code(&self) -> &'static str {
        match self {
            GrammarError::Invalid(_) | GrammarError::Io { .. } => "E_GRAMMAR",
            GrammarError::Unknown(_) => "E_UNKNOWN_GRAMMAR",
        }
    }
}

/// Loads a grammar document. Fails with every error found; warnings are dropped on success.
pub fn load_grammar(config_text: &str) -> Result<StructureGrammar, Vec<GrammarDiagnostic>> {
    let (grammar, diags) = check_grammar(config_text);
    match grammar {
        Some(g) => Ok(g),
        None => Err(diags),
    }
}

/// Validates a grammar document, returning the grammar (when there are no errors)
/// together with all diagnostics, including warnings.
pub fn check_grammar(config_text: &str) -> (Option<StructureGrammar>, Vec<GrammarDiagnostic>) {
    let doc: Json = match serde_json::from_str(config_text) {
        Ok(doc) => doc,
        Err(e) => {
            return (
                None,
                vec![GrammarDiagnostic {
                    path: String::new(),
                    message: format!("malformed document: {e}"),
                    severity: Severity::Error,
                }],
            )
        }
    };
    let mut cx = Checker::default();
    let grammar = cx.grammar(&doc);
    let failed = cx.diags.iter().any(|d| d.severity == Severity::Error);
    if failed {
        (None, cx.diags)
    } else {
        (grammar, cx.diags)
    }
}

/// Identifier found by the backward scan in front of a block opener.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Introducer {
    pub word: String,
    /// A balanced parenthesis group sat between the word and the opener.
    pub has_params: bool,
    /// The word before `word`, when nothing but whitespace separates them.
    pub preceding_word: Option<String>,
}

pub fn classify_block_kind(grammar: &StructureGrammar, introducer: Option<&Introducer>) -> BlockKind {
    let Some(intro) = introducer else {
        return BlockKind::Generic;
    };
    if let Some(kind) = grammar.kinds.get(&intro.word) {
        return *kind;
    }
    if intro.has_params {
        return BlockKind::Callable;
    }
    // `class Name {` style headers
    if let Some(prev) = &intro.preceding_word {
        if grammar.kinds.get(prev) == Some(&BlockKind::TypeDecl) {
            return BlockKind::TypeDecl;
        }
    }
    BlockKind::Generic
}

/// The grammars known to a process, keyed by name.
#[derive(Debug, Clone, Default)]
pub struct GrammarSet {
    grammars: BTreeMap<String, Arc<StructureGrammar>>,
}

impl GrammarSet {
    pub fn builtin() -> GrammarSet {
        let mut set = GrammarSet::default();
        set.insert(StructureGrammar::c());
        set.insert(StructureGrammar::java());
        set.insert(StructureGrammar::brace());
        set
    }

    /// Loads every `<name>.grammar.json` in `dir`. The first invalid file aborts the load.
    pub fn load_dir(dir: &Path) -> Result<GrammarSet, GrammarError> {
        let io_err = |source| GrammarError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            let is_grammar = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(GRAMMAR_FILE_SUFFIX));
            if is_grammar {
                paths.push(path);
            }
        }
        paths.sort();
        let mut set = GrammarSet::default();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|source| GrammarError::Io {
                path: path.display().to_string(),
                source,
            })?;
            set.insert(load_grammar(&text).map_err(GrammarError::Invalid)?);
        }
        Ok(set)
    }

    pub fn insert(&mut self, grammar: StructureGrammar) {
        self.grammars.insert(grammar.name.clone(), Arc::new(grammar));
    }

    pub fn get(&self, name: &str) -> Result<Arc<StructureGrammar>, GrammarError> {
        self.grammars
            .get(name)
            .cloned()
            .ok_or_else(|| GrammarError::Unknown(name.to_string()))
    }

    pub fn for_path(&self, path: &Path) -> Option<Arc<StructureGrammar>> {
        self.grammars.values().find(|g| g.matches_path(path)).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.grammars.keys().map(String::as_str)
    }
}

fn is_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn is_language_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '_' | '+' | '-'))
}

// JSON value that keeps object keys in document order, duplicates included.
#[derive(Debug, Clone, PartialEq)]
enum Json {
    Null,
    Bool(bool),
    Number(f64),
    String(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    fn type_name(&self) -> &'static str {
        match self {
            Json::Null => "null",
            Json::Bool(_) => "a boolean",
            Json::Number(_) => "a number",
            Json::String(_) => "a string",
            Json::Array(_) => "a list",
            Json::Object(_) => "an object",
        }
    }
}

impl<'de> Deserialize<'de> for Json {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Json, D::Error> {
        struct JsonVisitor;

        impl<'de> Visitor<'de> for JsonVisitor {
            type Value = Json;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON value")
            }

            fn visit_unit<E: de::Error>(self) -> Result<Json, E> {
                Ok(Json::Null)
            }
            fn visit_bool<E: de::Error>(self, v: bool) -> Result<Json, E> {
                Ok(Json::Bool(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Json, E> {
                Ok(Json::Number(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Json, E> {
                Ok(Json::Number(v as f64))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Json, E> {
                Ok(Json::Number(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Json, E> {
                Ok(Json::String(v.to_string()))
            }
            fn visit_string<E: de::Error>(self, v: String) -> Result<Json, E> {
                Ok(Json::String(v))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Json, A::Error> {
                let mut items = Vec::new();
                while let Some(item) = seq.next_element()? {
                    items.push(item);
                }
                Ok(Json::Array(items))
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Json, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Json>()? {
                    entries.push((k, v));
                }
                Ok(Json::Object(entries))
            }
        }

        deserializer.deserialize_any(JsonVisitor)
    }
}

#[derive(Default)]
struct Checker {
    diags: Vec<GrammarDiagnostic>,
}

const KNOWN_FIELDS: [&str; 11] = [
    "name",
    "extensions",
    "lineComments",
    "blockComments",
    "strings",
    "blocks",
    "kinds",
    "keywords",
    "types",
    "defaultType",
    "conditionals",
];

impl Checker {
    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(GrammarDiagnostic {
            path: path.into(),
            message: message.into(),
            severity: Severity::Error,
        });
    }

    fn warning(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(GrammarDiagnostic {
            path: path.into(),
            message: message.into(),
            severity: Severity::Warning,
        });
    }

    fn grammar(&mut self, doc: &Json) -> Option<StructureGrammar> {
        let Json::Object(entries) = doc else {
            self.error("", format!("expected an object, found {}", doc.type_name()));
            return None;
        };
        let mut fields: BTreeMap<&str, &Json> = BTreeMap::new();
        for (key, value) in entries {
            if fields.insert(key.as_str(), value).is_some() {
                self.error(key.clone(), "duplicate field");
            }
            if !KNOWN_FIELDS.contains(&key.as_str()) {
                self.warning(key.clone(), "unknown field ignored");
            }
        }

        let name = match fields.get("name") {
            Some(v) => self.string(v, "name").and_then(|s| {
                if is_language_name(&s) {
                    Some(s)
                } else {
                    self.error("name", format!("{s:?} is not a lowercase language identifier"));
                    None
                }
            }),
            None => {
                self.error("name", "missing required field");
                None
            }
        };

        let extensions = match fields.get("extensions") {
            Some(v) => self.string_list(v, "extensions", |cx, path, s| {
                if s.len() > 1 && s.starts_with('.') {
                    true
                } else {
                    cx.error(path, format!("extension {s:?} must start with \".\""));
                    false
                }
            }),
            None => {
                self.error("extensions", "missing required field");
                Vec::new()
            }
        };

        let line_comments = fields
            .get("lineComments")
            .map(|v| self.string_list(v, "lineComments", non_empty))
            .unwrap_or_default();

        let block_comments = fields
            .get("blockComments")
            .map(|v| self.block_comments(v))
            .unwrap_or_default();

        let strings = fields
            .get("strings")
            .map(|v| self.strings(v))
            .unwrap_or_default();

        let blocks = match fields.get("blocks") {
            Some(v) => self.blocks(v),
            None => {
                self.error("blocks", "missing required field");
                Vec::new()
            }
        };

        let kinds = fields.get("kinds").map(|v| self.kinds(v)).unwrap_or_default();
        let keywords = fields
            .get("keywords")
            .map(|v| self.string_list(v, "keywords", word))
            .unwrap_or_default();
        let types = fields
            .get("types")
            .map(|v| self.string_list(v, "types", word))
            .unwrap_or_default();

        let default_type = match fields.get("defaultType") {
            Some(v) => self.string(v, "defaultType").filter(|s| {
                let ok = is_word(s);
                if !ok {
                    self.error("defaultType", format!("{s:?} is not a word"));
                }
                ok
            }),
            None => Some("int".to_string()),
        };

        let conditionals = match fields.get("conditionals") {
            None | Some(Json::Null) => Some(None),
            Some(v) => self.conditionals(v).map(Some),
        };

        Some(StructureGrammar {
            name: name?,
            extensions,
            line_comments,
            block_comments,
            strings,
            blocks,
            kinds,
            keywords,
            types,
            default_type: default_type?,
            conditionals: conditionals?,
        })
    }

    fn string(&mut self, v: &Json, path: &str) -> Option<String> {
        match v {
            Json::String(s) => Some(s.clone()),
            other => {
                self.error(path, format!("expected a string, found {}", other.type_name()));
                None
            }
        }
    }

    fn list<'a>(&mut self, v: &'a Json, path: &str) -> &'a [Json] {
        match v {
            Json::Array(items) => items,
            other => {
                self.error(path, format!("expected a list, found {}", other.type_name()));
                &[]
            }
        }
    }

    fn string_list(
        &mut self,
        v: &Json,
        path: &str,
        valid: fn(&mut Checker, String, &str) -> bool,
    ) -> Vec<String> {
        let mut out = Vec::new();
        for (i, item) in self.list(v, path).iter().enumerate() {
            let item_path = format!("{path}/{i}");
            if let Some(s) = self.string(item, &item_path) {
                if valid(self, item_path, &s) {
                    out.push(s);
                }
            }
        }
        out
    }

    fn marker(&mut self, v: Option<&Json>, path: String, what: &str) -> Option<String> {
        match v {
            None | Some(Json::Null) => {
                self.error(path, format!("missing {what} delimiter"));
                None
            }
            Some(v) => {
                let s = self.string(v, &path)?;
                if s.is_empty() {
                    self.error(path, format!("empty {what} delimiter"));
                    None
                } else {
                    Some(s)
                }
            }
        }
    }

    fn block_comments(&mut self, v: &Json) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, item) in self.list(v, "blockComments").iter().enumerate() {
            let path = format!("blockComments/{i}");
            let Json::Array(pair) = item else {
                self.error(path, format!("expected [open, close], found {}", item.type_name()));
                continue;
            };
            if pair.len() > 2 {
                self.error(path.clone(), "expected exactly two markers");
            }
            let open = self.marker(pair.first(), format!("{path}/0"), "open");
            let close = self.marker(pair.get(1), format!("{path}/1"), "close");
            if let (Some(open), Some(close)) = (open, close) {
                out.push((open, close));
            }
        }
        out
    }

    fn object<'a>(&mut self, v: &'a Json, path: &str, allowed: &[&str]) -> Option<BTreeMap<&'a str, &'a Json>> {
        let Json::Object(entries) = v else {
            self.error(path, format!("expected an object, found {}", v.type_name()));
            return None;
        };
        let mut map = BTreeMap::new();
        for (k, val) in entries {
            if map.insert(k.as_str(), val).is_some() {
                self.error(format!("{path}/{k}"), "duplicate field");
            }
            if !allowed.contains(&k.as_str()) {
                self.warning(format!("{path}/{k}"), "unknown field ignored");
            }
        }
        Some(map)
    }

    fn strings(&mut self, v: &Json) -> Vec<StringDelimiter> {
        let mut out = Vec::new();
        for (i, item) in self.list(v, "strings").iter().enumerate() {
            let path = format!("strings/{i}");
            let Some(fields) = self.object(item, &path, &["open", "close", "escape"]) else {
                continue;
            };
            let open = self.marker(fields.get("open").copied(), format!("{path}/open"), "open");
            let close = self.marker(fields.get("close").copied(), format!("{path}/close"), "close");
            let escape = match fields.get("escape") {
                None | Some(Json::Null) => Some(None),
                Some(e) => self
                    .marker(Some(e), format!("{path}/escape"), "escape")
                    .map(Some),
            };
            if let (Some(open), Some(close), Some(escape)) = (open, close, escape) {
                out.push(StringDelimiter { open, close, escape });
            }
        }
        out
    }

    fn blocks(&mut self, v: &Json) -> Vec<BlockDelimiter> {
        let items = self.list(v, "blocks");
        if items.is_empty() && matches!(v, Json::Array(_)) {
            self.error("blocks", "at least one block delimiter pair is required");
        }
        let mut out = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("blocks/{i}");
            let Some(fields) = self.object(item, &path, &["open", "close"]) else {
                continue;
            };
            let open = self.marker(fields.get("open").copied(), format!("{path}/open"), "open");
            let close = self.marker(fields.get("close").copied(), format!("{path}/close"), "close");
            if let (Some(open), Some(close)) = (open, close) {
                out.push(BlockDelimiter { open, close });
            }
        }
        out
    }

    fn kinds(&mut self, v: &Json) -> BTreeMap<String, BlockKind> {
        let Json::Object(entries) = v else {
            self.error("kinds", format!("expected an object, found {}", v.type_name()));
            return BTreeMap::new();
        };
        let mut out = BTreeMap::new();
        for (word, kind) in entries {
            let path = format!("kinds/{word}");
            if !is_word(word) {
                self.error(path, format!("{word:?} is not a keyword"));
                continue;
            }
            let Some(kind_name) = self.string(kind, &path) else {
                continue;
            };
            let Some(kind) = BlockKind::parse(&kind_name) else {
                self.error(path, format!("unknown block kind {kind_name:?}"));
                continue;
            };
            if out.insert(word.clone(), kind).is_some() {
                self.error(path, format!("duplicate keyword {word:?}"));
            }
        }
        out
    }

    fn conditionals(&mut self, v: &Json) -> Option<Conditionals> {
        const NAMES: [&str; 6] = ["if", "ifdef", "ifndef", "else", "elif", "end"];
        let fields = self.object(v, "conditionals", &NAMES)?;
        let defaults = Conditionals::default();
        let mut ok = true;
        let mut pick = |cx: &mut Checker, key: &str, default: &str| -> String {
            match fields.get(key) {
                None => default.to_string(),
                Some(v) => match cx.marker(Some(v), format!("conditionals/{key}"), "directive") {
                    Some(s) => s,
                    None => {
                        ok = false;
                        String::new()
                    }
                },
            }
        };
        let c = Conditionals {
            if_: pick(self, "if", &defaults.if_),
            ifdef: pick(self, "ifdef", &defaults.ifdef),
            ifndef: pick(self, "ifndef", &defaults.ifndef),
            else_: pick(self, "else", &defaults.else_),
            elif: pick(self, "elif", &defaults.elif),
            end: pick(self, "end", &defaults.end),
        };
        ok.then_some(c)
    }
}

fn non_empty(cx: &mut Checker, path: String, s: &str) -> bool {
    if s.is_empty() {
        cx.error(path, "empty marker");
        false
    } else {
        true
    }
}

fn word(cx: &mut Checker, path: String, s: &str) -> bool {
    if is_word(s) {
        true
    } else {
        cx.error(path, format!("{s:?} is not a word"));
        false
    }
}
