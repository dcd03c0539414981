//! Lexical pass that marks which chars are code, comment or string literal.

use serde::Serialize;

use crate::blockparse::{DiagCode, ParseDiagnostic};
use crate::grammar::StructureGrammar;
use crate::source::SourceText;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CharClass {
    Code,
    Comment,
    StringLiteral,
}

/// One class per char of the source.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeMask(Vec<CharClass>);

impl CodeMask {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn classes(&self) -> &[CharClass] {
        &self.0
    }

    pub fn is_code(&self, index: usize) -> bool {
        self.0.get(index) == Some(&CharClass::Code)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Whether `marker` occurs at `at`. Markers that begin or end with a word char
/// must also sit on word boundaries, so `end` does not match inside `blend`.
pub(crate) fn marker_at(chars: &[char], at: usize, marker: &[char]) -> bool {
    if marker.is_empty() || at + marker.len() > chars.len() || chars[at..at + marker.len()] != *marker {
        return false;
    }
    if is_word_char(marker[0]) && at > 0 && is_word_char(chars[at - 1]) {
        return false;
    }
    let last = marker[marker.len() - 1];
    if is_word_char(last) && chars.get(at + marker.len()).copied().is_some_and(is_word_char) {
        return false;
    }
    true
}

enum Opener {
    Line,
    Block { close: Vec<char> },
    Str { close: Vec<char>, escape: Option<Vec<char>> },
}

struct Lexicon {
    // longest marker first
    openers: Vec<(Vec<char>, Opener)>,
}

impl Lexicon {
    fn new(grammar: &StructureGrammar) -> Lexicon {
        let mut openers = Vec::new();
        for m in &grammar.line_comments {
            openers.push((m.chars().collect(), Opener::Line));
        }
        for (open, close) in &grammar.block_comments {
            openers.push((
                open.chars().collect(),
                Opener::Block {
                    close: close.chars().collect(),
                },
            ));
        }
        for s in &grammar.strings {
            openers.push((
                s.open.chars().collect(),
                Opener::Str {
                    close: s.close.chars().collect(),
                    escape: s.escape.as_ref().map(|e| e.chars().collect()),
                },
            ));
        }
        // stable: ties keep grammar order (comments before strings)
        openers.sort_by_key(|(m, _): &(Vec<char>, Opener)| std::cmp::Reverse(m.len()));
        Lexicon { openers }
    }

    fn opener_at(&self, chars: &[char], at: usize) -> Option<(usize, &Opener)> {
        self.openers
            .iter()
            .find(|(m, _)| marker_at(chars, at, m))
            .map(|(m, o)| (m.len(), o))
    }
}

pub fn scan_mask(source: &SourceText, grammar: &StructureGrammar) -> (CodeMask, Vec<ParseDiagnostic>) {
    let chars = source.chars();
    let lexicon = Lexicon::new(grammar);
    let mut mask = vec![CharClass::Code; chars.len()];
    let mut diags = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let Some((open_len, opener)) = lexicon.opener_at(chars, i) else {
            i += 1;
            continue;
        };
        let start = i;
        match opener {
            Opener::Line => {
                let end = chars[i..]
                    .iter()
                    .position(|&c| c == '\n')
                    .map_or(chars.len(), |p| i + p);
                mask[start..end].fill(CharClass::Comment);
                i = end;
            }
            Opener::Block { close } => {
                let mut j = i + open_len;
                let end = loop {
                    if j >= chars.len() {
                        diags.push(ParseDiagnostic::new(
                            source.pos_of_char(start),
                            DiagCode::UnterminatedComment,
                            "comment is never closed",
                        ));
                        break chars.len();
                    }
                    if marker_at(chars, j, close) {
                        break j + close.len();
                    }
                    j += 1;
                };
                mask[start..end].fill(CharClass::Comment);
                i = end;
            }
            Opener::Str { close, escape } => {
                let mut j = i + open_len;
                let end = loop {
                    if j >= chars.len() {
                        diags.push(ParseDiagnostic::new(
                            source.pos_of_char(start),
                            DiagCode::UnterminatedString,
                            "string literal is never closed",
                        ));
                        break chars.len();
                    }
                    if let Some(esc) = escape {
                        if marker_at(chars, j, esc) {
                            j = (j + esc.len() + 1).min(chars.len());
                            continue;
                        }
                    }
                    if marker_at(chars, j, close) {
                        break j + close.len();
                    }
                    j += 1;
                };
                mask[start..end].fill(CharClass::StringLiteral);
                i = end;
            }
        }
    }
    (CodeMask(mask), diags)
}
