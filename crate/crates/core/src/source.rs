use std::fmt;

use serde::{Deserialize, Serialize};

/// A position in a document: 1-based line, 0-based column counted in chars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(line: usize, col: usize) -> Pos {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Source text with a line table.
///
/// Lines are separated by `\n`; a trailing newline does not start a new line, so
/// the empty text has zero lines. Tabs count as one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceText {
    text: String,
    chars: Vec<char>,
    /// Byte offset of each line start.
    line_starts: Vec<usize>,
    /// Char offset of each line start.
    line_char_starts: Vec<usize>,
    /// Chars per line, excluding the newline.
    line_lens: Vec<usize>,
}

impl SourceText {
    pub fn new(text: impl Into<String>) -> SourceText {
        let text = text.into();
        let chars: Vec<char> = text.chars().collect();
        let mut line_starts = Vec::new();
        let mut line_char_starts = Vec::new();
        let mut line_lens = Vec::new();
        let (mut byte, mut start_byte, mut start_char) = (0, 0, 0);
        for (i, &c) in chars.iter().enumerate() {
            if c == '\n' {
                line_starts.push(start_byte);
                line_char_starts.push(start_char);
                line_lens.push(i - start_char);
                start_byte = byte + 1;
                start_char = i + 1;
            }
            byte += c.len_utf8();
        }
        if start_char < chars.len() {
            line_starts.push(start_byte);
            line_char_starts.push(start_char);
            line_lens.push(chars.len() - start_char);
        }
        SourceText {
            text,
            chars,
            line_starts,
            line_char_starts,
            line_lens,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn char_count(&self) -> usize {
        self.chars.len()
    }

    pub fn line_count(&self) -> usize {
        self.line_lens.len()
    }

    pub fn line_starts(&self) -> &[usize] {
        &self.line_starts
    }

    /// Length in chars of 1-based `line`, or `None` past the end.
    pub fn line_len(&self, line: usize) -> Option<usize> {
        line.checked_sub(1).and_then(|i| self.line_lens.get(i)).copied()
    }

    /// Text of 1-based `line` without its newline.
    pub fn line(&self, line: usize) -> Option<&str> {
        let i = line.checked_sub(1)?;
        let start = *self.line_starts.get(i)?;
        let rest = &self.text[start..];
        Some(match rest.find('\n') {
            Some(end) => &rest[..end],
            None => rest,
        })
    }

    pub fn line_chars(&self, line: usize) -> Option<&[char]> {
        let i = line.checked_sub(1)?;
        let start = *self.line_char_starts.get(i)?;
        Some(&self.chars[start..start + self.line_lens[i]])
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> {
        (1..=self.line_count()).map(|l| self.line(l).unwrap_or(""))
    }

    /// Column of the first non-whitespace char, or `None` for a blank line.
    pub fn indent_of(&self, line: usize) -> Option<usize> {
        self.line_chars(line)?.iter().position(|c| !c.is_whitespace())
    }

    pub fn pos_of_char(&self, index: usize) -> Pos {
        let line_idx = match self.line_char_starts.binary_search(&index) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        match self.line_char_starts.get(line_idx) {
            Some(&start) => Pos::new(line_idx + 1, index - start),
            None => Pos::new(1, index),
        }
    }

    /// Char index of `pos`; columns up to the line length (end of line) are valid.
    pub fn char_index(&self, pos: Pos) -> Option<usize> {
        let len = self.line_len(pos.line)?;
        (pos.col <= len).then(|| self.line_char_starts[pos.line - 1] + pos.col)
    }

    pub fn byte_of_char(&self, index: usize) -> usize {
        self.chars[..index.min(self.chars.len())]
            .iter()
            .map(|c| c.len_utf8())
            .sum()
    }

    pub fn char_of_byte(&self, byte: usize) -> Option<usize> {
        self.text
            .is_char_boundary(byte)
            .then(|| self.text[..byte].chars().count())
    }

    /// Position just past the last char of the last line.
    pub fn end_pos(&self) -> Pos {
        match self.line_count() {
            0 => Pos::new(1, 0),
            n => Pos::new(n, self.line_lens[n - 1]),
        }
    }

    pub fn contains(&self, pos: Pos) -> bool {
        self.char_index(pos).is_some()
    }
}
