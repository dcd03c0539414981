//! Lexical descriptions and a comment/string stripper.

/// Markers of a language, restated by hand for the oracles.
#[derive(Debug, Clone)]
pub struct LexSpec {
    pub line_comments: Vec<&'static str>,
    pub block_comments: Vec<(&'static str, &'static str)>,
    /// open, close, escape
    pub strings: Vec<(&'static str, &'static str, Option<&'static str>)>,
    pub blocks: Vec<(&'static str, &'static str)>,
    /// if-like, continue-like and end spellings; empty when the language has none
    pub starts: Vec<&'static str>,
    pub continues: Vec<&'static str>,
    pub ends: Vec<&'static str>,
}

impl LexSpec {
    pub fn c() -> LexSpec {
        LexSpec {
            line_comments: vec!["//"],
            block_comments: vec![("/*", "*/")],
            strings: vec![("\"", "\"", Some("\\")), ("'", "'", Some("\\"))],
            blocks: vec![("{", "}")],
            starts: vec!["#if", "#ifdef", "#ifndef"],
            continues: vec!["#elif", "#else"],
            ends: vec!["#endif"],
        }
    }

    pub fn java() -> LexSpec {
        LexSpec {
            starts: vec![],
            continues: vec![],
            ends: vec![],
            ..LexSpec::c()
        }
    }

    pub fn brace() -> LexSpec {
        LexSpec {
            line_comments: vec!["#"],
            block_comments: vec![("(*", "*)")],
            strings: vec![("\"", "\"", Some("\\"))],
            blocks: vec![("{", "}"), ("begin", "end")],
            starts: vec![],
            continues: vec![],
            ends: vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Code,
    Comment,
    Str,
}

fn word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Literal match of `m` at `i`, honouring word boundaries for word-like markers.
pub fn matches_at(chars: &[char], i: usize, m: &str) -> bool {
    let m: Vec<char> = m.chars().collect();
    if m.is_empty() || i + m.len() > chars.len() || chars[i..i + m.len()] != m[..] {
        return false;
    }
    let left_ok = !word(m[0]) || i == 0 || !word(chars[i - 1]);
    let right_ok = !word(m[m.len() - 1]) || i + m.len() == chars.len() || !word(chars[i + m.len()]);
    left_ok && right_ok
}

enum State {
    Code,
    Line,
    Block(&'static str),
    Str(&'static str, Option<&'static str>),
}

/// Per-char classification by a single left-to-right state machine. At each
/// code position the longest opener wins; among equal lengths comments win.
pub fn classify(chars: &[char], spec: &LexSpec) -> Vec<Class> {
    let mut out = Vec::with_capacity(chars.len());
    let mut state = State::Code;
    let mut i = 0;
    while i < chars.len() {
        match state {
            State::Code => {
                let mut best: Option<(usize, State)> = None;
                let mut consider = |len: usize, s: State| {
                    if best.as_ref().is_none_or(|(l, _)| len > *l) {
                        best = Some((len, s));
                    }
                };
                for m in &spec.line_comments {
                    if matches_at(chars, i, m) {
                        consider(m.chars().count(), State::Line);
                    }
                }
                for (o, c) in &spec.block_comments {
                    if matches_at(chars, i, o) {
                        consider(o.chars().count(), State::Block(c));
                    }
                }
                for (o, c, e) in &spec.strings {
                    if matches_at(chars, i, o) {
                        consider(o.chars().count(), State::Str(c, *e));
                    }
                }
                match best {
                    Some((len, s)) => {
                        let class = if matches!(s, State::Str(..)) { Class::Str } else { Class::Comment };
                        out.extend(std::iter::repeat_n(class, len));
                        i += len;
                        state = s;
                    }
                    None => {
                        out.push(Class::Code);
                        i += 1;
                    }
                }
            }
            State::Line => {
                if chars[i] == '\n' {
                    state = State::Code;
                } else {
                    out.push(Class::Comment);
                    i += 1;
                }
            }
            State::Block(close) => {
                if matches_at(chars, i, close) {
                    let n = close.chars().count();
                    out.extend(std::iter::repeat_n(Class::Comment, n));
                    i += n;
                    state = State::Code;
                } else {
                    out.push(Class::Comment);
                    i += 1;
                }
            }
            State::Str(close, escape) => {
                if let Some(e) = escape.filter(|e| matches_at(chars, i, e)) {
                    let n = (e.chars().count() + 1).min(chars.len() - i);
                    out.extend(std::iter::repeat_n(Class::Str, n));
                    i += n;
                } else if matches_at(chars, i, close) {
                    let n = close.chars().count();
                    out.extend(std::iter::repeat_n(Class::Str, n));
                    i += n;
                    state = State::Code;
                } else {
                    out.push(Class::Str);
                    i += 1;
                }
            }
        }
    }
    out
}

/// Copy of the text with comment chars blanked to spaces and string chars to
/// `\0`, newlines kept, so only code remains visible.
pub fn strip(chars: &[char], spec: &LexSpec) -> Vec<char> {
    classify(chars, spec)
        .iter()
        .zip(chars)
        .map(|(class, &c)| match class {
            _ if c == '\n' => '\n',
            Class::Code => c,
            Class::Comment => ' ',
            Class::Str => '\0',
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_c() {
        let text: Vec<char> = "a{ /* } */ \"}\" '\\'' // }\n}".chars().collect();
        let s: String = strip(&text, &LexSpec::c()).into_iter().collect();
        assert_eq!(s, "a{         \0\0\0 \0\0\0\0     \n}");
    }

    #[test]
    fn word_markers() {
        let text: Vec<char> = "blend end".chars().collect();
        assert!(!matches_at(&text, 2, "end"));
        assert!(matches_at(&text, 6, "end"));
    }
}
