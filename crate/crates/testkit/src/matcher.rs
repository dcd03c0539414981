//! Reference delimiter matcher: strip comments and strings, then run a stack.

use crate::lex::{matches_at, strip, LexSpec};
use crate::{end_line_col, line_col};

/// One matched (or recovered) block as `(line, col)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub open: (usize, usize),
    pub close: (usize, usize),
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matched {
    /// Sorted.
    pub spans: Vec<Span>,
    /// No stray closer and nothing left open.
    pub balanced: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Key {
    Pair(usize),
    Cond,
}

enum Tok {
    Open(Key),
    Close(Key),
    /// closes the conditional region and opens its successor
    Next,
}

fn longest<'a>(stripped: &[char], i: usize, options: impl Iterator<Item = (&'a str, Tok)>) -> Option<(usize, Tok)> {
    options
        .filter(|(m, _)| matches_at(stripped, i, m))
        .max_by_key(|(m, _)| m.chars().count())
        .map(|(m, t)| (m.chars().count(), t))
}

pub fn match_blocks(text: &str, spec: &LexSpec) -> Matched {
    let chars: Vec<char> = text.chars().collect();
    let stripped = strip(&chars, spec);

    // (key, open char index)
    let mut stack: Vec<(Key, usize)> = Vec::new();
    let mut spans = Vec::new();
    let mut balanced = true;

    let close_to = |stack: &mut Vec<(Key, usize)>, key: Key, at: usize, balanced: &mut bool, spans: &mut Vec<Span>| {
        let Some(idx) = stack.iter().rposition(|(k, _)| *k == key) else {
            *balanced = false;
            return false;
        };
        while stack.len() > idx {
            if stack.len() > idx + 1 {
                *balanced = false;
            }
            let (_, open) = stack.pop().unwrap();
            spans.push(Span {
                open: line_col(&chars, open),
                close: line_col(&chars, at),
                depth: stack.len(),
            });
        }
        true
    };

    let mut i = 0;
    let mut line_start = true;
    while i < stripped.len() {
        let c = stripped[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c == ' ' || (c.is_whitespace() && c != '\0') {
            i += 1;
            continue;
        }
        if std::mem::replace(&mut line_start, false) {
            let directive = longest(
                &stripped,
                i,
                spec.starts
                    .iter()
                    .map(|m| (*m, Tok::Open(Key::Cond)))
                    .chain(spec.continues.iter().map(|m| (*m, Tok::Next)))
                    .chain(spec.ends.iter().map(|m| (*m, Tok::Close(Key::Cond)))),
            );
            if let Some((_, tok)) = directive {
                match tok {
                    Tok::Open(k) => stack.push((k, i)),
                    Tok::Close(k) => {
                        close_to(&mut stack, k, i, &mut balanced, &mut spans);
                    }
                    Tok::Next => {
                        if close_to(&mut stack, Key::Cond, i, &mut balanced, &mut spans) {
                            stack.push((Key::Cond, i));
                        }
                    }
                }
                while i < stripped.len() && stripped[i] != '\n' {
                    i += 1;
                }
                continue;
            }
        }
        let marker = longest(
            &stripped,
            i,
            spec.blocks.iter().enumerate().flat_map(|(p, (o, c))| {
                [(*o, Tok::Open(Key::Pair(p))), (*c, Tok::Close(Key::Pair(p)))]
            }),
        );
        match marker {
            Some((len, Tok::Open(k))) => {
                stack.push((k, i));
                i += len;
            }
            Some((len, Tok::Close(k))) => {
                close_to(&mut stack, k, i, &mut balanced, &mut spans);
                i += len;
            }
            _ => i += 1,
        }
    }
    if !stack.is_empty() {
        balanced = false;
    }
    let end = end_line_col(&chars);
    while let Some((_, open)) = stack.pop() {
        spans.push(Span {
            open: line_col(&chars, open),
            close: end,
            depth: stack.len(),
        });
    }
    spans.sort();
    Matched { spans, balanced }
}
