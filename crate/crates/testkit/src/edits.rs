//! Random edits against a text, expressed as byte ranges on char boundaries.

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEdit {
    pub start_byte: usize,
    pub end_byte: usize,
    pub replacement: String,
}

impl RawEdit {
    pub fn apply(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len() + self.replacement.len());
        out.push_str(&text[..self.start_byte]);
        out.push_str(&self.replacement);
        out.push_str(&text[self.end_byte..]);
        out
    }
}

const SNIPPETS: &[&str] = &[
    "{", "}", "{\n", "}\n", "/*", "*/", "//", "\"", "'", "\n", " ", "x", "é", "#ifdef A\n", "#else\n",
    "#endif\n", "if (x) {\n  y();\n}\n", "while (1) { }", "/* } */", "\"{\"", "\\", "#if", "end", "begin",
];

fn boundary_near(text: &str, mut at: usize) -> usize {
    at = at.min(text.len());
    while !text.is_char_boundary(at) {
        at -= 1;
    }
    at
}

/// A random insertion, deletion or replacement. Ranges are short and biased to
/// delimiters so edits frequently change the block structure.
pub fn random_edit(rng: &mut Rng, text: &str) -> RawEdit {
    let len = text.len();
    let start = if len > 0 && rng.random_bool(0.4) {
        // next to an existing delimiter
        let hits: Vec<usize> = text.match_indices(['{', '}', '/', '"', '#']).map(|(i, _)| i).collect();
        match hits.choose(rng) {
            Some(&i) => i,
            None => rng.random_range(0..=len),
        }
    } else {
        rng.random_range(0..=len)
    };
    let start = boundary_near(text, start);
    let end = match rng.random_range(0..3) {
        0 => start,
        _ => boundary_near(text, start + rng.random_range(0..12)),
    };
    let end = end.max(start);
    let replacement = match rng.random_range(0..4) {
        0 => String::new(),
        1 => {
            let n = rng.random_range(1..4);
            (0..n).map(|_| *SNIPPETS.choose(rng).unwrap()).collect()
        }
        _ => SNIPPETS.choose(rng).unwrap().to_string(),
    };
    RawEdit {
        start_byte: start,
        end_byte: end,
        replacement,
    }
}
