//! Test support shared by the core property tests and the acceptance suite.
//!
//! Nothing here depends on `brics-core`: the oracles are written from the
//! definitions alone so they can be compared against the real implementation.

pub mod activity;
pub mod corpus;
pub mod deps;
pub mod edits;
pub mod gen;
pub mod lex;
pub mod matcher;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(line, col)` of a char index, 1-based lines and 0-based char columns.
pub fn line_col(chars: &[char], index: usize) -> (usize, usize) {
    let before = &chars[..index.min(chars.len())];
    let line = 1 + before.iter().filter(|&&c| c == '\n').count();
    let col = match before.iter().rposition(|&c| c == '\n') {
        Some(nl) => before.len() - nl - 1,
        None => before.len(),
    };
    (line, col)
}

/// Position just past the last char, where unclosed blocks end.
pub fn end_line_col(chars: &[char]) -> (usize, usize) {
    match chars.last() {
        None => (1, 0),
        Some('\n') => line_col(chars, chars.len() - 1),
        Some(_) => line_col(chars, chars.len()),
    }
}
