//! Seeded random source generators.

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    C,
    Brace,
}

#[derive(Debug, Clone, Copy)]
pub struct SourceOpts {
    pub flavor: Flavor,
    pub max_lines: usize,
    /// Deepest 0-based nesting depth, counting blocks and conditional regions.
    pub max_depth: usize,
    pub directives: bool,
    /// Number of random brace deletions or insertions applied afterwards.
    pub damage: usize,
}

impl Default for SourceOpts {
    fn default() -> SourceOpts {
        SourceOpts {
            flavor: Flavor::C,
            max_lines: 200,
            max_depth: 8,
            directives: true,
            damage: 0,
        }
    }
}

const C_HEADERS: &[&str] = &[
    "if (a > b)",
    "else",
    "while (i < n)",
    "for (int i = 0; i < n; i++)",
    "do",
    "switch (k)",
    "struct node",
    "void helper(int a, char *b)",
    "",
    "enum color",
];
const BRACE_HEADERS: &[&str] = &["when (x > 0)", "otherwise", "repeat (3)", "each (x in xs)", "fn go(a)", "record p", "guard"];
const SYMBOLS: &[&str] = &["A", "B", "DEBUG", "WIN32"];

struct Gen<'a> {
    rng: &'a mut Rng,
    opts: SourceOpts,
    lines: Vec<String>,
}

impl Gen<'_> {
    fn room(&self) -> usize {
        self.opts.max_lines.saturating_sub(self.lines.len())
    }

    fn indent(depth: usize) -> String {
        "    ".repeat(depth)
    }

    fn statement(&mut self, depth: usize) {
        let ind = Self::indent(depth);
        let line = match self.opts.flavor {
            Flavor::C => match self.rng.random_range(0..12) {
                0 => format!("{ind}x = y + 1; // closes }} here"),
                1 => format!("{ind}puts(\"{{ not a block\");"),
                2 => format!("{ind}c = '}}';"),
                3 => format!("{ind}/* {{ */ z = 0; /* }} */"),
                4 => format!("{ind}s = \"esc \\\" }} \";"),
                5 => String::new(),
                6 => format!("{ind}int v{} = {};", self.rng.random_range(0..9), self.rng.random_range(0..99)),
                7 => format!("{ind}arr[i] = f(a, b) * 2;"),
                8 if depth < self.opts.max_depth => format!("{ind}#define WRAP(x) {{ x }}"),
                9 => format!("{ind}x = a < b ? a : b; /* #if not a directive */"),
                10 => format!("{ind}return 0;"),
                _ => format!("{ind}call(i);"),
            },
            Flavor::Brace => match self.rng.random_range(0..7) {
                0 => format!("{ind}let x = 1 # }} end"),
                1 => format!("{ind}give \"begin {{\""),
                2 => format!("{ind}(* end }} *) y = x"),
                3 => String::new(),
                4 => format!("{ind}blend = legend + endless"),
                5 => format!("{ind}print(x)"),
                _ => format!("{ind}x = x + 1"),
            },
        };
        self.lines.push(line);
    }

    fn comment_block(&mut self, depth: usize) {
        let ind = Self::indent(depth);
        match self.opts.flavor {
            Flavor::C => {
                self.lines.push(format!("{ind}/* multi-line comment {{"));
                self.lines.push(format!("{ind}   #endif }} still comment"));
                self.lines.push(format!("{ind}*/"));
            }
            Flavor::Brace => {
                self.lines.push(format!("{ind}(* begin"));
                self.lines.push(format!("{ind}   {{ *)"));
            }
        }
    }

    fn block(&mut self, depth: usize) {
        let ind = Self::indent(depth);
        let (header, open, close) = match self.opts.flavor {
            Flavor::C => (*C_HEADERS.choose(self.rng).unwrap(), "{", "}"),
            Flavor::Brace => {
                let h = *BRACE_HEADERS.choose(self.rng).unwrap();
                if self.rng.random_bool(0.5) {
                    (h, "begin", "end")
                } else {
                    (h, "{", "}")
                }
            }
        };
        let sep = if header.is_empty() { "" } else { " " };
        if self.rng.random_bool(0.15) {
            // whole block on one line
            self.lines.push(format!("{ind}{header}{sep}{open} call(); {close}"));
            return;
        }
        if self.rng.random_bool(0.2) {
            self.lines.push(format!("{ind}{header}"));
            self.lines.push(format!("{ind}{open}"));
        } else {
            self.lines.push(format!("{ind}{header}{sep}{open}"));
        }
        self.body(depth + 1);
        let tail = if header == "do" { " while (x);" } else { "" };
        self.lines.push(format!("{ind}{close}{tail}"));
    }

    fn chain(&mut self, depth: usize) {
        let sym = *SYMBOLS.choose(self.rng).unwrap();
        let first = match self.rng.random_range(0..3) {
            0 => format!("#ifdef {sym}"),
            1 => format!("#ifndef {sym}"),
            _ => format!("#if defined({sym}) || !defined(B)"),
        };
        // directives sit at column 0 or slightly indented
        let ind = if self.rng.random_bool(0.3) { "  " } else { "" };
        self.lines.push(format!("{ind}{first}"));
        self.body(depth + 1);
        for _ in 0..self.rng.random_range(0..3) {
            if self.room() < depth + 6 {
                break;
            }
            if self.rng.random_bool(0.5) {
                self.lines.push(format!("{ind}#elif defined({sym}) && B"));
            } else {
                self.lines.push(format!("{ind}#else /* {{ */"));
            }
            self.body(depth + 1);
        }
        self.lines.push(format!("{ind}#endif"));
    }

    fn body(&mut self, depth: usize) {
        let n = self.rng.random_range(0..5);
        for _ in 0..n {
            self.item(depth);
        }
    }

    fn item(&mut self, depth: usize) {
        // keep enough lines in reserve for the closers of every open block
        let room = self.room().saturating_sub(depth + 1);
        let can_nest = depth < self.opts.max_depth && room > 6;
        let roll = self.rng.random_range(0..100);
        if can_nest && roll < 35 {
            self.block(depth);
        } else if can_nest && self.opts.directives && self.opts.flavor == Flavor::C && roll < 45 {
            self.chain(depth);
        } else if room > 4 && roll < 50 {
            self.comment_block(depth);
        } else if room > 1 {
            self.statement(depth);
        }
    }
}

/// A random program in the given flavor. Blocks nest at most `max_depth` levels
/// and the result has at most `max_lines` lines (plus closers of open blocks).
pub fn source(rng: &mut Rng, opts: SourceOpts) -> String {
    let mut g = Gen {
        rng,
        opts,
        lines: Vec::new(),
    };
    while g.room() > 8 {
        g.item(0);
    }
    let mut text = g.lines.join("\n");
    if g.rng.random_bool(0.8) {
        text.push('\n');
    }
    for _ in 0..opts.damage {
        text = damage(g.rng, &text, opts.flavor);
    }
    text
}

/// Deletes a random closer or inserts a stray delimiter.
fn damage(rng: &mut Rng, text: &str, flavor: Flavor) -> String {
    let positions: Vec<usize> = text.char_indices().filter(|(_, c)| *c == '}').map(|(i, _)| i).collect();
    let mut out = text.to_string();
    if rng.random_bool(0.5) && !positions.is_empty() {
        let at = *positions.choose(rng).unwrap();
        out.remove(at);
    } else {
        let boundaries: Vec<usize> = (0..=text.len()).filter(|&i| text.is_char_boundary(i)).collect();
        let at = *boundaries.choose(rng).unwrap();
        let stray = match (flavor, rng.random_range(0..3)) {
            (_, 0) => "{",
            (Flavor::Brace, 1) => " end ",
            _ => "}",
        };
        out.insert_str(at, stray);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lex::LexSpec;
    use crate::matcher::match_blocks;

    #[test]
    fn deterministic_and_bounded() {
        let opts = SourceOpts {
            max_lines: 300,
            ..SourceOpts::default()
        };
        let a = source(&mut crate::rng(7), opts);
        let b = source(&mut crate::rng(7), opts);
        assert_eq!(a, b);
        assert!(a.lines().count() <= 300);
        let m = match_blocks(&a, &LexSpec::c());
        assert!(m.balanced, "{a}");
        assert!(m.spans.iter().all(|s| s.depth < 8));
        assert!(m.spans.len() > 10);
    }

    #[test]
    fn damage_unbalances() {
        let opts = SourceOpts {
            damage: 3,
            ..SourceOpts::default()
        };
        let unbalanced = (0..20)
            .filter(|&seed| !match_blocks(&source(&mut crate::rng(seed), opts), &LexSpec::c()).balanced)
            .count();
        assert!(unbalanced > 10);
    }
}
