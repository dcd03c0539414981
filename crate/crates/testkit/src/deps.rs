//! Reference input/output analysis for a marked block.
//!
//! Snippets mark the method with `/*M*/` directly before its name and the
//! target statement with `/*@*/` directly before its first word.

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::lex::{strip, LexSpec};
use crate::Rng;

pub const METHOD_MARK: &str = "/*M*/";
pub const TARGET_MARK: &str = "/*@*/";

/// Reserved words of a language, restated by hand.
#[derive(Debug, Clone)]
pub struct Words {
    pub types: Vec<&'static str>,
    /// keywords plus block-kind words
    pub others: Vec<&'static str>,
}

impl Words {
    pub fn c() -> Words {
        Words {
            types: vec!["void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "bool"],
            others: vec![
                "if", "else", "switch", "for", "while", "do", "struct", "union", "enum", "return", "break",
                "continue", "goto", "case", "default", "sizeof", "typedef", "static", "extern", "const",
                "volatile", "register", "inline", "auto",
            ],
        }
    }

    pub fn java() -> Words {
        Words {
            types: vec!["void", "boolean", "byte", "char", "short", "int", "long", "float", "double"],
            others: vec![
                "if", "else", "switch", "for", "while", "do", "try", "catch", "finally", "synchronized",
                "class", "interface", "enum", "return", "break", "continue", "case", "default", "new", "this",
                "super", "throw", "throws", "public", "private", "protected", "static", "final", "abstract",
                "extends", "implements", "import", "package", "instanceof", "null", "true", "false",
            ],
        }
    }

    fn reserved(&self, w: &str) -> bool {
        self.types.contains(&w) || self.others.contains(&w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tok {
    text: String,
    word: bool,
    start: usize,
}

const MULTI: &[&str] = &[
    "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "->", "::",
];
const ASSIGNS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

fn tokens(stripped: &[char]) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut i = 0;
    let run = |mut j: usize, f: &dyn Fn(char) -> bool| {
        while j < stripped.len() && f(stripped[j]) {
            j += 1;
        }
        j
    };
    while i < stripped.len() {
        let c = stripped[i];
        let end = if c == '\0' {
            run(i, &|c| c == '\0')
        } else if c.is_whitespace() {
            i += 1;
            continue;
        } else if c.is_alphabetic() || c == '_' {
            run(i, &|c| c.is_alphanumeric() || c == '_')
        } else if c.is_ascii_digit() {
            run(i, &|c| c.is_alphanumeric() || c == '_' || c == '.')
        } else {
            let rest: String = stripped[i..(i + 3).min(stripped.len())].iter().collect();
            i + MULTI
                .iter()
                .find(|m| rest.starts_with(*m))
                .map_or(1, |m| m.len())
        };
        out.push(Tok {
            text: stripped[i..end].iter().collect(),
            word: c.is_alphabetic() || c == '_',
            start: i,
        });
        i = end;
    }
    out
}

/// Index just past the brace that closes the one at `open`.
fn matching_brace(stripped: &[char], open: usize) -> usize {
    let mut depth = 0usize;
    for (k, &c) in stripped.iter().enumerate().skip(open) {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return k + 1;
                }
            }
            _ => {}
        }
    }
    panic!("unbalanced snippet")
}

fn find_from(stripped: &[char], from: usize, c: char) -> usize {
    from + stripped[from..].iter().position(|&x| x == c).expect("char present")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleDeps {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Char index of the first `{` after the target mark: where to look up the block.
pub fn target_opener(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let stripped = strip(&chars, &LexSpec::c());
    find_from(&stripped, char_pos(text, TARGET_MARK), '{')
}

fn char_pos(text: &str, mark: &str) -> usize {
    let byte = text.find(mark).unwrap_or_else(|| panic!("missing {mark}")) + mark.len();
    text[..byte].chars().count()
}

pub fn dependencies(text: &str, words: &Words) -> OracleDeps {
    let chars: Vec<char> = text.chars().collect();
    let stripped = strip(&chars, &LexSpec::c());
    let toks = tokens(&stripped);

    let method_start = char_pos(text, METHOD_MARK);
    let method_end = matching_brace(&stripped, find_from(&stripped, method_start, '{')) - 1;
    let region_start = char_pos(text, TARGET_MARK);
    let mut region_end = matching_brace(&stripped, find_from(&stripped, region_start, '{'));
    loop {
        let next = toks.iter().find(|t| t.start >= region_end);
        match next {
            Some(t) if t.text == "else" => {
                region_end = matching_brace(&stripped, find_from(&stripped, t.start, '{'));
            }
            _ => break,
        }
    }
    let head = toks.iter().find(|t| t.start >= region_start).expect("target word");
    if head.text == "do" {
        region_end = find_from(&stripped, region_end, ';') + 1;
    }

    let n = toks.len();
    let text_at = |i: usize| toks.get(i).map(|t| t.text.as_str());
    let ident = |i: usize| {
        toks[i].word
            && !words.reserved(&toks[i].text)
            && !(i > 0 && matches!(text_at(i - 1), Some(".") | Some("->")))
            && text_at(i + 1) != Some("(")
    };
    let declared = |i: usize| {
        let mut j = i;
        loop {
            if j == 0 {
                return false;
            }
            j -= 1;
            if j >= 1 && text_at(j) == Some("]") && text_at(j - 1) == Some("[") {
                j -= 1;
                continue;
            }
            let t = &toks[j];
            return t.word && (words.types.contains(&t.text.as_str()) || !words.reserved(&t.text));
        }
    };
    let assigned = |i: usize| {
        let next = text_at(i + 1).unwrap_or("");
        let prev = if i > 0 { text_at(i - 1).unwrap_or("") } else { "" };
        ASSIGNS.contains(&next) || matches!(next, "++" | "--") || matches!(prev, "++" | "--")
    };
    let toks_ref = &toks;
    let in_range = |lo: usize, hi: usize| (0..n).filter(move |&i| toks_ref[i].start >= lo && toks_ref[i].start < hi);

    let inside: Vec<usize> = in_range(region_start, region_end).filter(|&i| ident(i)).collect();
    let declared_inside: Vec<&str> = inside
        .iter()
        .filter(|&&i| declared(i))
        .map(|&i| toks[i].text.as_str())
        .collect();
    let known_before: Vec<&str> = in_range(method_start, region_start)
        .filter(|&i| ident(i) && (declared(i) || assigned(i)))
        .map(|i| toks[i].text.as_str())
        .collect();
    let used_after: Vec<&str> = in_range(region_end, method_end)
        .filter(|&i| ident(i))
        .map(|i| toks[i].text.as_str())
        .collect();

    let mut deps = OracleDeps {
        inputs: vec![],
        outputs: vec![],
    };
    for &i in &inside {
        let name = toks[i].text.clone();
        if declared_inside.contains(&name.as_str()) {
            continue;
        }
        if known_before.contains(&name.as_str()) && !deps.inputs.contains(&name) {
            deps.inputs.push(name.clone());
        }
        if assigned(i) && used_after.contains(&name.as_str()) && !deps.outputs.contains(&name) {
            deps.outputs.push(name);
        }
    }
    deps
}

/// A method of straight-line statements around one marked `if`/`while` block.
/// Every variable is declared before use, so the program is well formed.
pub fn random_method(rng: &mut Rng) -> String {
    let mut vars: Vec<String> = vec!["p0".into(), "p1".into()];
    let mut next = 0;
    let mut lines = vec!["int /*M*/f(int p0, int p1) {".to_string()];
    let mut statement = |rng: &mut Rng, vars: &mut Vec<String>, indent: &str, allow_decl: bool| -> String {
        let a = vars.choose(rng).unwrap().clone();
        let b = vars.choose(rng).unwrap().clone();
        match rng.random_range(0..6) {
            0 | 1 if allow_decl => {
                let v = format!("v{next}");
                next += 1;
                vars.push(v.clone());
                format!("{indent}int {v} = {a} + {b};")
            }
            2 => format!("{indent}{a} += {b};"),
            3 => format!("{indent}{a}++;"),
            4 => format!("{indent}print({a}, {b});"),
            _ => format!("{indent}{a} = {b} * 2;"),
        }
    };
    for _ in 0..rng.random_range(1..6) {
        lines.push(statement(rng, &mut vars, "    ", true));
    }
    let cond = vars.choose(rng).unwrap().clone();
    let header = if rng.random_bool(0.5) { "if" } else { "while" };
    lines.push(format!("    /*@*/{header} ({cond} > 0) {{"));
    let outer = vars.clone();
    for _ in 0..rng.random_range(1..5) {
        lines.push(statement(rng, &mut vars, "        ", true));
    }
    lines.push("    }".into());
    // only variables declared outside the block remain in scope
    let mut vars = outer;
    for _ in 0..rng.random_range(0..4) {
        lines.push(statement(rng, &mut vars, "    ", false));
    }
    lines.push(format!("    return {};", vars.choose(rng).unwrap()));
    lines.push("}".into());
    lines.join("\n") + "\n"
}
