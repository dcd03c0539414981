//! Block manipulation: dependency sets, extract-block-to-method and fold spans.
//!
//! The analysis is lexical. It understands a C-like single-file subset:
//!
//! * identifiers are code words that are not reserved, not member names
//!   (after `.` or `->`) and not call targets (before `(`);
//! * an identifier is *declared* when the token before it is a type word or
//!   another identifier, optionally with `[]` in between (`int a`, `String s`,
//!   `int[] xs`);
//! * an identifier is *assigned* when followed by `=`, a compound assignment
//!   operator, `++` or `--`, or preceded by `++`/`--`.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Serialize;

use crate::blockparse::{parse_blocks, BlockId, BlockNode, BlockTree};
use crate::grammar::{BlockKind, StructureGrammar};
use crate::mask::{scan_mask, CharClass, CodeMask};
use crate::source::{Pos, SourceText};

pub const FOLD_PLACEHOLDER: &str = "⟨…⟩";

const OPERATORS: [&str; 26] = [
    "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=",
    "|=", "^=", "<<", ">>", "->", "::", "=", "[", "]", ".",
];

const ASSIGN_OPS: [&str; 11] = ["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Str,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Char range in the source.
    pub span: Range<usize>,
}

/// Splits the code parts of the source into tokens. Comments vanish; each string
/// literal becomes one `Str` token.
pub fn tokenize(source: &SourceText, mask: &CodeMask) -> Vec<Token> {
    let chars = source.chars();
    let classes = mask.classes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        match classes[i] {
            CharClass::Comment => {
                i += 1;
                continue;
            }
            CharClass::StringLiteral => {
                while i < chars.len() && classes[i] == CharClass::StringLiteral {
                    i += 1;
                }
                out.push(Token {
                    kind: TokenKind::Str,
                    text: chars[start..i].iter().collect(),
                    span: start..i,
                });
                continue;
            }
            CharClass::Code => {}
        }
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let code = |k: usize| k < chars.len() && classes[k] == CharClass::Code;
        let kind = if c.is_alphabetic() || c == '_' {
            while code(i) && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            TokenKind::Word
        } else if c.is_ascii_digit() {
            while code(i) && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            TokenKind::Number
        } else {
            let len = OPERATORS
                .iter()
                .map(|op| op.chars().collect::<Vec<_>>())
                .find(|op| (0..op.len()).all(|k| code(i + k) && chars[i + k] == op[k]))
                .map_or(1, |op| op.len());
            i += len;
            TokenKind::Punct
        };
        out.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            span: start..i,
        });
    }
    out
}

/// Inputs and outputs of a block, in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DepSets {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefactorResult {
    pub new_source: String,
    /// Inclusive line range of the generated method in `new_source`.
    pub new_method_lines: (usize, usize),
    pub call_line: usize,
    pub deps: DepSets,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefactorError {
    #[error("E_NOT_FOUND: no block with id {0}")]
    NotFound(BlockId),
    #[error("E_NO_METHOD: block {0} is not inside a callable block")]
    NoMethod(BlockId),
    #[error("E_MULTI_OUTPUT: block assigns {} variables used afterwards: {}", .0.len(), .0.join(", "))]
    MultiOutput(Vec<String>),
    #[error("E_NAME_TAKEN: a callable named {0:?} already exists")]
    NameTaken(String),
    #[error("E_INVALID_NAME: {0:?} is not a usable identifier")]
    InvalidName(String),
    #[error("E_UNSUPPORTED: {0}")]
    Unsupported(String),
}

impl RefactorError {
    pub fn code(&self) -> &'static str {
        match self {
            RefactorError::NotFound(_) => "E_NOT_FOUND",
            RefactorError::NoMethod(_) => "E_NO_METHOD",
            RefactorError::MultiOutput(_) => "E_MULTI_OUTPUT",
            RefactorError::NameTaken(_) => "E_NAME_TAKEN",
            RefactorError::InvalidName(_) => "E_INVALID_NAME",
            RefactorError::Unsupported(_) => "E_UNSUPPORTED",
        }
    }
}

struct Lexed<'a> {
    grammar: &'a StructureGrammar,
    tokens: Vec<Token>,
}

impl Lexed<'_> {
    fn is_punct(&self, i: usize, text: &str) -> bool {
        self.tokens
            .get(i)
            .is_some_and(|t| t.kind == TokenKind::Punct && t.text == text)
    }

    fn is_word(&self, i: usize, text: &str) -> bool {
        self.tokens
            .get(i)
            .is_some_and(|t| t.kind == TokenKind::Word && t.text == text)
    }

    fn is_ident(&self, i: usize) -> bool {
        let t = &self.tokens[i];
        t.kind == TokenKind::Word
            && !self.grammar.is_reserved(&t.text)
            && !(i > 0 && (self.is_punct(i - 1, ".") || self.is_punct(i - 1, "->")))
            && !self.is_punct(i + 1, "(")
    }

    /// Token index of the type word in front of a declared identifier.
    fn declaration_type(&self, i: usize) -> Option<usize> {
        let mut j = i.checked_sub(1)?;
        while j >= 1 && self.is_punct(j, "]") && self.is_punct(j - 1, "[") {
            j = j.checked_sub(2)?;
        }
        let t = &self.tokens[j];
        let typed = t.kind == TokenKind::Word
            && (self.grammar.is_type_word(&t.text) || !self.grammar.is_reserved(&t.text));
        typed.then_some(j)
    }

    fn is_declared(&self, i: usize) -> bool {
        self.declaration_type(i).is_some()
    }

    fn is_assigned(&self, i: usize) -> bool {
        let next_assigns = self.tokens.get(i + 1).is_some_and(|t| {
            t.kind == TokenKind::Punct && (ASSIGN_OPS.contains(&t.text.as_str()) || t.text == "++" || t.text == "--")
        });
        next_assigns || (i > 0 && (self.is_punct(i - 1, "++") || self.is_punct(i - 1, "--")))
    }

    /// Token indices whose span starts inside `chars`.
    fn within(&self, chars: Range<usize>) -> Range<usize> {
        let lo = self.tokens.partition_point(|t| t.span.start < chars.start);
        let hi = self.tokens.partition_point(|t| t.span.start < chars.end);
        lo..hi
    }

    fn type_text(&self, type_tok: usize, ident_tok: usize) -> String {
        self.tokens[type_tok..ident_tok]
            .iter()
            .map(|t| t.text.as_str())
            .collect()
    }
}

/// Everything the extraction needs to know about a block and its method.
struct Analysis<'a> {
    lexed: Lexed<'a>,
    method: &'a BlockNode,
    /// Char range moved into the new method.
    region: Range<usize>,
    deps: DepSets,
}

fn enclosing_method(tree: &BlockTree, block_id: BlockId) -> Result<(&BlockNode, &BlockNode), RefactorError> {
    let path = tree.path_to(block_id);
    let (block, ancestors) = path.split_last().ok_or(RefactorError::NotFound(block_id))?;
    let method = ancestors
        .iter()
        .rev()
        .find(|n| n.kind == BlockKind::Callable)
        .ok_or(RefactorError::NoMethod(block_id))?;
    Ok((block, method))
}

fn siblings(tree: &BlockTree, block_id: BlockId) -> &[BlockNode] {
    match tree.parent(block_id) {
        Some(parent) => &parent.children,
        None => &tree.roots,
    }
}

fn node_end(source: &SourceText, node: &BlockNode) -> usize {
    source.char_index(node.close).unwrap_or(source.char_count()) + node.close_len
}

/// Char range of the statement a block belongs to: its header through its closer,
/// widened over `else` chains and a `do … while (…);` tail.
fn statement_region(source: &SourceText, lexed: &Lexed, tree: &BlockTree, block: &BlockNode) -> Result<Range<usize>, RefactorError> {
    let sibs = siblings(tree, block.id);
    let idx = sibs.iter().position(|n| n.id == block.id).expect("block among its siblings");
    let start_of = |n: &BlockNode| source.char_index(n.header).expect("header inside source");
    let tok_at = |char_idx: usize| lexed.tokens.partition_point(|t| t.span.start < char_idx);

    // token index of the `else` that links `n` to the previous branch, if any
    let else_link = |n: &BlockNode| -> Option<usize> {
        let h = tok_at(start_of(n));
        if lexed.is_word(h, "else") {
            Some(h)
        } else if h > 0 && lexed.is_word(h - 1, "else") {
            Some(h - 1)
        } else {
            None
        }
    };
    let linked_to_prev = |k: usize| -> Result<bool, RefactorError> {
        let Some(e) = else_link(&sibs[k]) else {
            return Ok(false);
        };
        let prev_closes_here = k > 0
            && e > 0
            && lexed.tokens[e - 1].span.end == node_end(source, &sibs[k - 1])
            && sibs[k - 1].closed;
        if prev_closes_here {
            Ok(true)
        } else {
            Err(RefactorError::Unsupported("the branch chain is not fully braced".into()))
        }
    };

    let mut first = idx;
    while linked_to_prev(first)? {
        first -= 1;
    }
    let mut last = idx;
    while last + 1 < sibs.len() && linked_to_prev(last + 1)? {
        last += 1;
    }
    let start = start_of(&sibs[first]);
    if let Some(e) = else_link(&sibs[first]) {
        if lexed.tokens[e].span.start < start {
            return Err(RefactorError::Unsupported("the branch chain is not fully braced".into()));
        }
    }
    let mut end = node_end(source, &sibs[last]);
    if !sibs[last].closed {
        return Err(RefactorError::Unsupported("the block is not closed".into()));
    }
    if lexed.is_word(tok_at(end), "else") {
        return Err(RefactorError::Unsupported("the branch chain is not fully braced".into()));
    }
    if sibs[last].label.as_deref() == Some("do") {
        let t = tok_at(end);
        let semi = (t..lexed.tokens.len()).find(|&k| lexed.is_punct(k, ";"));
        match semi {
            Some(k) if lexed.is_word(t, "while") => end = lexed.tokens[k].span.end,
            _ => return Err(RefactorError::Unsupported("do block without a while condition".into())),
        }
    }
    Ok(start..end)
}

fn analyze<'a>(
    source: &SourceText,
    grammar: &'a StructureGrammar,
    tree: &'a BlockTree,
    block_id: BlockId,
) -> Result<Analysis<'a>, RefactorError> {
    let (block, method) = enclosing_method(tree, block_id)?;
    if block.kind == BlockKind::ConditionalRegion {
        return Err(RefactorError::Unsupported("conditional regions cannot be extracted".into()));
    }
    let (mask, _) = scan_mask(source, grammar);
    let lexed = Lexed {
        grammar,
        tokens: tokenize(source, &mask),
    };
    let region = statement_region(source, &lexed, tree, block)?;
    let method_start = source.char_index(method.header).expect("header inside source");
    let method_end = source.char_index(method.close).unwrap_or(source.char_count());

    let inside = lexed.within(region.clone());
    let before = lexed.within(method_start..region.start);
    let after = lexed.within(region.end..method_end);

    let idents = |r: Range<usize>| r.filter(|&i| lexed.is_ident(i));
    let name = |i: usize| lexed.tokens[i].text.clone();

    let declared_inside: BTreeSet<String> = idents(inside.clone())
        .filter(|&i| lexed.is_declared(i))
        .map(name)
        .collect();
    let known_before: BTreeSet<String> = idents(before)
        .filter(|&i| lexed.is_declared(i) || lexed.is_assigned(i))
        .map(name)
        .collect();
    let used_after: BTreeSet<String> = idents(after).map(name).collect();

    let mut deps = DepSets::default();
    for i in idents(inside.clone()) {
        let n = &lexed.tokens[i].text;
        if declared_inside.contains(n) {
            continue;
        }
        if known_before.contains(n) && !deps.inputs.contains(n) {
            deps.inputs.push(n.clone());
        }
        if lexed.is_assigned(i) && used_after.contains(n) && !deps.outputs.contains(n) {
            deps.outputs.push(n.clone());
        }
    }
    Ok(Analysis {
        lexed,
        method,
        region,
        deps,
    })
}

/// Inputs and outputs of the statement headed by block `block_id`.
pub fn block_dependencies(
    source: &SourceText,
    grammar: &StructureGrammar,
    tree: &BlockTree,
    block_id: BlockId,
) -> Result<DepSets, RefactorError> {
    analyze(source, grammar, tree, block_id).map(|a| a.deps)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn leading_ws(line: &str) -> &str {
    &line[..line.len() - line.trim_start().len()]
}

const INDENT_UNIT: &str = "    ";

/// Moves the statement headed by `block_id` into a new method named `new_name`,
/// inserted right after the enclosing method, and replaces it with a call.
pub fn extract_block(
    source: &SourceText,
    grammar: &StructureGrammar,
    tree: &BlockTree,
    block_id: BlockId,
    new_name: &str,
) -> Result<RefactorResult, RefactorError> {
    if !is_identifier(new_name) || grammar.is_reserved(new_name) {
        return Err(RefactorError::InvalidName(new_name.to_string()));
    }
    if tree
        .iter()
        .any(|n| n.kind == BlockKind::Callable && n.label.as_deref() == Some(new_name))
    {
        return Err(RefactorError::NameTaken(new_name.to_string()));
    }
    let a = analyze(source, grammar, tree, block_id)?;
    if a.deps.outputs.len() > 1 {
        return Err(RefactorError::MultiOutput(a.deps.outputs));
    }
    let lexed = &a.lexed;
    let region_toks = lexed.within(a.region.clone());
    if region_toks.clone().any(|i| lexed.is_word(i, "return")) {
        return Err(RefactorError::Unsupported("the block contains a return statement".into()));
    }

    let method_start = source.char_index(a.method.header).expect("header inside source");
    let before = lexed.within(method_start..a.region.start);
    // the nearest declaration before the block, else anywhere in the method
    let method_toks = lexed.within(method_start..source.char_index(a.method.close).unwrap_or(source.char_count()));
    let type_of = |var: &str| -> String {
        let decl = |r: Range<usize>| {
            r.rev()
                .filter(|&i| lexed.tokens[i].text == var && lexed.is_ident(i))
                .find_map(|i| lexed.declaration_type(i).map(|t| lexed.type_text(t, i)))
        };
        decl(before.clone())
            .or_else(|| decl(method_toks.clone()))
            .unwrap_or_else(|| grammar.default_type.clone())
    };

    let output = a.deps.outputs.first().cloned();
    let return_type = output.as_deref().map_or_else(|| "void".to_string(), type_of);
    let params: Vec<String> = a
        .deps
        .inputs
        .iter()
        .map(|v| format!("{} {v}", type_of(v)))
        .collect();
    let args = a.deps.inputs.join(", ");

    // modifiers of the enclosing method, e.g. `public static`
    let header_line = source.line(a.method.header.line).unwrap_or("");
    let method_indent = leading_ws(header_line).to_string();
    let line_start = source.char_index(Pos::new(a.method.header.line, 0)).unwrap_or(0);
    let line_toks = lexed.within(line_start..method_start);
    let modifiers: Vec<&str> = line_toks
        .clone()
        .take(line_toks.len().saturating_sub(1))
        .filter(|&i| {
            let t = &lexed.tokens[i];
            t.kind == TokenKind::Word && grammar.is_keyword(&t.text)
        })
        .map(|i| lexed.tokens[i].text.as_str())
        .collect();

    let mut method_text = String::new();
    method_text.push_str(&method_indent);
    for m in &modifiers {
        method_text.push_str(m);
        method_text.push(' ');
    }
    method_text.push_str(&format!("{return_type} {new_name}({}) {{\n", params.join(", ")));
    let body_indent = format!("{method_indent}{INDENT_UNIT}");
    let region_start = source.pos_of_char(a.region.start);
    let base = leading_ws(source.line(region_start.line).unwrap_or("")).chars().count();
    let region_text: String = source.chars()[a.region.clone()].iter().collect();
    for (k, line) in region_text.split('\n').enumerate() {
        let line = line.trim_end_matches('\r');
        let stripped = if k == 0 {
            line
        } else {
            let ws = leading_ws(line).chars().count().min(base);
            let cut: usize = line.chars().take(ws).map(char::len_utf8).sum();
            &line[cut..]
        };
        if stripped.trim().is_empty() {
            method_text.push('\n');
        } else {
            method_text.push_str(&format!("{body_indent}{}\n", stripped.trim_end()));
        }
    }
    if let Some(v) = &output {
        method_text.push_str(&format!("{body_indent}return {v};\n"));
    }
    method_text.push_str(&format!("{method_indent}}}"));

    let call = match &output {
        Some(v) => format!("{v} = {new_name}({args});"),
        None => format!("{new_name}({args});"),
    };

    // assemble: prefix | call | middle | method close line | blank line + method | rest
    let text = source.as_str();
    let region_bytes = source.byte_of_char(a.region.start)..source.byte_of_char(a.region.end);
    let close_byte = source.byte_of_char(source.char_index(a.method.close).unwrap_or(source.char_count()));
    let insert_at = text[close_byte..].find('\n').map_or(text.len(), |p| close_byte + p);
    let mut new_source = String::with_capacity(text.len() + method_text.len() + call.len());
    new_source.push_str(&text[..region_bytes.start]);
    new_source.push_str(&call);
    new_source.push_str(&text[region_bytes.end..insert_at]);
    new_source.push_str("\n\n");
    let method_offset = new_source.len();
    new_source.push_str(&method_text);
    new_source.push_str(&text[insert_at..]);

    let call_line = region_start.line;
    let first = new_source[..method_offset].matches('\n').count() + 1;
    let last = first + method_text.matches('\n').count();

    let result = RefactorResult {
        new_source,
        new_method_lines: (first, last),
        call_line,
        deps: a.deps,
    };
    check_reparse(source, grammar, tree, &result)?;
    Ok(result)
}

fn count_callables(tree: &BlockTree) -> usize {
    tree.iter().filter(|n| n.kind == BlockKind::Callable).count()
}

fn check_reparse(
    source: &SourceText,
    grammar: &StructureGrammar,
    tree: &BlockTree,
    result: &RefactorResult,
) -> Result<(), RefactorError> {
    let (_, old_diags) = parse_blocks(source, grammar);
    let (new_tree, new_diags) = parse_blocks(&SourceText::new(result.new_source.as_str()), grammar);
    if new_diags.len() > old_diags.len() {
        return Err(RefactorError::Unsupported(
            "the rewritten source would not parse cleanly".into(),
        ));
    }
    if count_callables(&new_tree) != count_callables(tree) + 1 {
        return Err(RefactorError::Unsupported(
            "the generated method is not recognized as a callable".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldSpan {
    pub block_id: BlockId,
    /// Inclusive range of hidden lines, strictly between the opener and closer lines.
    pub hidden: (usize, usize),
    /// Line that shows the placeholder (the opener line).
    pub placeholder_line: usize,
    pub placeholder: &'static str,
}

/// Folds for code collapsing at granularity `g`: every block at depth `g + 1`
/// whose interior spans at least one line.
pub fn fold_spans(tree: &BlockTree, granularity: usize) -> Vec<FoldSpan> {
    tree.iter()
        .filter(|n| n.depth == granularity + 1 && n.last_line >= n.first_line + 2)
        .map(|n| FoldSpan {
            block_id: n.id,
            hidden: (n.first_line + 1, n.last_line - 1),
            placeholder_line: n.first_line,
            placeholder: FOLD_PLACEHOLDER,
        })
        .collect()
}
