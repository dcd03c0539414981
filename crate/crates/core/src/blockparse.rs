//! Delimiter matching over the code mask, producing the nested block tree.

use std::fmt;

use serde::Serialize;

use crate::grammar::{classify_block_kind, BlockKind, Introducer, StructureGrammar};
use crate::mask::{marker_at, scan_mask, CodeMask};
use crate::source::{Pos, SourceText};

pub type BlockId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagCode {
    UnbalancedClose,
    UnclosedBlock,
    UnterminatedComment,
    UnterminatedString,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::UnbalancedClose => "UNBALANCED_CLOSE",
            DiagCode::UnclosedBlock => "UNCLOSED_BLOCK",
            DiagCode::UnterminatedComment => "UNTERMINATED_COMMENT",
            DiagCode::UnterminatedString => "UNTERMINATED_STRING",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub pos: Pos,
    pub code: DiagCode,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn new(pos: Pos, code: DiagCode, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            pos,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.pos, self.code.as_str(), self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveKind {
    If,
    Ifdef,
    Ifndef,
    Elif,
    Else,
}

impl DirectiveKind {
    /// Whether a region with this directive starts a new chain.
    pub fn starts_chain(self) -> bool {
        matches!(self, DirectiveKind::If | DirectiveKind::Ifdef | DirectiveKind::Ifndef)
    }
}

/// The directive that opened a conditional region, with its condition text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Directive {
    pub kind: DirectiveKind,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockNode {
    /// Depth-first preorder index.
    pub id: BlockId,
    pub kind: BlockKind,
    pub open: Pos,
    /// Closing delimiter position, or the end of the text for an unclosed block.
    pub close: Pos,
    pub first_line: usize,
    pub last_line: usize,
    pub depth: usize,
    pub closed: bool,
    /// Chars of the opening and closing markers (0 when unclosed).
    pub open_len: usize,
    pub close_len: usize,
    /// Start of the block header: the introducing word, else the opener.
    pub header: Pos,
    /// The introducing word found before the opener, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directive: Option<Directive>,
    pub children: Vec<BlockNode>,
}

impl BlockNode {
    pub fn contains(&self, pos: Pos) -> bool {
        self.open <= pos && pos <= self.close
    }

    /// Preorder walk of this node and its descendants.
    pub fn walk(&self) -> impl Iterator<Item = &BlockNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

/// Ordered forest of top-level blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BlockTree {
    pub roots: Vec<BlockNode>,
}

impl BlockTree {
    /// All nodes in preorder (id order).
    pub fn iter(&self) -> impl Iterator<Item = &BlockNode> {
        self.roots.iter().flat_map(|r| r.walk())
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.iter().map(|n| n.depth).max()
    }

    /// Root-to-node chain ending at `id`.
    pub fn path_to(&self, id: BlockId) -> Vec<&BlockNode> {
        let mut path = Vec::new();
        let mut level = &self.roots;
        // ids are preorder, so the subtree holding `id` starts at the last child with id <= target
        while let Some(node) = level.iter().take_while(|n| n.id <= id).last() {
            path.push(node);
            if node.id == id {
                return path;
            }
            level = &node.children;
        }
        Vec::new()
    }

    pub fn get(&self, id: BlockId) -> Option<&BlockNode> {
        self.path_to(id).pop()
    }

    pub fn parent(&self, id: BlockId) -> Option<&BlockNode> {
        let path = self.path_to(id);
        path.len().checked_sub(2).map(|i| path[i])
    }

    /// Whether `id` lies strictly inside `ancestor`.
    pub fn is_descendant(&self, id: BlockId, ancestor: BlockId) -> bool {
        id != ancestor && self.path_to(id).iter().any(|n| n.id == ancestor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("E_RANGE: position {0} is outside the document")]
pub struct RangeError(pub Pos);

/// Deepest block whose `[open, close]` span contains `pos`. When two siblings share
/// a boundary position, the later one wins.
pub fn block_at(tree: &BlockTree, source: &SourceText, pos: Pos) -> Result<Option<BlockId>, RangeError> {
    if !source.contains(pos) {
        return Err(RangeError(pos));
    }
    let mut found = None;
    let mut level = &tree.roots;
    while let Some(node) = level.iter().rev().find(|n| n.contains(pos)) {
        found = Some(node.id);
        level = &node.children;
    }
    Ok(found)
}

pub fn parse_blocks(source: &SourceText, grammar: &StructureGrammar) -> (BlockTree, Vec<ParseDiagnostic>) {
    let (mask, mut diags) = scan_mask(source, grammar);
    let tree = parse_masked(source, grammar, &mask, &mut diags);
    (tree, diags)
}

/// Delimiter and directive events found in code, in text order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Event {
    Open { pair: usize, at: usize, len: usize },
    Close { pair: usize, at: usize, len: usize },
    Directive { kind: DirectiveEvent, at: usize, len: usize, condition: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DirectiveEvent {
    Start(DirectiveKind),
    Continue(DirectiveKind),
    End,
}

struct DirectiveTable {
    // longest spelling first
    entries: Vec<(Vec<char>, DirectiveEvent)>,
}

impl DirectiveTable {
    fn new(grammar: &StructureGrammar) -> Option<DirectiveTable> {
        let c = grammar.conditionals.as_ref()?;
        let mut entries: Vec<(Vec<char>, DirectiveEvent)> = vec![
            (c.if_.chars().collect(), DirectiveEvent::Start(DirectiveKind::If)),
            (c.ifdef.chars().collect(), DirectiveEvent::Start(DirectiveKind::Ifdef)),
            (c.ifndef.chars().collect(), DirectiveEvent::Start(DirectiveKind::Ifndef)),
            (c.elif.chars().collect(), DirectiveEvent::Continue(DirectiveKind::Elif)),
            (c.else_.chars().collect(), DirectiveEvent::Continue(DirectiveKind::Else)),
            (c.end.chars().collect(), DirectiveEvent::End),
        ];
        entries.sort_by_key(|(m, _)| std::cmp::Reverse(m.len()));
        Some(DirectiveTable { entries })
    }

    fn at(&self, chars: &[char], at: usize) -> Option<(usize, DirectiveEvent)> {
        self.entries.iter().find_map(|(m, ev)| {
            let end = at + m.len();
            let fits = end <= chars.len() && chars[at..end] == m[..];
            let bounded = chars.get(end).is_none_or(|c| !(c.is_alphanumeric() || *c == '_'));
            (fits && bounded).then_some((m.len(), *ev))
        })
    }
}

pub(crate) fn scan_events(source: &SourceText, grammar: &StructureGrammar, mask: &CodeMask) -> Vec<Event> {
    let chars = source.chars();
    let directives = DirectiveTable::new(grammar);
    // (marker, is_open, pair), longest first
    let mut markers: Vec<(Vec<char>, bool, usize)> = Vec::new();
    for (pair, b) in grammar.blocks.iter().enumerate() {
        markers.push((b.open.chars().collect(), true, pair));
        markers.push((b.close.chars().collect(), false, pair));
    }
    markers.sort_by_key(|(m, _, _)| std::cmp::Reverse(m.len()));

    let mut events = Vec::new();
    let mut line_start = true;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if !mask.is_code(i) {
            // a comment before the directive does not make it mid-line
            if !c.is_whitespace() && mask.classes()[i] != crate::mask::CharClass::Comment {
                line_start = false;
            }
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let at_line_start = std::mem::replace(&mut line_start, false);
        if at_line_start {
            if let Some((len, kind)) = directives.as_ref().and_then(|d| d.at(chars, i)) {
                let mut end = i + len;
                let mut condition = String::new();
                while end < chars.len() && chars[end] != '\n' {
                    if mask.is_code(end) {
                        condition.push(chars[end]);
                    } else {
                        condition.push(' ');
                    }
                    end += 1;
                }
                events.push(Event::Directive {
                    kind,
                    at: i,
                    len,
                    condition: condition.split_whitespace().collect::<Vec<_>>().join(" "),
                });
                i = end;
                continue;
            }
        }
        if let Some((m, is_open, pair)) = markers.iter().find(|(m, _, _)| marker_at(chars, i, m)) {
            let len = m.len();
            if (i..i + len).all(|k| mask.is_code(k)) {
                events.push(if *is_open {
                    Event::Open { pair: *pair, at: i, len }
                } else {
                    Event::Close { pair: *pair, at: i, len }
                });
                i += len;
                continue;
            }
        }
        i += 1;
    }
    events
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    Delim(usize),
    Cond,
}

struct Frame {
    kind: FrameKind,
    at: usize,
    len: usize,
    block_kind: BlockKind,
    header: usize,
    label: Option<String>,
    directive: Option<Directive>,
    children: Vec<BlockNode>,
}

struct Builder<'a> {
    source: &'a SourceText,
    stack: Vec<Frame>,
    roots: Vec<BlockNode>,
    diags: &'a mut Vec<ParseDiagnostic>,
}

impl Builder<'_> {
    fn finish_top(&mut self, close: Option<(usize, usize)>) {
        let frame = self.stack.pop().expect("frame to close");
        let open = self.source.pos_of_char(frame.at);
        let (close_pos, close_len) = match close {
            Some((at, len)) => (self.source.pos_of_char(at), len),
            None => (self.source.end_pos(), 0),
        };
        let node = BlockNode {
            id: 0,
            kind: frame.block_kind,
            open,
            close: close_pos,
            first_line: open.line,
            last_line: close_pos.line,
            depth: 0,
            closed: close.is_some_and(|(_, len)| len > 0),
            open_len: frame.len,
            close_len,
            header: self.source.pos_of_char(frame.header),
            label: frame.label,
            directive: frame.directive,
            children: frame.children,
        };
        match self.stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => self.roots.push(node),
        }
    }

    /// Pops frames down to the nearest frame matching `want`, closing everything
    /// above it at `at` as unclosed. Returns false if there is no such frame.
    fn close_matching(&mut self, want: FrameKind, at: usize, len: usize) -> bool {
        let Some(idx) = self.stack.iter().rposition(|f| f.kind == want) else {
            return false;
        };
        while self.stack.len() > idx + 1 {
            let top = self.stack.last().expect("frame");
            self.diags.push(ParseDiagnostic::new(
                self.source.pos_of_char(top.at),
                DiagCode::UnclosedBlock,
                "block is never closed",
            ));
            // zero-length close: the block ends where its parent's closer starts
            self.finish_top(Some((at, 0)));
        }
        self.finish_top(Some((at, len)));
        true
    }
}

fn parse_masked(
    source: &SourceText,
    grammar: &StructureGrammar,
    mask: &CodeMask,
    diags: &mut Vec<ParseDiagnostic>,
) -> BlockTree {
    let events = scan_events(source, grammar, mask);
    let mut b = Builder {
        source,
        stack: Vec::new(),
        roots: Vec::new(),
        diags,
    };
    for event in events {
        match event {
            Event::Open { pair, at, len } => {
                let scan = scan_header(source.chars(), mask, at);
                b.stack.push(Frame {
                    kind: FrameKind::Delim(pair),
                    at,
                    len,
                    block_kind: classify_block_kind(grammar, scan.introducer.as_ref()),
                    header: scan.header,
                    label: scan.introducer.map(|i| i.word),
                    directive: None,
                    children: Vec::new(),
                });
            }
            Event::Close { pair, at, len } => {
                if !b.close_matching(FrameKind::Delim(pair), at, len) {
                    b.diags.push(ParseDiagnostic::new(
                        source.pos_of_char(at),
                        DiagCode::UnbalancedClose,
                        format!("unmatched {:?}", grammar.blocks[pair].close),
                    ));
                }
            }
            Event::Directive {
                kind,
                at,
                len,
                condition,
            } => {
                let push = |b: &mut Builder, kind: DirectiveKind, condition: String| {
                    b.stack.push(Frame {
                        kind: FrameKind::Cond,
                        at,
                        len,
                        block_kind: BlockKind::ConditionalRegion,
                        header: at,
                        label: None,
                        directive: Some(Directive { kind, condition }),
                        children: Vec::new(),
                    });
                };
                match kind {
                    DirectiveEvent::Start(k) => push(&mut b, k, condition),
                    DirectiveEvent::Continue(k) => {
                        if b.close_matching(FrameKind::Cond, at, len) {
                            push(&mut b, k, condition);
                        } else {
                            b.diags.push(ParseDiagnostic::new(
                                source.pos_of_char(at),
                                DiagCode::UnbalancedClose,
                                "conditional directive without a matching opener",
                            ));
                        }
                    }
                    DirectiveEvent::End => {
                        if !b.close_matching(FrameKind::Cond, at, len) {
                            b.diags.push(ParseDiagnostic::new(
                                source.pos_of_char(at),
                                DiagCode::UnbalancedClose,
                                "conditional end without a matching opener",
                            ));
                        }
                    }
                }
            }
        }
    }
    while let Some(top) = b.stack.last() {
        b.diags.push(ParseDiagnostic::new(
            source.pos_of_char(top.at),
            DiagCode::UnclosedBlock,
            "block is never closed",
        ));
        b.finish_top(None);
    }
    let mut roots = b.roots;
    let mut next_id = 0;
    for root in &mut roots {
        number(root, 0, &mut next_id);
    }
    BlockTree { roots }
}

fn number(node: &mut BlockNode, depth: usize, next_id: &mut usize) {
    node.id = *next_id;
    node.depth = depth;
    *next_id += 1;
    for child in &mut node.children {
        number(child, depth + 1, next_id);
    }
}

pub(crate) struct HeaderScan {
    pub introducer: Option<Introducer>,
    /// Char index where the header starts.
    pub header: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Backward scan from an opener: skip whitespace, skip one balanced parenthesis
/// group, then take the identifier in front of it.
pub(crate) fn scan_header(chars: &[char], mask: &CodeMask, opener: usize) -> HeaderScan {
    let skippable = |k: usize| !mask.is_code(k) && mask.classes()[k] == crate::mask::CharClass::Comment
        || chars[k].is_whitespace();
    let skip_back = |mut j: usize| {
        while j > 0 && skippable(j - 1) {
            j -= 1;
        }
        j
    };
    let mut j = skip_back(opener);
    let mut header = opener;
    let mut has_params = false;
    if j > 0 && chars[j - 1] == ')' && mask.is_code(j - 1) {
        let mut depth = 0usize;
        let mut k = j;
        let mut start = None;
        while k > 0 {
            k -= 1;
            if !mask.is_code(k) {
                continue;
            }
            match chars[k] {
                ')' => depth += 1,
                '(' => {
                    depth -= 1;
                    if depth == 0 {
                        start = Some(k);
                        break;
                    }
                }
                _ => {}
            }
        }
        match start {
            Some(open_paren) => {
                has_params = true;
                header = open_paren;
                j = skip_back(open_paren);
            }
            None => return HeaderScan { introducer: None, header },
        }
    }
    let word_end = j;
    while j > 0 && mask.is_code(j - 1) && is_ident_char(chars[j - 1]) {
        j -= 1;
    }
    let word: String = chars[j..word_end].iter().collect();
    if word.is_empty() || word.starts_with(|c: char| c.is_ascii_digit()) {
        return HeaderScan { introducer: None, header };
    }
    header = j;
    let mut preceding_word = None;
    let k = skip_back(j);
    if k < j {
        let mut s = k;
        while s > 0 && mask.is_code(s - 1) && is_ident_char(chars[s - 1]) {
            s -= 1;
        }
        if s < k {
            preceding_word = Some(chars[s..k].iter().collect());
        }
    }
    HeaderScan {
        introducer: Some(Introducer {
            word,
            has_params,
            preceding_word,
        }),
        header,
    }
}
