//! Which conditional-compilation regions are compiled in for a set of defined symbols.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::blockparse::{BlockId, BlockNode, BlockTree, DirectiveKind};
use crate::grammar::BlockKind;
use crate::source::Pos;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExprError {
    pub block_id: BlockId,
    pub pos: Pos,
    pub message: String,
}

/// Activity of every conditional region, keyed by block id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ActivityMap {
    pub active: BTreeMap<BlockId, bool>,
    /// `E_EXPR` failures; the affected regions are inactive.
    pub errors: Vec<ExprError>,
}

impl ActivityMap {
    pub fn get(&self, id: BlockId) -> Option<bool> {
        self.active.get(&id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

pub fn conditional_activity(tree: &BlockTree, defines: &BTreeSet<String>) -> ActivityMap {
    let mut map = ActivityMap::default();
    visit_level(&tree.roots, true, defines, &mut map);
    map
}

fn visit_level(nodes: &[BlockNode], enclosing_active: bool, defines: &BTreeSet<String>, map: &mut ActivityMap) {
    // whether some earlier branch of the current chain was taken
    let mut taken = false;
    for node in nodes {
        let mut active = enclosing_active;
        if node.kind == BlockKind::ConditionalRegion {
            if let Some(directive) = &node.directive {
                if directive.kind.starts_chain() {
                    taken = false;
                }
                let test = match directive.kind {
                    DirectiveKind::Else => Ok(true),
                    DirectiveKind::Ifdef => symbol(&directive.condition).map(|s| defines.contains(s)),
                    DirectiveKind::Ifndef => symbol(&directive.condition).map(|s| !defines.contains(s)),
                    DirectiveKind::If | DirectiveKind::Elif => eval_condition(&directive.condition, defines),
                };
                let hit = match test {
                    Ok(hit) => hit,
                    Err(message) => {
                        map.errors.push(ExprError {
                            block_id: node.id,
                            pos: node.open,
                            message: format!("E_EXPR: {message}"),
                        });
                        false
                    }
                };
                let selected = hit && !taken;
                taken |= selected;
                active = enclosing_active && selected;
            }
            map.active.insert(node.id, active);
        }
        visit_level(&node.children, active, defines, map);
    }
}

fn symbol(condition: &str) -> Result<&str, String> {
    let mut words = condition.split_whitespace();
    match (words.next(), words.next()) {
        (Some(w), None) if is_ident(w) => Ok(w),
        _ => Err(format!("expected a single symbol, found {condition:?}")),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '!' if chars.get(i + 1) != Some(&'=') => {
                toks.push(Tok::Not);
                i += 1;
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                toks.push(Tok::And);
                i += 2;
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                toks.push(Tok::Or);
                i += 2;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let digits = lit.trim_end_matches(['u', 'U', 'l', 'L']);
                let value = digits
                    .parse()
                    .map_err(|_| format!("unsupported number {lit:?}"))?;
                toks.push(Tok::Int(value));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unsupported token {other:?}")),
        }
    }
    Ok(toks)
}

struct ExprParser<'a> {
    toks: &'a [Tok],
    at: usize,
    defines: &'a BTreeSet<String>,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.at);
        self.at += 1;
        t
    }

    fn or(&mut self) -> Result<bool, String> {
        let mut v = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            let rhs = self.and()?;
            v = v || rhs;
        }
        Ok(v)
    }

    fn and(&mut self) -> Result<bool, String> {
        let mut v = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            let rhs = self.unary()?;
            v = v && rhs;
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<bool, String> {
        if self.peek() == Some(&Tok::Not) {
            self.at += 1;
            return Ok(!self.unary()?);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<bool, String> {
        match self.bump().cloned() {
            Some(Tok::LParen) => {
                let v = self.or()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err("missing \")\"".into()),
                }
            }
            Some(Tok::Int(n)) => Ok(n != 0),
            Some(Tok::Ident(word)) if word == "defined" => {
                let parens = self.peek() == Some(&Tok::LParen);
                if parens {
                    self.at += 1;
                }
                let name = match self.bump() {
                    Some(Tok::Ident(name)) => name.clone(),
                    _ => return Err("defined needs a symbol".into()),
                };
                if parens && self.bump() != Some(&Tok::RParen) {
                    return Err("missing \")\" after defined".into());
                }
                Ok(self.defines.contains(&name))
            }
            // symbols carry no values, so a bare defined symbol counts as true
            Some(Tok::Ident(name)) => Ok(self.defines.contains(&name)),
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates an `#if`/`#elif` condition over `defined(X)`, `!`, `&&`, `||`,
/// parentheses, integer literals and bare symbols.
pub fn eval_condition(text: &str, defines: &BTreeSet<String>) -> Result<bool, String> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err("empty condition".into());
    }
    let mut p = ExprParser {
        toks: &toks,
        at: 0,
        defines,
    };
    let v = p.or()?;
    match p.peek() {
        None => Ok(v),
        Some(t) => Err(format!("trailing {t:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockparse::parse_blocks;
    use crate::grammar::StructureGrammar;
    use crate::source::SourceText;

    fn defs(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn activity(text: &str, names: &[&str]) -> Vec<bool> {
        let (tree, _) = parse_blocks(&SourceText::new(text), &StructureGrammar::c());
        conditional_activity(&tree, &defs(names)).active.into_values().collect()
    }

    #[test]
    fn ifdef_else() {
        let text = "#ifdef A\nint a;\n#else\nint b;\n#endif\n";
        assert_eq!(activity(text, &["A"]), vec![true, false]);
        assert_eq!(activity(text, &[]), vec![false, true]);
        assert!(activity("int main() { }\n", &["A"]).is_empty());
    }

    #[test]
    fn nested_in_inactive_is_inactive() {
        let text = "#ifndef A\n#ifdef B\nx;\n#endif\n#endif\n";
        assert_eq!(activity(text, &["A", "B"]), vec![false, false]);
        assert_eq!(activity(text, &["B"]), vec![true, true]);
        // through an ordinary block
        let text = "#if 0\nvoid f() {\n#ifdef B\n#endif\n}\n#endif\n";
        assert_eq!(activity(text, &["B"]), vec![false, false]);
    }

    #[test]
    fn elif_chain_takes_first_true() {
        let text = "#if defined(A) && !B\n#elif A || B\n#elif 1\n#else\n#endif\n";
        assert_eq!(activity(text, &["A"]), vec![true, false, false, false]);
        assert_eq!(activity(text, &["A", "B"]), vec![false, true, false, false]);
        assert_eq!(activity(text, &[]), vec![false, false, true, false]);
    }

    #[test]
    fn bad_expression_is_inactive_and_reported() {
        let text = "#if A == 2\n#else\n#endif\n";
        let (tree, _) = parse_blocks(&SourceText::new(text), &StructureGrammar::c());
        let map = conditional_activity(&tree, &defs(&["A"]));
        assert_eq!(map.active.values().copied().collect::<Vec<_>>(), vec![false, true]);
        assert_eq!(map.errors.len(), 1);
        assert!(map.errors[0].message.starts_with("E_EXPR"));
    }

    #[test]
    fn expressions() {
        let d = defs(&["X"]);
        assert_eq!(eval_condition("defined X", &d), Ok(true));
        assert_eq!(eval_condition("!(defined(X) || Y)", &d), Ok(false));
        assert_eq!(eval_condition("0L || 2", &d), Ok(true));
        assert!(eval_condition("(X", &d).is_err());
        assert!(eval_condition("X Y", &d).is_err());
        assert!(eval_condition("", &d).is_err());
        assert!(eval_condition("defined()", &d).is_err());
    }
}
