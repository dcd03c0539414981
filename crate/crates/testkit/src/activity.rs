//! Conditional-compilation programs built as syntax trees, with their expected
//! activity computed directly from the trees.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng as _;

use crate::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// bare symbol: true iff defined
    Sym(String),
    Defined { name: String, parens: bool },
    Int(u64),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, defs: &BTreeSet<String>) -> bool {
        match self {
            Expr::Sym(s) => defs.contains(s),
            Expr::Defined { name, .. } => defs.contains(name),
            Expr::Int(n) => *n != 0,
            Expr::Not(e) => !e.eval(defs),
            Expr::And(a, b) => a.eval(defs) && b.eval(defs),
            Expr::Or(a, b) => a.eval(defs) || b.eval(defs),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            _ => 3,
        }
    }

    /// Text with only the parentheses precedence requires.
    pub fn render(&self) -> String {
        let wrap = |e: &Expr, min: u8| {
            if e.prec() < min {
                format!("({})", e.render())
            } else {
                e.render()
            }
        };
        match self {
            Expr::Sym(s) => s.clone(),
            Expr::Defined { name, parens: true } => format!("defined({name})"),
            Expr::Defined { name, parens: false } => format!("defined {name}"),
            Expr::Int(n) => n.to_string(),
            Expr::Not(e) => format!("!{}", wrap(e, 3)),
            // right operands one level tighter so the tree shape survives reparsing
            Expr::And(a, b) => format!("{} && {}", wrap(a, 2), wrap(b, 3)),
            Expr::Or(a, b) => format!("{} || {}", wrap(a, 1), wrap(b, 2)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Test {
    Ifdef(String),
    Ifndef(String),
    If(Expr),
    Elif(Expr),
    Else,
}

impl Test {
    fn eval(&self, defs: &BTreeSet<String>) -> bool {
        match self {
            Test::Ifdef(s) => defs.contains(s),
            Test::Ifndef(s) => !defs.contains(s),
            Test::If(e) | Test::Elif(e) => e.eval(defs),
            Test::Else => true,
        }
    }

    fn render(&self) -> String {
        match self {
            Test::Ifdef(s) => format!("#ifdef {s}"),
            Test::Ifndef(s) => format!("#ifndef {s}"),
            Test::If(e) => format!("#if {}", e.render()),
            Test::Elif(e) => format!("#elif {}", e.render()),
            Test::Else => "#else".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub test: Test,
    pub body: Vec<Chain>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub branches: Vec<Branch>,
}

/// Renders top-level chains, each branch holding one statement before its nested chains.
pub fn render(chains: &[Chain]) -> String {
    let mut out = String::new();
    let mut counter = 0;
    render_into(chains, &mut out, &mut counter);
    out
}

fn render_into(chains: &[Chain], out: &mut String, counter: &mut usize) {
    for chain in chains {
        for b in &chain.branches {
            out.push_str(&b.test.render());
            out.push('\n');
            out.push_str(&format!("int x{counter} = {counter};\n"));
            *counter += 1;
            render_into(&b.body, out, counter);
        }
        out.push_str("#endif\n");
    }
}

/// Expected activity of every region in document order.
pub fn expected(chains: &[Chain], defs: &BTreeSet<String>) -> Vec<bool> {
    let mut out = Vec::new();
    expected_into(chains, true, defs, &mut out);
    out
}

fn expected_into(chains: &[Chain], enclosing: bool, defs: &BTreeSet<String>, out: &mut Vec<bool>) {
    for chain in chains {
        let mut taken = false;
        for b in &chain.branches {
            let selected = !taken && b.test.eval(defs);
            taken |= selected;
            let active = enclosing && selected;
            out.push(active);
            expected_into(&b.body, active, defs, out);
        }
    }
}

fn random_expr(rng: &mut Rng, symbols: &[&str], depth: usize) -> Expr {
    let sym = || symbols.to_vec();
    let leaf = |rng: &mut Rng| {
        let name = sym().choose(rng).unwrap().to_string();
        match rng.random_range(0..5) {
            0 => Expr::Sym(name),
            1 => Expr::Defined { name, parens: false },
            2 => Expr::Int(rng.random_range(0..2)),
            _ => Expr::Defined { name, parens: true },
        }
    };
    if depth == 0 || rng.random_bool(0.3) {
        return leaf(rng);
    }
    match rng.random_range(0..3) {
        0 => Expr::Not(Box::new(random_expr(rng, symbols, depth - 1))),
        1 => Expr::And(
            Box::new(random_expr(rng, symbols, depth - 1)),
            Box::new(random_expr(rng, symbols, depth - 1)),
        ),
        _ => Expr::Or(
            Box::new(random_expr(rng, symbols, depth - 1)),
            Box::new(random_expr(rng, symbols, depth - 1)),
        ),
    }
}

/// A chain of 1..=`max_len` branches over `symbols`, nesting at most `nest` deeper.
pub fn random_chain(rng: &mut Rng, symbols: &[&str], max_len: usize, nest: usize) -> Chain {
    let len = rng.random_range(1..=max_len);
    let mut branches = Vec::new();
    for k in 0..len {
        let test = if k == 0 {
            match rng.random_range(0..3) {
                0 => Test::Ifdef(symbols.choose(rng).unwrap().to_string()),
                1 => Test::Ifndef(symbols.choose(rng).unwrap().to_string()),
                _ => Test::If(random_expr(rng, symbols, 3)),
            }
        } else if k == len - 1 && rng.random_bool(0.5) {
            Test::Else
        } else {
            Test::Elif(random_expr(rng, symbols, 3))
        };
        let body = if nest > 0 && rng.random_bool(0.3) {
            vec![random_chain(rng, symbols, max_len, nest - 1)]
        } else {
            vec![]
        };
        branches.push(Branch { test, body });
    }
    Chain { branches }
}

/// Every subset of `symbols`.
pub fn subsets(symbols: &[&str]) -> Vec<BTreeSet<String>> {
    (0..1u32 << symbols.len())
        .map(|mask| {
            symbols
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| s.to_string())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_keeps_shape() {
        let e = Expr::And(
            Box::new(Expr::Or(Box::new(Expr::Sym("A".into())), Box::new(Expr::Int(0)))),
            Box::new(Expr::Not(Box::new(Expr::Defined {
                name: "B".into(),
                parens: true,
            }))),
        );
        assert_eq!(e.render(), "(A || 0) && !defined(B)");
        let chain = Chain {
            branches: vec![
                Branch { test: Test::Ifdef("A".into()), body: vec![] },
                Branch { test: Test::Else, body: vec![] },
            ],
        };
        assert_eq!(render(std::slice::from_ref(&chain)), "#ifdef A\nint x0 = 0;\n#else\nint x1 = 1;\n#endif\n");
        let none = BTreeSet::new();
        assert_eq!(expected(&[chain], &none), vec![false, true]);
        assert_eq!(subsets(&["A", "B"]).len(), 4);
    }
}
