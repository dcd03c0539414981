use brics_core::{conditional_activity, parse_blocks, SourceText, StructureGrammar};
use brics_testkit::activity::{expected, random_chain, render, subsets};
use proptest::prelude::*;

const SYMBOLS: [&str; 4] = ["A", "B", "C", "D"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn all_define_sets(seed in any::<u64>(), k in 1usize..=4, chains in 1usize..3) {
        let mut rng = brics_testkit::rng(seed);
        let symbols = &SYMBOLS[..k];
        let program: Vec<_> = (0..chains).map(|_| random_chain(&mut rng, symbols, 4, 2)).collect();
        let text = render(&program);
        let (tree, diags) = parse_blocks(&SourceText::new(text.as_str()), &StructureGrammar::c());
        prop_assert!(diags.is_empty(), "{}", text);
        for defs in subsets(symbols) {
            let map = conditional_activity(&tree, &defs);
            prop_assert!(map.errors.is_empty());
            let got: Vec<bool> = map.active.values().copied().collect();
            prop_assert_eq!(got, expected(&program, &defs), "{} with {:?}", text, defs);
        }
    }
}

#[test]
fn regions_outside_conditionals_are_not_reported() {
    let text = "void f() {\n#ifdef A\n  if (x) { }\n#endif\n}\n";
    let (tree, _) = parse_blocks(&SourceText::new(text), &StructureGrammar::c());
    let map = conditional_activity(&tree, &Default::default());
    assert_eq!(map.active.len(), 1);
    assert_eq!(map.get(1), Some(false));
}
