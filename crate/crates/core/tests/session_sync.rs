use std::sync::{Arc, Mutex};

use brics_core::{digest, parse_blocks, Edit, Session, SourceText, StructureGrammar};
use brics_testkit::corpus::seed_documents;
use brics_testkit::edits::random_edit;
use proptest::prelude::*;

fn grammar(name: &str) -> Arc<StructureGrammar> {
    Arc::new(match name {
        "java" => StructureGrammar::java(),
        "brace" => StructureGrammar::brace(),
        _ => StructureGrammar::c(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn snapshots_equal_fresh_parses(seed in any::<u64>(), doc in 0usize..20) {
        let docs = seed_documents();
        let (_, gname, text) = &docs[doc];
        let g = grammar(gname);
        let session = Arc::new(Session::open(text.clone(), g.clone()));
        let seen = Arc::new(Mutex::new(Vec::new()));
        let sink = seen.clone();
        let _sub = session.subscribe(move |snap| sink.lock().unwrap().push((snap.version, snap.digest.clone())));

        let mut rng = brics_testkit::rng(seed);
        let mut mirror = text.clone();
        for v in 0..100u64 {
            let e = random_edit(&mut rng, &mirror);
            mirror = e.apply(&mirror);
            let snap = session
                .apply_edit(&Edit { start_byte: e.start_byte, end_byte: e.end_byte, replacement: e.replacement, base_version: v })
                .unwrap();
            prop_assert_eq!(snap.version, v + 1);
            prop_assert_eq!(snap.text(), mirror.as_str());
            let (tree, diags) = parse_blocks(&SourceText::new(mirror.as_str()), &g);
            prop_assert_eq!(&snap.tree, &tree);
            prop_assert_eq!(&snap.diagnostics, &diags);
            prop_assert_eq!(&snap.digest, &digest(&mirror));
        }
        let seen = seen.lock().unwrap();
        prop_assert_eq!(seen.len(), 100);
        prop_assert!(seen.iter().enumerate().all(|(i, (v, _))| *v == i as u64 + 1));
    }
}

#[test]
fn concurrent_editors_are_serialized() {
    let session = Arc::new(Session::open("{}", grammar("c")));
    let versions = Arc::new(Mutex::new(Vec::new()));
    let sink = versions.clone();
    let _sub = session.subscribe(move |snap| sink.lock().unwrap().push(snap.version));
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let s = session.clone();
            std::thread::spawn(move || {
                let mut applied = 0;
                while applied < 25 {
                    let snap = s.snapshot();
                    let edit = Edit { start_byte: 1, end_byte: 1, replacement: "{}".into(), base_version: snap.version };
                    match s.apply_edit(&edit) {
                        Ok(_) => applied += 1,
                        Err(e) => assert_eq!(e.code(), "E_STALE"),
                    }
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let snap = session.snapshot();
    assert_eq!(snap.version, 100);
    assert_eq!(snap.tree.len(), 101);
    assert_eq!(*versions.lock().unwrap(), (1..=100).collect::<Vec<_>>());
}
