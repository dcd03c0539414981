//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any fail.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use brics_core::{
    block_dependencies, block_at, conditional_activity, editor_rects, extract_block, fold_spans, overview_model,
    parse_blocks, render_ansi, render_svg, shade_for_depth, BlockKind, BlockTree, Edit, OverviewParams, Palette,
    Session, SourceText, StructureGrammar,
};
use brics_testkit::activity::{expected, random_chain, render, subsets};
use brics_testkit::corpus::{seed_documents, FILES, SNIPPETS};
use brics_testkit::deps::{dependencies, target_opener, Words};
use brics_testkit::edits::random_edit;
use brics_testkit::gen::{source, Flavor, SourceOpts};
use brics_testkit::lex::LexSpec;
use brics_testkit::matcher::match_blocks;

const PARSER_SOURCES: u64 = 500;
const PARSER_MAX_LINES: usize = 500;
const PARSER_MAX_DEPTH: usize = 8;
const PARSER_BUDGET: Duration = Duration::from_secs(30);
const INVARIANT_CASES: u64 = 300;
const SYNC_EDITS: u64 = 1000;
const LATENCY_LINES: usize = 1000;
const LATENCY_SAMPLES: usize = 101;
const LATENCY_BUDGET: Duration = Duration::from_millis(50);
const ACTIVITY_PROGRAMS: u64 = 40;
const CLI_REPEATS: usize = 3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grammar(name: &str) -> StructureGrammar {
    match name {
        "java" => StructureGrammar::java(),
        "brace" => StructureGrammar::brace(),
        _ => StructureGrammar::c(),
    }
}

fn generated(seed: u64, flavor: Flavor, max_lines: usize, damage: usize) -> String {
    source(
        &mut brics_testkit::rng(seed),
        SourceOpts { flavor, max_lines, max_depth: PARSER_MAX_DEPTH, directives: true, damage },
    )
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parser_oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut deepest = 0;
    let mut first = None;
    for seed in 0..PARSER_SOURCES {
        let (flavor, g, spec) = if seed % 4 == 3 {
            (Flavor::Brace, StructureGrammar::brace(), LexSpec::brace())
        } else {
            (Flavor::C, StructureGrammar::c(), LexSpec::c())
        };
        // two in three sources get stray or missing delimiters
        let damage = (seed % 3) as usize;
        let text = generated(seed, flavor, PARSER_MAX_LINES, damage);
        let src = SourceText::new(text.as_str());
        ensure(src.line_count() <= PARSER_MAX_LINES, || format!("seed {seed}: too many lines"))?;
        let (tree, _) = parse_blocks(&src, &g);
        if damage == 0 {
            deepest = deepest.max(tree.max_depth().map_or(0, |d| d + 1));
        }
        let mut got: Vec<_> = tree
            .iter()
            .map(|n| ((n.open.line, n.open.col), (n.close.line, n.close.col), n.depth))
            .collect();
        got.sort();
        let oracle = match_blocks(&text, &spec);
        let want: Vec<_> = oracle.spans.iter().map(|s| (s.open, s.close, s.depth)).collect();
        if got != want {
            mismatches += 1;
            first.get_or_insert(seed);
        }
    }
    let elapsed = start.elapsed();
    ensure(mismatches == 0, || format!("{mismatches} mismatches, first at seed {first:?}"))?;
    ensure(deepest <= PARSER_MAX_DEPTH, || format!("nesting {deepest} exceeds the limit"))?;
    ensure(elapsed < PARSER_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{PARSER_SOURCES} sources, 0 mismatches, max nesting {deepest}, {:.2}s", elapsed.as_secs_f64()))
}

fn check_structure(tree: &BlockTree, src: &SourceText, palette: &Palette) -> Result<(), String> {
    let rects = editor_rects(tree, src, palette).map_err(|e| e.to_string())?;
    for node in tree.iter() {
        let r = &rects[node.id];
        ensure(r.fill == shade_for_depth(palette, node.depth).0, || format!("block {} fill", node.id))?;
        ensure(
            shade_for_depth(palette, node.depth).0 == shade_for_depth(palette, node.depth + 2).0,
            || format!("fill({}) != fill({})", node.depth, node.depth + 2),
        )?;
        for (i, c) in node.children.iter().enumerate() {
            ensure(c.depth == node.depth + 1, || format!("block {} depth", c.id))?;
            ensure(node.open < c.open && c.close <= node.close, || format!("block {} escapes its parent", c.id))?;
            let rc = &rects[c.id];
            ensure(
                r.top_line <= rc.top_line
                    && rc.bottom_line <= r.bottom_line
                    && r.left_col <= rc.left_col
                    && rc.right_col <= r.right_col,
                || format!("rect {} escapes its parent", c.id),
            )?;
            ensure(rc.fill != r.fill, || format!("rect {} has its parent's fill", c.id))?;
            if let Some(next) = node.children.get(i + 1) {
                ensure(c.close <= next.open, || format!("blocks {} and {} interleave", c.id, next.id))?;
            }
        }
    }
    for pair in tree.roots.windows(2) {
        ensure(pair[0].close <= pair[1].open, || format!("roots {} and {} interleave", pair[0].id, pair[1].id))?;
        ensure(pair[0].depth == 0, || "root depth".into())?;
    }
    Ok(())
}

fn structural_invariants() -> Outcome {
    let palette = Palette::default();
    let mut blocks = 0;
    for seed in 0..INVARIANT_CASES {
        let flavor = if seed % 4 == 3 { Flavor::Brace } else { Flavor::C };
        let text = generated(seed ^ 0x5eed, flavor, 200, (seed % 4) as usize);
        let g = if flavor == Flavor::Brace { StructureGrammar::brace() } else { StructureGrammar::c() };
        let src = SourceText::new(text.as_str());
        let (tree, _) = parse_blocks(&src, &g);
        blocks += tree.len();
        check_structure(&tree, &src, &palette).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    for f in FILES {
        let src = SourceText::new(f.text);
        let (tree, _) = parse_blocks(&src, &grammar(f.grammar));
        blocks += tree.len();
        check_structure(&tree, &src, &palette).map_err(|e| format!("{}: {e}", f.name))?;
    }
    Ok(format!("{} sources, {blocks} blocks", INVARIANT_CASES as usize + FILES.len()))
}

fn overview_ratio() -> Outcome {
    let palette = Palette::default();
    let mut checked = 0;
    for f in FILES {
        let src = SourceText::new(f.text);
        let (tree, _) = parse_blocks(&src, &grammar(f.grammar));
        let max_depth = tree.max_depth().unwrap_or(0);
        for (w, h) in [(200, 300), (97, 1013), (1920, 40), (1, 1)] {
            let mut previous: Option<BTreeSet<usize>> = None;
            for g in 0..=max_depth {
                let params = OverviewParams { view_width: w, view_height: h, granularity: g, zoom: None };
                let m = overview_model(&tree, &src, params, &palette, None).map_err(|e| format!("{}: {e}", f.name))?;
                let ids: BTreeSet<usize> = m.rects.iter().map(|r| r.block_id).collect();
                if g == max_depth {
                    ensure(ids.len() == tree.len(), || format!("{}: {w}x{h} misses blocks", f.name))?;
                }
                for r in &m.rects {
                    ensure(r.w.0 * r.lines as u64 == r.h.0 * r.cols as u64, || {
                        format!("{}: block {} at {w}x{h} is {}x{} px for {}x{} cells", f.name, r.block_id, r.w.0, r.h.0, r.cols, r.lines)
                    })?;
                    checked += 1;
                }
                if let Some(prev) = &previous {
                    ensure(prev.is_subset(&ids), || format!("{}: g={g} drops blocks shown at g={}", f.name, g - 1))?;
                }
                previous = Some(ids);
            }
        }
    }
    Ok(format!("{checked} rects exact across {} files", FILES.len()))
}

fn thousand_line_file() -> String {
    let mut text = String::new();
    let mut seed = 7;
    while text.lines().count() < LATENCY_LINES {
        text.push_str(&generated(seed, Flavor::C, 200, 0));
        seed += 1;
    }
    text.lines().take(LATENCY_LINES).map(|l| format!("{l}\n")).collect()
}

fn synchronization() -> Outcome {
    let docs = seed_documents();
    ensure(docs.len() == 20, || format!("{} seed files", docs.len()))?;
    let mut divergences = 0;
    let mut first = None;
    for (i, (name, gname, text)) in docs.iter().enumerate() {
        let g = Arc::new(grammar(gname));
        let session = Session::open(text.clone(), g.clone());
        let mut rng = brics_testkit::rng(1000 + i as u64);
        let mut mirror = text.clone();
        for v in 0..SYNC_EDITS {
            let e = random_edit(&mut rng, &mirror);
            mirror = e.apply(&mirror);
            let snap = session
                .apply_edit(&Edit { start_byte: e.start_byte, end_byte: e.end_byte, replacement: e.replacement, base_version: v })
                .map_err(|err| format!("{name}: edit {v}: {err}"))?;
            let (tree, diags) = parse_blocks(&SourceText::new(mirror.as_str()), &g);
            if snap.text() != mirror || snap.tree != tree || snap.diagnostics != diags {
                divergences += 1;
                first.get_or_insert((name.clone(), v));
            }
        }
    }
    ensure(divergences == 0, || format!("{divergences} divergences, first {first:?}"))?;

    let big = thousand_line_file();
    let session = Session::open(big.clone(), Arc::new(StructureGrammar::c()));
    let mut rng = brics_testkit::rng(99);
    let mut mirror = big;
    let mut times = Vec::with_capacity(LATENCY_SAMPLES);
    for v in 0..LATENCY_SAMPLES as u64 {
        let e = random_edit(&mut rng, &mirror);
        mirror = e.apply(&mirror);
        let edit = Edit { start_byte: e.start_byte, end_byte: e.end_byte, replacement: e.replacement, base_version: v };
        let t = Instant::now();
        session.apply_edit(&edit).map_err(|err| err.to_string())?;
        times.push(t.elapsed());
    }
    times.sort();
    let median = times[times.len() / 2];
    ensure(median < LATENCY_BUDGET, || format!("median apply_edit {median:?} on {LATENCY_LINES} lines"))?;
    Ok(format!(
        "{} edits on 20 files, 0 divergences; median apply_edit {:.2} ms on {LATENCY_LINES} lines",
        20 * SYNC_EDITS,
        median.as_secs_f64() * 1000.0
    ))
}

fn callables(tree: &BlockTree) -> usize {
    tree.iter().filter(|n| n.kind == BlockKind::Callable).count()
}

fn refactoring() -> Outcome {
    ensure(SNIPPETS.len() >= 20, || format!("only {} snippets", SNIPPETS.len()))?;
    let (mut compared, mut extracted, mut multi) = (0, 0, 0);
    for s in SNIPPETS {
        let g = grammar(s.grammar);
        let src = SourceText::new(s.text);
        let (tree, diags) = parse_blocks(&src, &g);
        let id = block_at(&tree, &src, src.pos_of_char(target_opener(s.text)))
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("{}: no target block", s.name))?;
        let deps = block_dependencies(&src, &g, &tree, id);
        if s.oracle_applies() {
            let d = deps.map_err(|e| format!("{}: {e}", s.name))?;
            let words = if s.grammar == "java" { Words::java() } else { Words::c() };
            let o = dependencies(s.text, &words);
            ensure((&o.inputs, &o.outputs) == (&d.inputs, &d.outputs), || {
                format!("{}: got {:?} -> {:?}, oracle {:?} -> {:?}", s.name, d.inputs, d.outputs, o.inputs, o.outputs)
            })?;
            compared += 1;
            if d.outputs.len() > 1 {
                let r = extract_block(&src, &g, &tree, id, s.name);
                ensure(r.as_ref().err().map(|e| e.code()) == Some("E_MULTI_OUTPUT"), || {
                    format!("{}: multi-output extraction was not refused", s.name)
                })?;
                multi += 1;
            }
        }
        match (extract_block(&src, &g, &tree, id, s.name), s.extract) {
            (Ok(r), Ok(())) => {
                let (new_tree, new_diags) = parse_blocks(&SourceText::new(r.new_source.as_str()), &g);
                ensure(new_diags.len() <= diags.len(), || format!("{}: new diagnostics {new_diags:?}", s.name))?;
                ensure(callables(&new_tree) == callables(&tree) + 1, || format!("{}: callable count", s.name))?;
                extracted += 1;
            }
            (Err(e), Err(code)) if e.code() == code => {}
            (got, want) => return Err(format!("{}: got {:?}, expected {:?}", s.name, got.map(|_| ()).map_err(|e| e.code()), want)),
        }
    }
    ensure(multi > 0, || "no multi-output snippets".into())?;
    Ok(format!("{} snippets: {compared} matched the oracle, {extracted} extracted, {multi} multi-output refused", SNIPPETS.len()))
}

fn conditional_activity_truth() -> Outcome {
    const SYMBOLS: [&str; 4] = ["A", "B", "C", "D"];
    let mut evaluations = 0;
    for k in 1..=SYMBOLS.len() {
        let symbols = &SYMBOLS[..k];
        for seed in 0..ACTIVITY_PROGRAMS {
            let mut rng = brics_testkit::rng(seed * 31 + k as u64);
            let chains = 1 + (seed % 2) as usize;
            let program: Vec<_> = (0..chains).map(|_| random_chain(&mut rng, symbols, 4, 2)).collect();
            let text = render(&program);
            let (tree, diags) = parse_blocks(&SourceText::new(text.as_str()), &StructureGrammar::c());
            ensure(diags.is_empty(), || format!("diagnostics on\n{text}"))?;
            for defs in subsets(symbols) {
                let map = conditional_activity(&tree, &defs);
                let got: Vec<bool> = map.active.values().copied().collect();
                ensure(map.errors.is_empty() && got == expected(&program, &defs), || {
                    format!("mismatch for {defs:?} on\n{text}")
                })?;
                evaluations += 1;
            }
        }
    }
    Ok(format!("{evaluations} define sets over {} programs, 0 mismatches", 4 * ACTIVITY_PROGRAMS))
}

fn strip_ansi(s: &str) -> String {
    regex::Regex::new("\x1b\\[[0-9;]*m").unwrap().replace_all(s, "").into_owned()
}

fn renderers() -> Outcome {
    let palette = Palette::default();
    let mut svgs = 0;
    for f in FILES {
        let src = SourceText::new(f.text);
        let (tree, _) = parse_blocks(&src, &grammar(f.grammar));
        let rects = editor_rects(&tree, &src, &palette).map_err(|e| e.to_string())?;
        for fold in [None, Some(0), Some(1)] {
            let folds = fold.map(|g| fold_spans(&tree, g)).unwrap_or_default();
            let hidden: BTreeSet<usize> = folds.iter().flat_map(|f| f.hidden.0..=f.hidden.1).collect();
            let visible = rects.iter().filter(|r| !hidden.contains(&r.top_line)).count();
            let svg = render_svg(&rects, &folds, &src);
            let doc = roxmltree::Document::parse(&svg).map_err(|e| format!("{}: {e}", f.name))?;
            let count = doc.descendants().filter(|n| n.has_tag_name("rect")).count();
            ensure(count == visible, || format!("{} fold {fold:?}: {count} rects, {visible} visible blocks", f.name))?;
            svgs += 1;
        }
        let ansi = render_ansi(&rects, &src);
        ensure(strip_ansi(&ansi).as_bytes() == f.text.as_bytes(), || format!("{}: ANSI text differs", f.name))?;
    }
    Ok(format!("{svgs} SVGs well-formed with matching rect counts; {} ANSI renders byte-identical", FILES.len()))
}

fn brics(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_brics")).args(args).output().expect("run brics")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for f in FILES {
        let path = write(dir.path(), f.name, f.text);
        let out_json = dir.path().join(format!("{}.json", f.name));
        let out_svg = dir.path().join(format!("{}.overview.svg", f.name));
        let commands: Vec<Vec<&str>> = vec![
            vec!["render", &path, "--grammar", f.grammar, "--format", "svg"],
            vec!["render", &path, "--grammar", f.grammar, "--format", "ansi"],
            vec!["render", &path, "--grammar", f.grammar, "--format", "svg", "--fold", "1"],
            vec!["overview", &path, "--grammar", f.grammar, "--width", "200", "--height", "400", "--granularity", "2", "--out", out_json.to_str().unwrap()],
            vec!["overview", &path, "--grammar", f.grammar, "--width", "200", "--height", "400", "--granularity", "2", "--out", out_svg.to_str().unwrap()],
        ];
        for args in commands {
            let out_file = args.iter().position(|a| *a == "--out").map(|i| args[i + 1].to_string());
            let mut seen = Vec::new();
            for _ in 0..CLI_REPEATS {
                let o = brics(&args);
                let file = out_file.as_ref().map(|p| std::fs::read(p).unwrap_or_default());
                seen.push((o.status.code(), o.stdout, o.stderr, file));
            }
            ensure(seen.windows(2).all(|w| w[0] == w[1]), || format!("{args:?} is not deterministic"))?;
            let code = seen[0].0;
            ensure(code == Some(0) || code == Some(2), || format!("{args:?} exited {code:?}"))?;
            runs += CLI_REPEATS;
        }
    }

    let sample = write(dir.path(), "sample.c", "void f() {\n  if (x > 0) {\n    y = 1;\n  }\n}\n");
    let open = write(dir.path(), "open.c", "void f() {\n  x;\n");
    let multi = write(
        dir.path(),
        "multi.c",
        "void g() {\n  int a = 0;\n  int b = 0;\n  while (a < 3) {\n    a++;\n    b += a;\n  }\n  print(a, b);\n}\n",
    );
    let bad_utf8 = dir.path().join("bad.c");
    std::fs::write(&bad_utf8, [0x66, 0xff]).unwrap();
    let bad_utf8 = bad_utf8.to_str().unwrap();
    let missing = dir.path().join("missing.c");
    let missing = missing.to_str().unwrap();
    let null = "/dev/null";
    let matrix: Vec<(Vec<&str>, i32)> = vec![
        (vec!["render", &sample, "--format", "svg"], 0),
        (vec!["render", &open, "--format", "svg"], 2),
        (vec!["overview", &open, "--width", "9", "--height", "9", "--granularity", "1", "--out", null], 2),
        (vec!["extract", &multi, "--block", "4:16", "--name", "h"], 3),
        (vec!["extract", &multi, "--block", "1:0", "--name", "h"], 3),
        (vec!["extract", &multi, "--block", "5:4", "--name", "while"], 3),
        (vec!["extract", &sample, "--block", "2:6", "--name", "f"], 3),
        (vec!["extract", &sample, "--block", "99:0", "--name", "h"], 1),
        (vec!["extract", &sample, "--block", "x", "--name", "h"], 1),
        (vec!["extract", &sample, "--block", "2:6", "--name", "f", "--name", "g"], 1),
        (vec!["render", &sample], 1),
        (vec!["render", &sample, "--format", "pdf"], 1),
        (vec!["render", missing, "--format", "svg"], 1),
        (vec!["render", bad_utf8, "--format", "svg"], 1),
        (vec!["render", &sample, "--grammar", "cobol", "--format", "svg"], 1),
        (vec!["overview", &sample, "--width", "0", "--height", "1", "--granularity", "1", "--out", null], 1),
        (vec!["overview", &sample, "--width", "9", "--height", "9", "--granularity", "1", "--from", "4", "--to", "2", "--out", null], 1),
        (vec!["grammar", "check", missing], 1),
        (vec!["frobnicate"], 1),
        (vec![], 1),
        (vec!["--help"], 0),
    ];
    for (args, want) in &matrix {
        let o = brics(args);
        ensure(o.status.code() == Some(*want), || {
            format!("{args:?}: exit {:?}, expected {want}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr))
        })?;
        if *want != 0 {
            ensure(!o.stderr.is_empty(), || format!("{args:?}: nothing on stderr"))?;
        }
    }
    Ok(format!("{runs} repeated runs byte-identical; {} exit-code cases honored", matrix.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("parser oracle equivalence", parser_oracle),
        ("structural invariants", structural_invariants),
        ("overview ratio", overview_ratio),
        ("synchronization", synchronization),
        ("refactoring", refactoring),
        ("conditional activity", conditional_activity_truth),
        ("renderers", renderers),
        ("cli determinism", cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
