//! Hand-written sources and refactoring snippets with hand-derived expectations.

use crate::gen::{source, Flavor, SourceOpts};

pub struct CorpusFile {
    pub name: &'static str,
    pub grammar: &'static str,
    pub text: &'static str,
}

pub const FILES: &[CorpusFile] = &[
    CorpusFile { name: "grades.c", grammar: "c", text: include_str!("../corpus/grades.c") },
    CorpusFile { name: "platform.c", grammar: "c", text: include_str!("../corpus/platform.c") },
    CorpusFile { name: "broken.c", grammar: "c", text: include_str!("../corpus/broken.c") },
    CorpusFile { name: "switch.c", grammar: "c", text: include_str!("../corpus/switch.c") },
    CorpusFile { name: "tabs_unicode.c", grammar: "c", text: include_str!("../corpus/tabs_unicode.c") },
    CorpusFile { name: "Bank.java", grammar: "java", text: include_str!("../corpus/Bank.java") },
    CorpusFile { name: "Shapes.java", grammar: "java", text: include_str!("../corpus/Shapes.java") },
    CorpusFile { name: "lists.brace", grammar: "brace", text: include_str!("../corpus/lists.brace") },
];

/// Twenty seed documents: the hand-written files plus generated ones, some damaged.
pub fn seed_documents() -> Vec<(String, &'static str, String)> {
    let mut docs: Vec<(String, &'static str, String)> = FILES
        .iter()
        .map(|f| (f.name.to_string(), f.grammar, f.text.to_string()))
        .collect();
    let mut k = 0u64;
    while docs.len() < 20 {
        let flavor = if k % 4 == 3 { Flavor::Brace } else { Flavor::C };
        let opts = SourceOpts {
            flavor,
            max_lines: 40 + 20 * k as usize,
            max_depth: 6,
            directives: true,
            damage: (k % 3) as usize,
        };
        let text = source(&mut crate::rng(1000 + k), opts);
        let grammar = if flavor == Flavor::Brace { "brace" } else { "c" };
        docs.push((format!("generated_{k}"), grammar, text));
        k += 1;
    }
    docs
}

/// A refactoring case. `deps` is the expected analysis of the marked block
/// (inputs and outputs in first-occurrence order) or the error code; `extract`
/// is the expected outcome of extracting it as `name`.
pub struct Snippet {
    pub name: &'static str,
    pub grammar: &'static str,
    pub text: &'static str,
    pub deps: Result<(&'static [&'static str], &'static [&'static str]), &'static str>,
    pub extract: Result<(), &'static str>,
}

impl Snippet {
    /// Whether the reference analysis can run on it (method and target marked, braced).
    pub fn oracle_applies(&self) -> bool {
        self.deps.is_ok()
    }
}

pub const SNIPPETS: &[Snippet] = &[
    Snippet {
        name: "bump",
        grammar: "c",
        text: "int /*M*/f() {\n    int a = 1;\n    int b = 2;\n    /*@*/if (a > 0) {\n        b = a + 1;\n    }\n    return b;\n}\n",
        deps: Ok((&["a", "b"], &["b"])),
        extract: Ok(()),
    },
    Snippet {
        name: "accumulate",
        grammar: "c",
        text: "int /*M*/sum(int n) {\n    int i = 0;\n    int s = 0;\n    /*@*/while (i < n) {\n        s += i;\n        i++;\n    }\n    return s;\n}\n",
        deps: Ok((&["i", "n", "s"], &["s"])),
        extract: Ok(()),
    },
    Snippet {
        name: "spread",
        grammar: "c",
        text: "void /*M*/g(int n) {\n    int lo = 0;\n    int hi = 0;\n    /*@*/for (int k = 0; k < n; k++) {\n        lo -= k;\n        hi += k;\n    }\n    print(lo, hi);\n}\n",
        deps: Ok((&["n", "lo", "hi"], &["lo", "hi"])),
        extract: Err("E_MULTI_OUTPUT"),
    },
    Snippet {
        name: "square",
        grammar: "c",
        text: "void /*M*/show(int n) {\n    /*@*/if (n > 1) {\n        int sq = n * n;\n        print(sq);\n    }\n}\n",
        deps: Ok((&["n"], &[])),
        extract: Ok(()),
    },
    Snippet {
        name: "signOf",
        grammar: "c",
        text: "int /*M*/sign(int x) {\n    int s = 0;\n    /*@*/if (x > 0) {\n        s = 1;\n    } else if (x < 0) {\n        s = -1;\n    } else {\n        s = 0;\n    }\n    return s;\n}\n",
        deps: Ok((&["x", "s"], &["s"])),
        extract: Ok(()),
    },
    Snippet {
        name: "countDigits",
        grammar: "c",
        text: "int /*M*/digits(int n) {\n    int count = 0;\n    /*@*/do {\n        count++;\n        n /= 10;\n    } while (n > 0);\n    return count;\n}\n",
        deps: Ok((&["count", "n"], &["count"])),
        extract: Ok(()),
    },
    Snippet {
        name: "report",
        grammar: "c",
        text: "int /*M*/h(int a) {\n    int b = a * 2;\n    /*@*/if (b > 10) {\n        print(b);\n    }\n    return a + b;\n}\n",
        deps: Ok((&["b"], &[])),
        extract: Ok(()),
    },
    Snippet {
        name: "addPositive",
        grammar: "c",
        text: "int total;\nvoid /*M*/add(int v) {\n    /*@*/if (v > 0) {\n        total += v;\n    }\n    print(total);\n}\n",
        deps: Ok((&["v"], &["total"])),
        extract: Ok(()),
    },
    Snippet {
        name: "credit",
        grammar: "java",
        text: "class Acc {\n    void /*M*/deposit(Account a, double amt) {\n        /*@*/if (amt > 0) {\n            a.balance += amt;\n            a.count++;\n        }\n        log(a.balance);\n    }\n}\n",
        deps: Ok((&["amt", "a"], &[])),
        extract: Ok(()),
    },
    Snippet {
        name: "total",
        grammar: "java",
        text: "class Stats {\n    static double /*M*/mean(double[] xs) {\n        double sum = 0;\n        /*@*/for (double x : xs) {\n            sum += x;\n        }\n        return sum / xs.length;\n    }\n}\n",
        deps: Ok((&["xs", "sum"], &["sum"])),
        extract: Ok(()),
    },
    Snippet {
        name: "search",
        grammar: "c",
        text: "int /*M*/find(int n) {\n    int i = 0;\n    /*@*/while (i < n) {\n        if (i * i == n) {\n            return i;\n        }\n        i++;\n    }\n    return -1;\n}\n",
        deps: Ok((&["i", "n"], &[])),
        extract: Err("E_UNSUPPORTED"),
    },
    Snippet {
        name: "fields",
        grammar: "c",
        text: "struct /*@*/pt {\n    int x;\n};\n",
        deps: Err("E_NO_METHOD"),
        extract: Err("E_NO_METHOD"),
    },
    Snippet {
        name: "tally",
        grammar: "c",
        text: "int /*M*/count(int n) {\n    int c = 0;\n    for (int i = 0; i < n; i++) {\n        /*@*/if (i % 3 == 0) {\n            c++;\n        }\n    }\n    return c;\n}\n",
        deps: Ok((&["i", "c"], &["c"])),
        extract: Ok(()),
    },
    Snippet {
        name: "noisy",
        grammar: "c",
        text: "int /*M*/parse(int n) {\n    int depth = 0;\n    /*@*/if (n > 0) {\n        puts(\"} depth = 1 {\");   // depth = 2 }\n        depth = n;\n    }\n    return depth;\n}\n",
        deps: Ok((&["n", "depth"], &["depth"])),
        extract: Ok(()),
    },
    Snippet {
        name: "scratch",
        grammar: "c",
        text: "int /*M*/shadow(int a) {\n    int t = a;\n    /*@*/if (a > 0) {\n        int t = a * 2;\n        t += 1;\n        print(t);\n    }\n    return t;\n}\n",
        deps: Ok((&["a"], &[])),
        extract: Ok(()),
    },
    Snippet {
        name: "scan",
        grammar: "c",
        text: "void /*M*/stats(int n) {\n    int lo = n, hi = n, sum = 0;\n    /*@*/while (n > 0) {\n        lo = n;\n        hi = n * 2;\n        sum += n;\n        n--;\n    }\n    report(lo, hi, sum);\n}\n",
        deps: Ok((&["n", "lo", "hi", "sum"], &["lo", "hi", "sum"])),
        extract: Err("E_MULTI_OUTPUT"),
    },
    Snippet {
        name: "packBits",
        grammar: "java",
        text: "class Bits {\n    int /*M*/pack(int[] flags) {\n        int word = 0;\n        /*@*/for (int i = 0; i < flags.length; i++) {\n            word <<= 1;\n            word |= flags[i];\n        }\n        return word;\n    }\n}\n",
        deps: Ok((&["flags", "word"], &["word"])),
        extract: Ok(()),
    },
    Snippet {
        name: "grow",
        grammar: "c",
        text: "int g;\nint /*M*/bump2() {\n    g = 5;\n    /*@*/if (g > 1) {\n        g = g + 1;\n    }\n    return g;\n}\n",
        deps: Ok((&["g"], &["g"])),
        extract: Ok(()),
    },
    Snippet {
        name: "firstNegative",
        grammar: "c",
        text: "int /*M*/firstNeg(int n) {\n    int i = 0;\n    int found = -1;\n    /*@*/while (i < n) {\n        if (val(i) < 0) {\n            found = i;\n            break;\n        }\n        i++;\n    }\n    return found;\n}\n",
        deps: Ok((&["i", "n", "found"], &["found"])),
        extract: Ok(()),
    },
    Snippet {
        name: "kindOf",
        grammar: "c",
        text: "int /*M*/classify(int c) {\n    int kind = 0;\n    /*@*/switch (c) {\n        case 1: {\n            kind = 10;\n            break;\n        }\n        default:\n            kind = 20;\n    }\n    return kind;\n}\n",
        deps: Ok((&["c", "kind"], &["kind"])),
        extract: Ok(()),
    },
    Snippet {
        name: "greet",
        grammar: "c",
        text: "void /*M*/hello() {\n    /*@*/if (1) {\n        print(2);\n    }\n}\n",
        deps: Ok((&[], &[])),
        extract: Ok(()),
    },
    Snippet {
        name: "pick",
        grammar: "c",
        text: "int /*M*/u(int x) {\n    int r = 0;\n    /*@*/if (x > 0) {\n        r = 1;\n    } else\n        r = 2;\n    return r;\n}\n",
        deps: Err("E_UNSUPPORTED"),
        extract: Err("E_UNSUPPORTED"),
    },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deps::{dependencies, Words};

    #[test]
    fn oracle_agrees_with_hand_values() {
        assert!(SNIPPETS.len() >= 20);
        for s in SNIPPETS.iter().filter(|s| s.oracle_applies()) {
            let words = if s.grammar == "java" { Words::java() } else { Words::c() };
            let d = dependencies(s.text, &words);
            let (inputs, outputs) = s.deps.unwrap();
            assert_eq!(d.inputs, inputs, "{}", s.name);
            assert_eq!(d.outputs, outputs, "{}", s.name);
        }
    }

    #[test]
    fn twenty_seeds() {
        let docs = seed_documents();
        assert_eq!(docs.len(), 20);
        assert!(docs.iter().any(|d| d.1 == "brace"));
    }
}
