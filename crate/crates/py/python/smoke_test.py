"""Smoke test for the brics extension module. Run after `pip install`."""

import re

import brics

SAMPLE = "void f() {\n  if (x > 0) {\n    y = 1;\n  }\n}\n"
METHOD = (
    "int f() {\n    int a = 1;\n    int b = 2;\n    if (a > 0) {\n"
    "        b = a + 1;\n    }\n    return b;\n}\n"
)


def expect_error(code, fn, *args):
    try:
        fn(*args)
    except brics.BricsError as e:
        assert e.args[0] == code, e.args
        return
    raise AssertionError(f"expected {code}")


def main():
    c = brics.Grammar.builtin("c")
    assert c.name == "c"
    assert brics.Grammar.load(c.to_json()).name == "c"
    assert brics.check_grammar('{"name": 3}')[0]["severity"] == "error"
    expect_error("E_UNKNOWN_GRAMMAR", brics.Grammar.builtin, "cobol")

    parsed = brics.parse(SAMPLE, c)
    root = parsed["tree"]["roots"][0]
    assert root["kind"] == "callable" and root["children"][0]["kind"] == "branch"
    assert parsed["diagnostics"] == []
    assert brics.parse("{", "c")["diagnostics"][0]["code"] == "UNCLOSED_BLOCK"
    assert brics.block_at(SAMPLE, "c", 3, 4) == 1

    rects = brics.rects(SAMPLE, "c")
    assert [r["depth"] for r in rects] == [0, 1]
    assert rects[0]["fill"] != rects[1]["fill"]

    model = brics.overview(SAMPLE, "c", 200, 100, 1)
    for r in model["rects"]:
        assert abs(r["w"] * r["lines"] - r["h"] * r["cols"]) < 1e-9

    guarded = "#ifdef A\nint a() { }\n#else\nint b() { }\n#endif\n"
    assert brics.activity(guarded, "c", ["A"]) == {0: True, 2: False}

    deps = brics.dependencies(METHOD, "c", 1)
    assert deps == {"inputs": ["a", "b"], "outputs": ["b"]}
    result = brics.extract(METHOD, "c", 1, "bump")
    assert "b = bump(a, b);" in result["new_source"]
    expect_error("E_NAME_TAKEN", brics.extract, METHOD, "c", 1, "f")

    assert brics.folds(SAMPLE, "c", 0)[0]["hidden"] == [3, 3]
    assert brics.render_svg(SAMPLE, "c").count("<rect") == 2
    plain = re.sub("\x1b\\[[0-9;]*m", "", brics.render_ansi(SAMPLE, "c"))
    assert plain == SAMPLE

    session = brics.Session("", "c")
    seen = []
    sub = session.subscribe(lambda version, digest: seen.append(version))
    for v in range(3):
        session.apply_edit(0, 0, "{}", v)
    expect_error("E_STALE", session.apply_edit, 0, 0, "x", 0)
    expect_error("E_RANGE", session.apply_edit, 0, 99, "", 3)
    sub.cancel()
    session.apply_edit(0, 0, " ", 3)
    assert seen == [1, 2, 3], seen
    assert session.version == 4
    assert session.digest == brics.digest(" {}{}{}")
    assert len(session.snapshot()["tree"]["roots"]) == 3

    print("smoke test ok")


if __name__ == "__main__":
    main()
