import pytest

from fusion_eval.codemetrics import OPAQUE, LexError, detokenize, keywords, parse_subset, tokenize
from fusion_eval.codemetrics.ast import check_spans
from fusion_eval.codemetrics.lexer import DEDENT, INDENT, NEWLINE


def kinds(src, lang):
    return [(t.kind, t.text) for t in tokenize(src, lang)]


def test_empty_source():
    assert tokenize("", "python") == []
    assert tokenize("", "java") == []


def test_python_assignment():
    assert kinds("x = 1", "python") == [("identifier", "x"), ("operator", "="), ("literal", "1")]


def test_java_declaration():
    assert kinds("int x = 1;", "java") == [("keyword", "int"), ("identifier", "x"), ("operator", "="),
                                            ("literal", "1"), ("punctuation", ";")]


def test_keyword_lists():
    py, java = keywords("python"), keywords("java")
    assert len(py) == 35 and {"match", "print"}.isdisjoint(py) and {"async", "nonlocal"} <= py
    assert {"var", "record", "true", "null"}.isdisjoint(java) and "_" in java
    assert {"goto", "const", "strictfp"} <= java


def test_keyword_kind_iff_in_list():
    src = "def f(a):\n    return not a or None\n"
    for t in tokenize(src, "python"):
        assert (t.kind == "keyword") == (t.text in keywords("python"))


def test_comments_and_shebang_dropped():
    src = "#!/usr/bin/env python\n# comment\nx = 1  # trailing\n"
    assert [t.text for t in tokenize(src, "python")] == ["x", "=", "1"]
    jsrc = "/* block\n comment */ int a = 2; // tail\n"
    assert [t.text for t in tokenize(jsrc, "java")] == ["int", "a", "=", "2", ";"]


def test_layout_tokens():
    src = "if a:\n    b = 1\nc = 2\n"
    texts = [t.text for t in tokenize(src, "python")]
    assert texts == ["if", "a", ":", NEWLINE, INDENT, "b", "=", "1", NEWLINE, DEDENT, "c", "=", "2"]


def test_brackets_join_lines():
    src = "x = f(1,\n      2)\n"
    assert NEWLINE not in [t.text for t in tokenize(src, "python")]


def test_string_forms():
    toks = tokenize("s = rb'a\\'b' + f\"{x}\" + '''multi\nline'''", "python")
    lits = [t.text for t in toks if t.kind == "literal"]
    assert lits == ["rb'a\\'b'", 'f"{x}"', "'''multi\nline'''"]
    jt = tokenize('String s = "a\\"b"; char c = \'x\';', "java")
    assert [t.text for t in jt if t.kind == "literal"] == ['"a\\"b"', "'x'"]


@pytest.mark.parametrize("src,lang", [("x = 'abc", "python"), ('s = """open', "python"),
                                      ('String s = "abc;', "java"), ("/* never closed", "java")])
def test_unterminated_raise_with_position(src, lang):
    with pytest.raises(LexError) as info:
        tokenize(src, lang)
    assert info.value.line == 1 and info.value.col >= 1


def test_inconsistent_dedent():
    with pytest.raises(LexError):
        tokenize("if a:\n        b\n    c\n", "python")


def test_positions():
    toks = tokenize("a = 1\nbb = 22", "python")
    bb = [t for t in toks if t.text == "bb"][0]
    assert (bb.line, bb.col) == (2, 1)


def test_detokenize_is_lexically_equivalent():
    src = "def f(a, b=2):\n    if a:\n        return [a, b]\n    return {'k': a}\n"
    toks = tokenize(src, "python")
    again = tokenize(detokenize(toks, "python"), "python")
    assert [(t.kind, t.text) for t in again] == [(t.kind, t.text) for t in toks]
    jsrc = "class A { int f(int x) { return x >>> 2; } }"
    jt = tokenize(jsrc, "java")
    assert [t.text for t in tokenize(detokenize(jt, "java"), "java")] == [t.text for t in jt]


def tree(src, lang="python"):
    t = parse_subset(tokenize(src, lang), lang)
    check_spans(t)
    return t


def test_parse_return_literal():
    assert repr(tree("return 1")) == "Module(Return(Literal()))"


def test_parse_assign_binop():
    assert repr(tree("x = y + 1")) == "Module(Assign(Name(), BinOp:+(Name(), Literal())))"


def test_decorator_becomes_opaque():
    t = tree("@cache\ndef f(x):\n    return x\ny = 1\n")
    assert [c.kind for c in t.children] == [OPAQUE, "Assign"]
    assert t.children[0].span == (0, 15)


def test_python_subset_shapes():
    t = tree("def f(a, *rest, k=1):\n    while a > 0:\n        a -= 1\n    for i, v in g(a):\n"
             "        if i:\n            pass\n        elif v:\n            break\n        else:\n"
             "            continue\n    return a[1:2], x.y(z=3)\n")
    fn = t.children[0]
    assert fn.kind == "FunctionDef" and fn.value == "f"
    assert [p.kind for p in fn.children[1].children] == ["Param", "StarParam", "Param"]
    body = fn.children[2].children
    assert [s.kind for s in body] == ["While", "For", "Return"]
    assert body[1].children[0].kind == "Tuple"
    if_node = body[1].children[2].children[0]
    assert if_node.children[2].kind == "If" and if_node.children[2].children[2].kind == "Block"


def test_precedence():
    t = tree("r = not a == b and c or -d ** 2 * e")
    assert repr(t.children[0].children[1]) == (
        "BoolOp:or(BoolOp:and(UnaryOp:not(Compare:==(Name(), Name())), Name()), "
        "BinOp:*(UnaryOp:-(BinOp:**(Name(), Literal())), Name()))")


@pytest.mark.parametrize("src", [
    "with open(p) as f:\n    x = 1\n",
    "try:\n    a()\nexcept E:\n    pass\n",
    "class A:\n    def m(self):\n        return 1\n",
    "x = [i for i in y]",
    "f = lambda q: q",
    "import os",
])
def test_unsupported_python_is_opaque_but_total(src):
    t = tree(src)
    assert t.children[0].kind == OPAQUE and t.children[0].span[0] == 0


def test_opaque_region_then_supported_statement():
    t = tree("try:\n    a()\nexcept E:\n    pass\nz = 3\n")
    assert [c.kind for c in t.children][-1] == "Assign"


def test_java_subset_shapes():
    src = ("public class A { private int n = 0;\n"
           "  public static int sum(int[] xs, List<Map<String, Integer>> m) {\n"
           "    int s = 0; for (int i = 0; i < xs.length; i++) { s += xs[i]; }\n"
           "    for (int v : xs) s = s + v;\n"
           "    if (s > 10) { return s; } else return (int) (s * 2.5);\n"
           "  }\n}")
    t = tree(src, "java")
    cls = t.children[0]
    assert cls.kind == "ClassDef" and cls.value == "A"
    members = cls.children[1].children
    assert [m.kind for m in members] == ["VarDecl", "FunctionDef"]
    body = members[1].children[2].children
    assert [s.kind for s in body] == ["VarDecl", "ForLoop", "For", "If"]
    assert body[1].value == "icu"


def test_java_unsupported_is_opaque():
    t = tree("try { f(); } catch (Exception e) { g(); } int z = 1;", "java")
    assert [c.kind for c in t.children] == [OPAQUE, OPAQUE, "VarDecl"]
    t = tree("switch (x) { case 1: y(); }", "java")
    assert t.children[0].kind == OPAQUE


def test_parse_never_fails_on_tokens():
    import random
    rng = random.Random(0)
    pool = tokenize("def f(a):\n    if a:\n        return (a + [1, {2: 3}])\n    x = y.z(*w)\n", "python")
    java_pool = tokenize("class A { int f() { for (;;) { x = a ? b : c; } } }", "java")
    for lang, toks in (("python", pool), ("java", java_pool)):
        for _ in range(300):
            sample = [rng.choice(toks) for _ in range(rng.randint(0, 25))]
            check_spans(parse_subset(sample, lang))
