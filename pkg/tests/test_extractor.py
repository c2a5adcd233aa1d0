import json

import pytest
from hypothesis import given, strategies as st

from fruiter.errors import ScriptSyntaxError, UnknownApiError, UnresolvedDefinitionError, ValidationError
from fruiter.extractor import (
    ApiSignatureTable,
    Assign,
    Finder,
    Invoke,
    Var,
    extract_events,
    extract_script,
    ingest_events_json,
    parse_script,
    write_events_json,
)
from fruiter.model import Action, GuiEvent, Role, TestCase

from builders import ev


def test_parse_assign_and_invoke():
    stmts = parse_script('let e = findElementById("email")\ne.sendKeys("u@x.com")\n')
    assert stmts == [
        Assign("e", Finder("findElementById", "email")),
        Invoke(Var("e"), "sendKeys", "u@x.com"),
    ]


def test_parse_chained_finder():
    stmts = parse_script('findElementByXPath("//btn[1]").click()')
    assert stmts == [Invoke(Finder("findElementByXPath", "//btn[1]"), "click")]


def test_unclosed_paren_is_syntax_error():
    with pytest.raises(ScriptSyntaxError) as info:
        parse_script("let e = findElementById(\"x\")\ne.click(")
    err = info.value
    assert (err.line, err.column) == (2, 9)
    assert err.token == "end of line"


@pytest.mark.parametrize("text, line, column", [
    ('let = findElementById("x")', 1, 5),
    ('e.click() extra', 1, 11),
    ('findElementById(x).click()', 1, 17),
    ('e.sendKeys("unterminated)', 1, 12),
    ('e.click()\n  e;click()', 2, 4),
])
def test_syntax_errors_carry_position(text, line, column):
    with pytest.raises(ScriptSyntaxError) as info:
        parse_script(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_comments_blank_lines_and_escapes():
    text = '# header\n\n  # indented comment\nfindElementById("a\\"b\\\\c").sendKeys("q\\"") # trailing\n'
    assert extract_script(text) == [GuiEvent('a"b\\c', Action.SEND_KEYS, 'q"')]


def test_single_definition():
    assert extract_events([Assign("e", Finder("findElementById", "user")), Invoke(Var("e"), "click")]) == [
        ev("user", "click")
    ]


def test_last_definition_wins():
    # hand execution: e := "a", then e := "b"; the click sees only "b"
    stmts = [
        Assign("e", Finder("findElementById", "a")),
        Assign("e", Finder("findElementById", "b")),
        Invoke(Var("e"), "click"),
    ]
    assert extract_events(stmts) == [ev("b", "click")]


def test_definition_reaches_only_later_uses():
    text = """
let e = findElementById("a")
e.click()
let e = findElementById("b")
e.click()
"""
    assert extract_script(text) == [ev("a"), ev("b")]


def test_use_before_definition():
    with pytest.raises(UnresolvedDefinitionError) as info:
        extract_events([Invoke(Var("e"), "click", line=3)])
    assert info.value.name == "e" and info.value.line == 3


def test_unknown_apis():
    with pytest.raises(UnknownApiError, match="tap"):
        extract_script('findElementById("x").tap()')
    with pytest.raises(UnknownApiError, match="findElement"):
        extract_script('let e = findElement("x")')


def test_all_default_actions():
    text = """
let e = findElementById("field")
e.click()
e.sendKeys("hi")
e.longPress()
findElementByXPath("//list").swipe("up")
"""
    assert extract_script(text) == [
        ev("field", "click"), ev("field", "send_keys", "hi"), ev("field", "long_press"), ev("//list", "swipe"),
    ]


def test_send_keys_requires_text():
    with pytest.raises(ValidationError):
        extract_script('findElementById("x").sendKeys()')


def test_alternate_signature_table(tmp_path):
    # a Selenium-flavoured table: same script shape, different API names
    table_path = tmp_path / "selenium.json"
    table_path.write_text(json.dumps({
        "finder_apis": {"findElement": "xpath"},
        "action_apis": {"click": "click", "type": "send_keys"},
        "input_bearing": ["type"],
    }))
    table = ApiSignatureTable.load(table_path)
    text = 'let q = findElement("//input[@name=\'q\']")\nq.type("shoes")\nfindElement("//button").click()'
    assert extract_script(text, table) == [ev("//input[@name='q']", "send_keys", "shoes"), ev("//button")]
    with pytest.raises(UnknownApiError):
        extract_script('findElementById("x").click()', table)


def test_table_rejects_overlapping_names():
    with pytest.raises(ValidationError):
        ApiSignatureTable({"click": "id"}, {"click": "click"})


# -- properties -------------------------------------------------------------

locators = st.text(alphabet='abcXY/[]@="\\ 1', min_size=1, max_size=8)
actions = st.sampled_from([("click", None), ("longPress", None), ("sendKeys", "txt"), ("swipe", "left")])


def _quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _call(method, arg):
    return f"{method}({_quote(arg) if arg is not None else ''})"


@given(st.lists(st.tuples(locators, actions), min_size=1, max_size=8))
def test_variables_and_inline_finders_agree(steps):
    with_vars, inline = [], []
    for i, (loc, (method, arg)) in enumerate(steps):
        var = f"v{i % 3}"  # reuse names so later definitions shadow earlier ones
        with_vars.append(f"let {var} = findElementById({_quote(loc)})")
        with_vars.append(f"{var}.{_call(method, arg)}")
        inline.append(f"findElementById({_quote(loc)}).{_call(method, arg)}")
    a = extract_script("\n".join(with_vars))
    b = extract_script("\n".join(inline))
    assert a == b
    assert [e.locator for e in a] == [loc for loc, _ in steps]


@given(st.lists(st.tuples(locators, actions), min_size=1, max_size=8))
def test_extract_serialize_ingest_roundtrip(tmp_path_factory, steps):
    text = "\n".join(f"findElementById({_quote(loc)}).{_call(m, a)}" for loc, (m, a) in steps)
    events = extract_script(text)
    path = tmp_path_factory.mktemp("rt") / "t.events.json"
    write_events_json(TestCase("app", "t", Role.SOURCE, events), path)
    assert list(ingest_events_json(path).events) == events


# -- events JSON ingestion -------------------------------------------------------

def _events_file(tmp_path, events, role="source"):
    path = tmp_path / "t.events.json"
    path.write_text(json.dumps({"app_id": "a", "test_id": "t", "role": role, "events": events}))
    return path


def test_ingest_three_events(tmp_path):
    path = _events_file(tmp_path, [
        {"locator": "a", "action": "click"},
        {"locator": "b", "action": "send_keys", "input": "x"},
        {"locator": "c", "action": "long_press"},
    ])
    test = ingest_events_json(path)
    assert len(test) == 3
    assert test.events[1] == ev("b", "send_keys", "x")


def test_ingest_send_keys_without_input(tmp_path):
    path = _events_file(tmp_path, [{"locator": "a", "action": "send_keys"}])
    with pytest.raises(ValidationError) as info:
        ingest_events_json(path)
    assert info.value.field == "$.events[0]"
    assert "input" in str(info.value)


def test_ingest_empty_source(tmp_path):
    with pytest.raises(ValidationError) as info:
        ingest_events_json(_events_file(tmp_path, []))
    assert info.value.field == "$.events"
    assert len(ingest_events_json(_events_file(tmp_path, [], role="transferred"))) == 0


def test_ingest_unknown_action(tmp_path):
    with pytest.raises(ValidationError) as info:
        ingest_events_json(_events_file(tmp_path, [{"locator": "a", "action": "tap"}]))
    assert info.value.field == "$.events[0].action"
