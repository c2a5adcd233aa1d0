import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fruiter.corpus import load_corpus, validate_corpus, write_corpus
from fruiter.errors import CorpusIOError, ValidationError
from fruiter.model import (
    Action,
    AppEvent,
    AppModel,
    CanonicalMap,
    Corpus,
    FidelityMetrics,
    FidelitySets,
    GuiEvent,
    GuiMap,
    ResultEntry,
    Role,
    TestCase,
    UtilityMetrics,
)

from conftest import SIGNIN

names = st.text(alphabet="abcdefgh-_/:[]1", min_size=1, max_size=8)


@st.composite
def gui_events(draw):
    action = draw(st.sampled_from(list(Action)))
    value = draw(st.one_of(st.none(), st.text(max_size=6))) if action is Action.SEND_KEYS else None
    return GuiEvent(draw(names), action, value)


ratios = st.one_of(st.none(), st.fractions(min_value=0, max_value=1))


@st.composite
def result_entries(draw):
    src = draw(st.lists(gui_events(), max_size=4))
    trans = [draw(st.one_of(st.none(), gui_events())) for _ in src]
    gt = draw(st.lists(gui_events(), min_size=1, max_size=4))
    effort = draw(st.integers(0, 10))
    return ResultEntry(
        draw(names), draw(names), draw(names), draw(names), src, trans, gt,
        FidelitySets(src[:1], src[1:2], src[2:3], src[3:]),
        FidelityMetrics(*draw(st.tuples(*[st.integers(0, 9)] * 4)), draw(ratios), draw(ratios), draw(ratios)),
        UtilityMetrics(effort, Fraction(len(gt) - effort, len(gt)), len(gt)),
    )


@st.composite
def app_models(draw):
    acts = draw(st.lists(names, min_size=1, max_size=3, unique=True))
    by_act = {
        a: tuple(
            AppEvent(e, draw(st.sampled_from(acts)), tuple(draw(st.lists(names, max_size=3))))
            for e in draw(st.lists(gui_events(), max_size=3))
        )
        for a in acts
    }
    return AppModel(draw(names), acts[0], tuple(acts), by_act)


def roundtrip(x):
    # through actual JSON text, not just dicts
    return type(x).from_dict(json.loads(json.dumps(x.to_dict())))


@given(gui_events())
def test_event_roundtrip(e):
    assert roundtrip(e) == e


@given(st.dictionaries(names, names, max_size=5), names)
def test_canonical_map_roundtrip(entries, app):
    cm = CanonicalMap(app, entries)
    assert roundtrip(cm) == cm


@given(st.lists(st.tuples(gui_events(), st.one_of(st.none(), gui_events())), max_size=5))
def test_guimap_roundtrip(pairs):
    gm = GuiMap("a", "b", "naive", pairs, "t1")
    assert roundtrip(gm) == gm


@given(st.lists(gui_events(), min_size=1, max_size=5), st.sampled_from(list(Role)))
def test_testcase_roundtrip(events, role):
    t = TestCase("app", "t", role, events)
    assert roundtrip(t) == t


@given(app_models())
def test_app_model_roundtrip(model):
    assert roundtrip(model) == model


@given(result_entries())
def test_result_entry_roundtrip(entry):
    assert roundtrip(entry) == entry


def test_event_invariants():
    with pytest.raises(ValidationError):
        GuiEvent("", "click")
    with pytest.raises(ValidationError, match="only allowed with send_keys"):
        GuiEvent("x", "click", "text")
    with pytest.raises(ValidationError, match="unknown action"):
        GuiEvent("x", "tap")
    assert GuiEvent("x", "send_keys").input is None


def test_locators_are_case_sensitive():
    assert GuiEvent("Email", "click") != GuiEvent("email", "click")
    cm = CanonicalMap("a", {"Email": "signin_email"})
    assert cm.get_canonical("email") is None


def test_empty_events_only_for_transferred():
    TestCase("a", "t", Role.TRANSFERRED, ())
    for role in (Role.SOURCE, Role.GROUND_TRUTH):
        with pytest.raises(ValidationError):
            TestCase("a", "t", role, ())


def test_metrics_undefined_on_zero_denominators():
    m = FidelityMetrics.from_counts(0, 0, 0, 0)
    assert (m.accuracy, m.precision, m.recall) == (None, None, None)


def test_utility_metrics_formula_enforced():
    with pytest.raises(ValidationError):
        UtilityMetrics(2, Fraction(1, 2), 5)


def test_fidelity_sets_partition_counts_multiplicity():
    a, b = GuiEvent("a", "click"), GuiEvent("b", "click")
    sets = FidelitySets(correct=[a, a], missed=[b])
    assert sets.partitions([a, b, a])
    assert not sets.partitions([a, b])
    assert not sets.partitions([a, b, b])


def test_canonical_map_range_and_reverse():
    cm = CanonicalMap("a", {"z": "btn", "y": "btn", "x": "other"})
    assert cm.labels == {"btn", "other"}
    assert cm.locators_for("btn") == ["y", "z"]
    assert cm.contains("other") and not cm.contains("missing")


# -- validate_corpus ------------------------------------------------------------

def test_fixture_corpus_is_well_formed(signin_corpus):
    assert validate_corpus(signin_corpus) == []


def test_dangling_next_activity_reported(signin_corpus):
    wish = signin_corpus.apps["wish"]
    broken = AppModel.from_dict({
        **wish.to_dict(),
        "events_by_activity": {
            **wish.to_dict()["events_by_activity"],
            "a2": [{"locator": "a2-1", "action": "click", "next_activity": "nowhere"}],
        },
    })
    corpus = Corpus({**signin_corpus.apps, "wish": broken}, signin_corpus.tests, signin_corpus.canonical_maps)
    problems = validate_corpus(corpus)
    assert len(problems) == 1
    assert "nowhere" in problems[0].message


def test_test_for_unknown_app_reported(signin_corpus):
    stray = TestCase("ghost", "signin", Role.SOURCE, [GuiEvent("g1", "click")])
    corpus = Corpus(signin_corpus.apps, {**signin_corpus.tests, ("ghost", "signin"): stray},
                    signin_corpus.canonical_maps)
    problems = validate_corpus(corpus)
    assert len(problems) == 1
    assert "ghost" in str(problems[0])


def test_duplicate_locator_in_activity_reported():
    e = AppEvent(GuiEvent("x", "click"), "main")
    model = AppModel("a", "main", ("main",), {"main": (e, e)})
    corpus = Corpus({"a": model}, {}, {"a": CanonicalMap("a", {"x": "btn"})})
    problems = validate_corpus(corpus)
    assert [p.kind for p in problems] == ["model"]
    assert "duplicate locator" in problems[0].message


def test_duplicate_canonical_key_rejected_on_load(tmp_path):
    write_corpus(load_corpus(SIGNIN), tmp_path)
    path = tmp_path / "canonical" / "wish.canmap.json"
    path.write_text('{"app_id": "wish", "entries": {"a1-1": "x", "a1-1": "y"}}')
    with pytest.raises(ValidationError, match="duplicate key"):
        load_corpus(tmp_path)


def test_missing_corpus_is_io_error(tmp_path):
    with pytest.raises(CorpusIOError) as info:
        load_corpus(tmp_path / "absent")
    assert "absent" in str(info.value)


def test_unreadable_file_names_path(tmp_path):
    write_corpus(load_corpus(SIGNIN), tmp_path)
    bad = tmp_path / "apps" / "wish.model.json"
    bad.unlink()
    bad.mkdir()  # a directory where a file should be is skipped, not read
    (tmp_path / "apps" / "zz.model.json").write_bytes(b"\xff\xfe")
    with pytest.raises(CorpusIOError) as info:
        load_corpus(tmp_path)
    assert "zz.model.json" in str(info.value)


def test_write_then_load_is_identity(signin_corpus, tmp_path):
    write_corpus(signin_corpus, tmp_path)
    again = load_corpus(tmp_path)
    assert dict(again.apps) == dict(signin_corpus.apps)
    assert dict(again.tests) == dict(signin_corpus.tests)
    assert dict(again.canonical_maps) == dict(signin_corpus.canonical_maps)
