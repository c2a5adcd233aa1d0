"""Domain types shared across the framework, with their JSON forms.

Every type is a frozen dataclass. ``to_dict``/``from_dict`` give the
serialized form used by the corpus files and result outputs; for every type
``T.from_dict(x.to_dict()) == x``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence

from fruiter.errors import ValidationError

CanonicalEvent = str


class Action(str, enum.Enum):
    CLICK = "click"
    SEND_KEYS = "send_keys"
    LONG_PRESS = "long_press"
    SWIPE = "swipe"

    def __str__(self) -> str:
        return self.value


class Role(str, enum.Enum):
    SOURCE = "source"
    TRANSFERRED = "transferred"
    GROUND_TRUTH = "ground_truth"

    def __str__(self) -> str:
        return self.value


def _parse_enum(kind, value, what: str):
    try:
        return kind(value)
    except ValueError:
        choices = ", ".join(m.value for m in kind)
        raise ValidationError(f"unknown {what} {value!r} (expected one of {choices})") from None


@dataclass(frozen=True)
class GuiEvent:
    """An (element locator, action, optional input) triple.

    Locators are opaque keys: an element ID or an XPath, compared by exact,
    case-sensitive string equality.
    """

    locator: str
    action: Action
    input: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.action, Action):
            object.__setattr__(self, "action", _parse_enum(Action, self.action, "action"))
        if not isinstance(self.locator, str) or not self.locator:
            raise ValidationError("locator must be a non-empty string", field="locator")
        if self.input is not None and self.action is not Action.SEND_KEYS:
            raise ValidationError(
                f"input is only allowed with send_keys, not {self.action.value}", field="input"
            )

    def to_dict(self) -> dict:
        d = {"locator": self.locator, "action": self.action.value}
        if self.input is not None:
            d["input"] = self.input
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GuiEvent":
        return cls(d["locator"], d["action"], d.get("input"))

    def __str__(self) -> str:
        if self.input is None:
            return f"{self.locator}:{self.action.value}"
        return f"{self.locator}:{self.action.value}({self.input!r})"


def _events_from(items: Iterable[Mapping[str, Any]]) -> tuple[GuiEvent, ...]:
    return tuple(GuiEvent.from_dict(e) for e in items)


@dataclass(frozen=True)
class CanonicalMap:
    """Ground truth for one app: locator -> canonical event name.

    Several locators may share a canonical event; a locator has at most one.
    """

    app_id: str
    entries: Mapping[str, CanonicalEvent]

    def __post_init__(self):
        for loc, name in self.entries.items():
            if not loc or not name:
                raise ValidationError("empty locator or canonical name", field=f"entries.{loc}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __hash__(self):
        return hash((self.app_id, tuple(sorted(self.entries.items()))))

    def get_canonical(self, locator: str) -> Optional[CanonicalEvent]:
        return self.entries.get(locator)

    @property
    def labels(self) -> frozenset:
        """The map's range: every canonical event this app realizes."""
        return frozenset(self.entries.values())

    def contains(self, canonical: CanonicalEvent) -> bool:
        return canonical in self.labels

    def locators_for(self, canonical: CanonicalEvent) -> list[str]:
        return sorted(loc for loc, name in self.entries.items() if name == canonical)

    def to_dict(self) -> dict:
        return {"app_id": self.app_id, "entries": dict(sorted(self.entries.items()))}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CanonicalMap":
        return cls(d["app_id"], dict(d["entries"]))


@dataclass(frozen=True)
class GuiMap:
    """A technique's output for one test: source event -> transferred event or None.

    ``pairs`` follow the source test's order; ``None`` marks a null event.
    """

    source_app: str
    target_app: str
    technique: str
    pairs: tuple[tuple[GuiEvent, Optional[GuiEvent]], ...]
    test_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((s, t) for s, t in self.pairs))

    @property
    def source_events(self) -> tuple[GuiEvent, ...]:
        return tuple(s for s, _ in self.pairs)

    @property
    def transferred(self) -> tuple[Optional[GuiEvent], ...]:
        return tuple(t for _, t in self.pairs)

    def to_dict(self) -> dict:
        return {
            "source_app": self.source_app,
            "target_app": self.target_app,
            "technique": self.technique,
            "test_id": self.test_id,
            "pairs": [
                {"src": s.to_dict(), "trans": None if t is None else t.to_dict()}
                for s, t in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GuiMap":
        pairs = tuple(
            (GuiEvent.from_dict(p["src"]), None if p["trans"] is None else GuiEvent.from_dict(p["trans"]))
            for p in d["pairs"]
        )
        return cls(d["source_app"], d["target_app"], d["technique"], pairs, d.get("test_id"))


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # keep pytest from collecting this class

    app_id: str
    test_id: str
    role: Role
    events: tuple[GuiEvent, ...]

    def __post_init__(self):
        if not isinstance(self.role, Role):
            object.__setattr__(self, "role", _parse_enum(Role, self.role, "role"))
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events and self.role is not Role.TRANSFERRED:
            raise ValidationError(f"a {self.role.value} test must have at least one event", field="events")

    def __len__(self) -> int:
        return len(self.events)

    def with_role(self, role: Role) -> "TestCase":
        return TestCase(self.app_id, self.test_id, role, self.events)

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "test_id": self.test_id,
            "role": self.role.value,
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "TestCase":
        return cls(d["app_id"], d["test_id"], d["role"], _events_from(d["events"]))


@dataclass(frozen=True)
class AppEvent:
    """An event available in some activity, with where it leads."""

    event: GuiEvent
    next_activity: str
    label_tokens: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "label_tokens", tuple(self.label_tokens))

    @property
    def locator(self) -> str:
        return self.event.locator

    @property
    def action(self) -> Action:
        return self.event.action

    def to_dict(self) -> dict:
        d = self.event.to_dict()
        d["next_activity"] = self.next_activity
        d["label_tokens"] = list(self.label_tokens)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AppEvent":
        return cls(GuiEvent.from_dict(d), d["next_activity"], tuple(d.get("label_tokens", ())))


@dataclass(frozen=True)
class AppModel:
    """Activity graph plus the events each activity offers.

    Graph invariants (main and next activities exist, unique locators per
    activity) are reported by :func:`model_problems` rather than raised, so
    a malformed model can still be loaded and diagnosed.
    """

    app_id: str
    main_activity: str
    activities: tuple[str, ...]
    events_by_activity: Mapping[str, tuple[AppEvent, ...]]

    def __post_init__(self):
        object.__setattr__(self, "activities", tuple(self.activities))
        object.__setattr__(
            self,
            "events_by_activity",
            MappingProxyType({a: tuple(evs) for a, evs in self.events_by_activity.items()}),
        )

    def __hash__(self):
        return hash((self.app_id, self.main_activity, self.activities))

    def get_main_activity(self) -> str:
        return self.main_activity

    def get_all_events(self, activity: str) -> tuple[AppEvent, ...]:
        return self.events_by_activity.get(activity, ())

    def iter_events(self) -> Iterator[tuple[str, AppEvent]]:
        for act in self.activities:
            for ev in self.get_all_events(act):
                yield act, ev

    def find(self, locator: str) -> Optional[AppEvent]:
        """First event with this locator, scanning activities in declared order."""
        for _, ev in self.iter_events():
            if ev.locator == locator:
                return ev
        return None

    def to_dict(self) -> dict:
        return {
            "app_id": self.app_id,
            "main_activity": self.main_activity,
            "activities": list(self.activities),
            "events_by_activity": {
                a: [ev.to_dict() for ev in evs] for a, evs in self.events_by_activity.items()
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AppModel":
        return cls(
            d["app_id"],
            d["main_activity"],
            tuple(d["activities"]),
            {a: tuple(AppEvent.from_dict(e) for e in evs) for a, evs in d["events_by_activity"].items()},
        )


def model_problems(model: AppModel) -> list[str]:
    problems = []
    acts = set(model.activities)
    if len(acts) != len(model.activities):
        problems.append(f"app {model.app_id}: duplicate activity names")
    if model.main_activity not in acts:
        problems.append(f"app {model.app_id}: main activity {model.main_activity!r} is not a declared activity")
    for act, evs in model.events_by_activity.items():
        if act not in acts:
            problems.append(f"app {model.app_id}: events listed for unknown activity {act!r}")
        seen = set()
        for ev in evs:
            if ev.locator in seen:
                problems.append(f"app {model.app_id}: duplicate locator {ev.locator!r} in activity {act!r}")
            seen.add(ev.locator)
            if ev.next_activity not in acts:
                problems.append(
                    f"app {model.app_id}: event {ev.locator!r} in {act!r} leads to unknown activity {ev.next_activity!r}"
                )
    return problems


@dataclass(frozen=True)
class FidelitySets:
    """Per-position classification of source events into the four fidelity cases.

    Each source position lands in exactly one set; duplicates of the same
    event are classified independently.
    """

    correct: tuple[GuiEvent, ...] = ()
    incorrect: tuple[GuiEvent, ...] = ()
    missed: tuple[GuiEvent, ...] = ()
    non_exist: tuple[GuiEvent, ...] = ()

    def __post_init__(self):
        for name in ("correct", "incorrect", "missed", "non_exist"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return len(self.correct), len(self.incorrect), len(self.missed), len(self.non_exist)

    def partitions(self, src_events: Sequence[GuiEvent]) -> bool:
        """True when the four sets exactly cover ``src_events`` (as a multiset)."""
        union = Counter(self.correct) + Counter(self.incorrect) + Counter(self.missed) + Counter(self.non_exist)
        return sum(self.sizes) == len(src_events) and union == Counter(src_events)

    def to_dict(self) -> dict:
        return {
            name: [e.to_dict() for e in getattr(self, name)]
            for name in ("correct", "incorrect", "missed", "non_exist")
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FidelitySets":
        return cls(*(_events_from(d[n]) for n in ("correct", "incorrect", "missed", "non_exist")))


def _ratio(num: int, den: int) -> Optional[Fraction]:
    return Fraction(num, den) if den > 0 else None


def _ratio_to_json(x: Optional[Fraction]) -> Optional[str]:
    return None if x is None else f"{x.numerator}/{x.denominator}"


def _ratio_from_json(s: Optional[str]) -> Optional[Fraction]:
    return None if s is None else Fraction(s)


@dataclass(frozen=True)
class FidelityMetrics:
    """TP/FP/TN/FN counts with accuracy, precision and recall.

    A ratio is ``None`` (undefined) when its denominator is zero.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: Optional[Fraction] = None
    precision: Optional[Fraction] = None
    recall: Optional[Fraction] = None

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> "FidelityMetrics":
        return cls(
            tp, fp, tn, fn,
            accuracy=_ratio(tp + tn, tp + fp + tn + fn),
            precision=_ratio(tp, tp + fp),
            recall=_ratio(tp, tp + fn),
        )

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "accuracy": _ratio_to_json(self.accuracy),
            "precision": _ratio_to_json(self.precision),
            "recall": _ratio_to_json(self.recall),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FidelityMetrics":
        return cls(
            d["tp"], d["fp"], d["tn"], d["fn"],
            _ratio_from_json(d.get("accuracy")),
            _ratio_from_json(d.get("precision")),
            _ratio_from_json(d.get("recall")),
        )


@dataclass(frozen=True)
class UtilityMetrics:
    effort: int
    reduction: Fraction
    gt_length: int

    def __post_init__(self):
        if self.effort < 0:
            raise ValidationError("effort must be non-negative", field="effort")
        if self.gt_length < 1:
            raise ValidationError("ground-truth length must be positive", field="gt_length")
        if self.reduction != Fraction(self.gt_length - self.effort, self.gt_length):
            raise ValidationError("reduction disagrees with (gt_length - effort) / gt_length", field="reduction")

    def to_dict(self) -> dict:
        return {"effort": self.effort, "reduction": _ratio_to_json(self.reduction), "gt_length": self.gt_length}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "UtilityMetrics":
        return cls(d["effort"], Fraction(d["reduction"]), d["gt_length"])


@dataclass(frozen=True)
class ResultEntry:
    """Everything recorded about one transfer."""

    source_app: str
    target_app: str
    test_id: str
    technique: str
    source_events: tuple[GuiEvent, ...]
    # aligned with source_events; None marks a null event
    transferred_events: tuple[Optional[GuiEvent], ...]
    gt_events: tuple[GuiEvent, ...]
    fidelity_sets: FidelitySets
    fidelity_metrics: FidelityMetrics
    utility_metrics: UtilityMetrics

    def __post_init__(self):
        for name in ("source_events", "transferred_events", "gt_events"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def transferred_test(self) -> tuple[GuiEvent, ...]:
        return tuple(e for e in self.transferred_events if e is not None)

    def to_dict(self) -> dict:
        return {
            "source_app": self.source_app,
            "target_app": self.target_app,
            "test_id": self.test_id,
            "technique": self.technique,
            "source_events": [e.to_dict() for e in self.source_events],
            "transferred_events": [None if e is None else e.to_dict() for e in self.transferred_events],
            "gt_events": [e.to_dict() for e in self.gt_events],
            "fidelity_sets": self.fidelity_sets.to_dict(),
            "fidelity_metrics": self.fidelity_metrics.to_dict(),
            "utility_metrics": self.utility_metrics.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ResultEntry":
        return cls(
            d["source_app"], d["target_app"], d["test_id"], d["technique"],
            _events_from(d["source_events"]),
            tuple(None if e is None else GuiEvent.from_dict(e) for e in d["transferred_events"]),
            _events_from(d["gt_events"]),
            FidelitySets.from_dict(d["fidelity_sets"]),
            FidelityMetrics.from_dict(d["fidelity_metrics"]),
            UtilityMetrics.from_dict(d["utility_metrics"]),
        )


@dataclass(frozen=True)
class Corpus:
    """Apps, their tests and canonical maps, plus any stored GUI maps."""

    apps: Mapping[str, AppModel] = field(default_factory=dict)
    tests: Mapping[tuple[str, str], TestCase] = field(default_factory=dict)
    canonical_maps: Mapping[str, CanonicalMap] = field(default_factory=dict)
    guimaps: tuple[GuiMap, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "apps", MappingProxyType(dict(self.apps)))
        object.__setattr__(self, "tests", MappingProxyType(dict(self.tests)))
        object.__setattr__(self, "canonical_maps", MappingProxyType(dict(self.canonical_maps)))
        object.__setattr__(self, "guimaps", tuple(self.guimaps))

    def test_ids(self, app_id: str) -> list[str]:
        return sorted(t for a, t in self.tests if a == app_id)

    def test(self, app_id: str, test_id: str) -> Optional[TestCase]:
        return self.tests.get((app_id, test_id))
