"""GUI mappers: turn a source test into an aligned list of target events.

Every mapper returns one entry per source event, ``None`` where it found no
counterpart. Mappers register under a technique name so the harness and CLI
can look them up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from fruiter.errors import GroundTruthGapError, ModelGapError, ValidationError
from fruiter.model import Action, AppEvent, AppModel, CanonicalMap, GuiEvent
from fruiter.rng import SplitMix64

Transferred = list[Optional[GuiEvent]]


@dataclass(frozen=True)
class MapperConfig:
    technique: str
    threshold: float = 0.5
    seed: int = 0
    tie_break: str = "lexicographic"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold must lie in [0, 1], got {self.threshold}", field="threshold")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must be an unsigned 64-bit integer", field="seed")
        if self.tie_break != "lexicographic":
            raise ValidationError(f"unsupported tie_break {self.tie_break!r}", field="tie_break")

    def to_dict(self) -> dict:
        return {"technique": self.technique, "threshold": self.threshold, "seed": self.seed,
                "tie_break": self.tie_break}


def _emit(src: GuiEvent, target: AppEvent) -> GuiEvent:
    # the target element receives the source's input text, if any
    value = src.input if target.action is Action.SEND_KEYS else None
    return GuiEvent(target.locator, target.action, value)


def naive_map(src_events: Sequence[GuiEvent], target: AppModel, cfg: MapperConfig) -> Transferred:
    """Random lower-bound mapper.

    Starting at the main activity, each source event sees the current
    activity's events in a fresh random order. Every candidate with the same
    action draws a random similarity in (0, 1); the first draw strictly above
    the threshold wins and moves exploration to that event's next activity.
    """
    rng = SplitMix64(cfg.seed)
    current = target.get_main_activity()
    out: Transferred = []
    for src in src_events:
        candidates = list(target.get_all_events(current))
        rng.shuffle(candidates)
        chosen = None
        for cand in candidates:
            if cand.action != src.action:
                continue
            if rng.open_unit() > cfg.threshold:
                chosen = cand
                break
        if chosen is None:
            out.append(None)
        else:
            out.append(_emit(src, chosen))
            current = chosen.next_activity
    return out


def perfect_map(
    src_events: Sequence[GuiEvent], src_can_map: CanonicalMap, tgt_can_map: CanonicalMap
) -> Transferred:
    """Upper-bound mapper: go through the canonical event to the target.

    When several target locators share the label, the lexicographically
    smallest one is used.
    """
    out: Transferred = []
    for src in src_events:
        label = src_can_map.get_canonical(src.locator)
        if label is None:
            raise GroundTruthGapError(src_can_map.app_id, src.locator)
        locators = tgt_can_map.locators_for(label)
        out.append(GuiEvent(locators[0], src.action, src.input) if locators else None)
    return out


def jaccard(a: Sequence[str], b: Sequence[str]) -> float:
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def similarity_map(
    src_events: Sequence[GuiEvent], source: AppModel, target: AppModel, cfg: MapperConfig
) -> Transferred:
    """Reference similarity-based mapper.

    Same exploration loop as the naive mapper, but candidates are ranked by
    Jaccard similarity of their label tokens (ties: smaller locator first)
    and must score strictly above the threshold.
    """
    current = target.get_main_activity()
    out: Transferred = []
    for src in src_events:
        src_info = source.find(src.locator)
        if src_info is None:
            raise ModelGapError(source.app_id, src.locator)
        scored = sorted(
            ((jaccard(src_info.label_tokens, cand.label_tokens), cand) for cand in target.get_all_events(current)),
            key=lambda sc: (-sc[0], sc[1].locator),
        )
        chosen = None
        for score, cand in scored:
            if cand.action == src.action and score > cfg.threshold:
                chosen = cand
                break
        if chosen is None:
            out.append(None)
        else:
            out.append(_emit(src, chosen))
            current = chosen.next_activity
    return out


@dataclass(frozen=True)
class MapRequest:
    """Everything a registered mapper may draw on for one transfer."""

    src_events: Sequence[GuiEvent]
    source: Optional[AppModel]
    target: Optional[AppModel]
    src_can_map: Optional[CanonicalMap]
    tgt_can_map: Optional[CanonicalMap]


Mapper = Callable[[MapRequest, MapperConfig], Transferred]

REGISTRY: dict[str, Mapper] = {}


def register(name: str):
    def deco(fn: Mapper) -> Mapper:
        REGISTRY[name] = fn
        return fn
    return deco


@register("naive")
def _naive(req: MapRequest, cfg: MapperConfig) -> Transferred:
    return naive_map(req.src_events, req.target, cfg)


@register("perfect")
def _perfect(req: MapRequest, cfg: MapperConfig) -> Transferred:
    return perfect_map(req.src_events, req.src_can_map, req.tgt_can_map)


@register("similarity")
def _similarity(req: MapRequest, cfg: MapperConfig) -> Transferred:
    return similarity_map(req.src_events, req.source, req.target, cfg)


def get_mapper(name: str) -> Mapper:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown technique {name!r}; registered: {sorted(REGISTRY)}") from None
