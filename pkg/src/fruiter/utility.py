"""Utility metrics: how far a transferred test is from the ground truth.

``effort`` is the event-level Levenshtein distance (unit-cost insert, delete,
substitute) and ``reduction`` the share of manual writing it saves.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence, Union

from fruiter.errors import ValidationError
from fruiter.model import GuiEvent, Role, TestCase, UtilityMetrics

LENIENT = "lenient"
STRICT = "strict"
MODES = (LENIENT, STRICT)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"equality mode must be one of {MODES}, got {mode!r}")


def event_key(event: GuiEvent, mode: str = LENIENT) -> Hashable:
    """Key under which two events compare equal in ``mode``."""
    if mode == LENIENT:
        return (event.locator, event.action)
    _check_mode(mode)
    return (event.locator, event.action, event.input)


def event_equal(a: GuiEvent, b: GuiEvent, mode: str = LENIENT) -> bool:
    """Lenient mode ignores input values; strict compares the whole triple."""
    return event_key(a, mode) == event_key(b, mode)


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost edit distance between two sequences of comparable keys."""
    # a shared prefix or suffix never costs anything
    start, end_a, end_b = 0, len(a), len(b)
    while start < end_a and start < end_b and a[start] == b[start]:
        start += 1
    while end_a > start and end_b > start and a[end_a - 1] == b[end_b - 1]:
        end_a -= 1
        end_b -= 1
    a, b = a[start:end_a], b[start:end_b]
    if not a or not b:
        return len(a) + len(b)
    return _bit_parallel(a, b)


def _bit_parallel(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Myers/Hyyro bit-vector edit distance; a DP column lives in two ints.

    Bit i of ``pv``/``mv`` says the column value rises/falls by one between
    rows i and i+1. Python ints are unbounded, so any ``len(a)`` works.
    """
    peq: dict = {}
    for i, x in enumerate(a):
        peq[x] = peq.get(x, 0) | (1 << i)
    mask = (1 << len(a)) - 1
    high = 1 << (len(a) - 1)
    pv, mv, score = mask, 0, len(a)
    for y in b:
        eq = peq.get(y, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | ~(xh | pv)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = (mh | ~(xv | ph)) & mask
        mv = ph & xv
    return score


def effort(
    transferred: Sequence[Optional[GuiEvent]],
    ground_truth: Union[Sequence[GuiEvent], Iterable[Sequence[GuiEvent]]],
    mode: str = LENIENT,
) -> int:
    """Edit steps needed to turn ``transferred`` into ``ground_truth``.

    Null placeholders in ``transferred`` are dropped first. ``ground_truth`` may
    also be a collection of acceptable ground truths, in which case the
    smallest distance wins.
    """
    _check_mode(mode)
    if mode == STRICT:
        keys = [(e.locator, e.action, e.input) for e in transferred if e is not None]
        return min(levenshtein(keys, [(e.locator, e.action, e.input) for e in gt])
                   for gt in _ground_truths(ground_truth))
    keys = [(e.locator, e.action) for e in transferred if e is not None]
    return min(levenshtein(keys, [(e.locator, e.action) for e in gt]) for gt in _ground_truths(ground_truth))


def _ground_truths(ground_truth) -> list[Sequence[GuiEvent]]:
    if isinstance(ground_truth, TestCase):
        return [ground_truth.events]
    if isinstance(ground_truth, (list, tuple)) and (not ground_truth or isinstance(ground_truth[0], GuiEvent)):
        return [ground_truth]
    items = list(ground_truth)
    if items and all(isinstance(x, GuiEvent) for x in items):
        return [items]
    if not items:
        return [[]]
    return [g.events if isinstance(g, TestCase) else list(g) for g in items]


def reduction(gt_length: int, effort_value: int) -> Fraction:
    """(gt_length - effort) / gt_length; negative when fixing costs more than rewriting."""
    if gt_length < 1:
        raise ValidationError("ground-truth test must have at least one event", field="gt_length")
    return Fraction(gt_length - effort_value, gt_length)


def evaluate_utility(
    transferred: Union[TestCase, Sequence[Optional[GuiEvent]]],
    ground_truth: Union[TestCase, Sequence[TestCase]],
    mode: str = LENIENT,
) -> UtilityMetrics:
    """Effort and reduction of a transfer against its ground truth.

    With several acceptable ground truths, the one needing the least effort
    is used and its length is the reduction's denominator.
    """
    events = transferred.events if isinstance(transferred, TestCase) else transferred
    gts = [ground_truth] if isinstance(ground_truth, TestCase) else list(ground_truth)
    if not gts:
        raise ValidationError("no ground-truth test given")
    best = None
    for gt in gts:
        if gt.role is not Role.GROUND_TRUTH:
            raise ValidationError(f"test {gt.app_id}/{gt.test_id} has role {gt.role.value}, expected ground_truth")
        if not gt.events:
            raise ValidationError("ground-truth test must have at least one event", field="gt_length")
        value = effort(events, gt.events, mode)
        if best is None or value < best[0]:
            best = (value, len(gt.events))
    value, gt_length = best
    return UtilityMetrics(value, reduction(gt_length, value), gt_length)
