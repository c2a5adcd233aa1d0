"""Fidelity evaluation: classify each source event of a transfer.

Each source event is checked against the GUI map and the two apps' canonical
maps and lands in one of four sets:

* correct   -- mapped, and the target event has the source's canonical label
* incorrect -- mapped to a target event with a different label
* missed    -- not mapped, although the target app realizes the label
* non_exist -- not mapped, and the target app has no such label

which count as TP, FP, FN and TN respectively.
"""

from __future__ import annotations

from typing import Optional, Sequence

from fruiter.errors import AlignmentError, GroundTruthGapError
from fruiter.model import CanonicalMap, FidelityMetrics, FidelitySets, GuiEvent, GuiMap


def evaluate_fidelity(
    src_events: Sequence[GuiEvent],
    gui_map: GuiMap,
    src_can_map: CanonicalMap,
    tgt_can_map: CanonicalMap,
) -> FidelitySets:
    if len(gui_map.pairs) != len(src_events):
        raise AlignmentError(
            f"GUI map has {len(gui_map.pairs)} pairs for {len(src_events)} source events"
        )
    correct, incorrect, missed, non_exist = [], [], [], []
    tgt_labels = tgt_can_map.labels
    for i, src in enumerate(src_events):
        mapped_src, trans = gui_map.pairs[i]
        if mapped_src != src:
            raise AlignmentError(f"pair {i} maps {mapped_src}, expected source event {src}")
        src_can = src_can_map.get_canonical(src.locator)
        if src_can is None:
            raise GroundTruthGapError(src_can_map.app_id, src.locator)
        if trans is not None:
            trans_can = tgt_can_map.get_canonical(trans.locator)
            if trans_can is None:
                raise GroundTruthGapError(tgt_can_map.app_id, trans.locator)
            (correct if trans_can == src_can else incorrect).append(src)
        elif src_can in tgt_labels:
            missed.append(src)
        else:
            non_exist.append(src)
    return FidelitySets(correct, incorrect, missed, non_exist)


def compute_fidelity_metrics(sets: FidelitySets) -> FidelityMetrics:
    n_correct, n_incorrect, n_missed, n_non_exist = sets.sizes
    return FidelityMetrics.from_counts(tp=n_correct, fp=n_incorrect, tn=n_non_exist, fn=n_missed)


def derive_gui_map(
    src_events: Sequence[GuiEvent],
    trans_events: Sequence[Optional[GuiEvent]],
    source_app: str,
    target_app: str,
    technique: str,
    test_id: Optional[str] = None,
) -> GuiMap:
    """Pair a technique's aligned output (None for null events) with its source test."""
    if len(src_events) != len(trans_events):
        raise AlignmentError(
            f"{len(src_events)} source events but {len(trans_events)} transferred entries"
        )
    return GuiMap(source_app, target_app, technique, tuple(zip(src_events, trans_events)), test_id)
