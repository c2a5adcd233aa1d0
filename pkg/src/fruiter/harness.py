"""Benchmark harness: expand a plan into transfers, run them, record results."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from fruiter import __version__, schemas
from fruiter.errors import FruiterError, GenerationError, PlanError, ValidationError
from fruiter.fidelity import compute_fidelity_metrics, derive_gui_map, evaluate_fidelity
from fruiter.mappers import REGISTRY, MapperConfig, MapRequest, get_mapper
from fruiter.model import (
    Action,
    AppEvent,
    AppModel,
    CanonicalMap,
    Corpus,
    GuiEvent,
    ResultEntry,
    Role,
    TestCase,
)
from fruiter.rng import SplitMix64, derive_seed
from fruiter.utility import LENIENT, MODES, evaluate_utility

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Category:
    name: str
    app_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "app_ids", tuple(self.app_ids))
        if len(set(self.app_ids)) != len(self.app_ids):
            raise PlanError(f"category {self.name!r} lists an app more than once")


@dataclass(frozen=True)
class TechniqueSpec:
    """A technique under a result name, e.g. ``naive-t0.5`` running ``naive``."""

    name: str
    config: MapperConfig


@dataclass(frozen=True)
class BenchmarkPlan:
    categories: tuple[Category, ...]
    techniques: tuple[TechniqueSpec, ...]
    include_self_pairs: bool = True
    equality_mode: str = LENIENT
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "techniques", tuple(self.techniques))
        if self.equality_mode not in MODES:
            raise PlanError(f"unknown equality mode {self.equality_mode!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "BenchmarkPlan":
        schemas.check(d, "plan")
        techniques = []
        for t in d["techniques"]:
            cfg = MapperConfig(
                t["technique"],
                threshold=t.get("threshold", 0.5),
                seed=t.get("seed", 0),
                tie_break=t.get("tie_break", "lexicographic"),
            )
            techniques.append(TechniqueSpec(t.get("name", t["technique"]), cfg))
        return cls(
            tuple(Category(c["name"], tuple(c["app_ids"])) for c in d["categories"]),
            tuple(techniques),
            d.get("include_self_pairs", True),
            d.get("equality_mode", LENIENT),
            d.get("workers", 1),
        )

    def to_dict(self) -> dict:
        return {
            "categories": [{"name": c.name, "app_ids": list(c.app_ids)} for c in self.categories],
            "techniques": [
                {"name": t.name, **t.config.to_dict()} for t in self.techniques
            ],
            "include_self_pairs": self.include_self_pairs,
            "equality_mode": self.equality_mode,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class Transfer:
    category: str
    source_app: str
    target_app: str
    test_id: str
    technique: TechniqueSpec


@dataclass(frozen=True)
class Skipped:
    source_app: str
    target_app: str
    test_id: str
    technique: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class BenchmarkRun:
    """Result entries and skipped transfers, both in plan order."""

    entries: tuple[ResultEntry, ...]
    skipped: tuple[Skipped, ...]
    n_planned: int


def plan_transfers(plan: BenchmarkPlan, corpus: Corpus) -> list[Transfer]:
    """Every (source, target, source test, technique) in deterministic order.

    Pairs stay inside a category; self pairs only when the plan asks.
    """
    if not plan.techniques:
        raise PlanError("plan lists no techniques")
    names = [t.name for t in plan.techniques]
    if len(set(names)) != len(names):
        raise PlanError(f"duplicate technique names in plan: {names}")
    for t in plan.techniques:
        if t.config.technique not in REGISTRY:
            raise PlanError(f"unknown technique {t.config.technique!r}; registered: {sorted(REGISTRY)}")
    transfers = []
    for cat in plan.categories:
        for app in cat.app_ids:
            if app not in corpus.apps:
                raise PlanError(f"category {cat.name!r} names unknown app {app!r}")
        for src in cat.app_ids:
            for tgt in cat.app_ids:
                if src == tgt and not plan.include_self_pairs:
                    continue
                for test_id in corpus.test_ids(src):
                    for tech in plan.techniques:
                        transfers.append(Transfer(cat.name, src, tgt, test_id, tech))
    return transfers


def transfer_config(t: Transfer) -> MapperConfig:
    """Per-transfer config: the plan seed is mixed with the transfer's identity."""
    base = t.technique.config
    seed = derive_seed(base.seed, t.source_app, t.target_app, t.test_id)
    return MapperConfig(base.technique, base.threshold, seed, base.tie_break)


def run_transfer(t: Transfer, corpus: Corpus, mode: str = LENIENT) -> ResultEntry | Skipped:
    src_test = corpus.test(t.source_app, t.test_id)
    gt = corpus.test(t.target_app, t.test_id)
    if gt is None:
        return Skipped(t.source_app, t.target_app, t.test_id, t.technique.name, "missing_ground_truth",
                       f"{t.target_app} has no test {t.test_id!r}")
    try:
        src_can = corpus.canonical_maps.get(t.source_app)
        tgt_can = corpus.canonical_maps.get(t.target_app)
        if src_can is None or tgt_can is None:
            missing = t.source_app if src_can is None else t.target_app
            raise ValidationError(f"app {missing!r} has no canonical map")
        req = MapRequest(src_test.events, corpus.apps[t.source_app], corpus.apps[t.target_app], src_can, tgt_can)
        cfg = transfer_config(t)
        trans = get_mapper(cfg.technique)(req, cfg)
        gm = derive_gui_map(src_test.events, trans, t.source_app, t.target_app, t.technique.name, t.test_id)
        sets = evaluate_fidelity(src_test.events, gm, src_can, tgt_can)
        metrics = compute_fidelity_metrics(sets)
        utility = evaluate_utility(trans, gt.with_role(Role.GROUND_TRUTH), mode)
    except FruiterError as exc:
        log.warning("transfer %s->%s/%s [%s] failed: %s", t.source_app, t.target_app, t.test_id,
                    t.technique.name, exc)
        return Skipped(t.source_app, t.target_app, t.test_id, t.technique.name,
                       f"error:{type(exc).__name__}", str(exc))
    return ResultEntry(t.source_app, t.target_app, t.test_id, t.technique.name,
                       src_test.events, trans, gt.events, sets, metrics, utility)


def run_benchmark(plan: BenchmarkPlan, corpus: Corpus, mode: Optional[str] = None,
                  workers: Optional[int] = None) -> BenchmarkRun:
    """Run every planned transfer; one transfer's failure never stops the rest."""
    mode = mode or plan.equality_mode
    workers = workers or plan.workers
    transfers = plan_transfers(plan, corpus)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda t: run_transfer(t, corpus, mode), transfers))
    else:
        outcomes = [run_transfer(t, corpus, mode) for t in transfers]
    entries = tuple(o for o in outcomes if isinstance(o, ResultEntry))
    skipped = tuple(o for o in outcomes if isinstance(o, Skipped))
    for s in skipped:
        if s.reason == "missing_ground_truth":
            log.info("skipped %s->%s/%s [%s]: %s", s.source_app, s.target_app, s.test_id, s.technique, s.detail)
    return BenchmarkRun(entries, skipped, len(transfers))


# -- synthetic corpora --------------------------------------------------------

@dataclass(frozen=True)
class SyntheticCorpusSpec:
    n_apps: int
    activities_per_app: int
    events_per_activity: int
    n_canonical: int
    tests_per_app: int
    test_length_range: tuple[int, int]
    canonical_coverage: float
    seed: int
    app_prefix: str = "app"

    def __post_init__(self):
        object.__setattr__(self, "test_length_range", tuple(self.test_length_range))
        for name in ("n_apps", "activities_per_app", "events_per_activity", "n_canonical", "tests_per_app"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be at least 1", field=name)
        lo, hi = self.test_length_range
        if not 1 <= lo <= hi:
            raise ValidationError("test_length_range must satisfy 1 <= lo <= hi", field="test_length_range")
        if not 0 < self.canonical_coverage <= 1:
            raise ValidationError("canonical_coverage must lie in (0, 1]", field="canonical_coverage")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must be an unsigned 64-bit integer", field="seed")

    @property
    def labels_per_app(self) -> int:
        return max(1, math.floor(self.canonical_coverage * self.n_canonical + 0.5))

    @classmethod
    def from_dict(cls, d: Mapping) -> "SyntheticCorpusSpec":
        schemas.check(d, "synthetic")
        return cls(**{**d, "test_length_range": tuple(d["test_length_range"])})

    def to_dict(self) -> dict:
        return {
            "n_apps": self.n_apps,
            "activities_per_app": self.activities_per_app,
            "events_per_activity": self.events_per_activity,
            "n_canonical": self.n_canonical,
            "tests_per_app": self.tests_per_app,
            "test_length_range": list(self.test_length_range),
            "canonical_coverage": self.canonical_coverage,
            "seed": self.seed,
            "app_prefix": self.app_prefix,
        }


_WORDS = (
    "sign", "in", "up", "email", "password", "search", "cart", "add", "menu", "home",
    "account", "settings", "back", "next", "submit", "filter", "sort", "share", "like",
    "news", "article", "category", "profile", "logout", "checkout", "wishlist", "review", "save",
)
_ACTIONS = (Action.CLICK, Action.CLICK, Action.CLICK, Action.SEND_KEYS, Action.LONG_PRESS, Action.SWIPE)
_MAX_WALK_EXPANSIONS = 100_000


def generate_synthetic_corpus(spec: SyntheticCorpusSpec) -> Corpus:
    """Seeded random corpus whose ground truth is known by construction.

    All apps draw from one canonical vocabulary; each realizes
    ``labels_per_app`` of it with app-specific locators. Every model event
    carries a canonical label and every activity is reachable. Tests are
    walks over an app's activity graph that avoid repeating an event
    whenever the graph allows; test ids are shared across apps so every test
    has a ground truth on every target.
    """
    rng = SplitMix64(spec.seed)
    n_events = spec.activities_per_app * spec.events_per_activity
    k = spec.labels_per_app
    if k > n_events:
        raise GenerationError(f"{k} canonical labels per app but only {n_events} events per app")
    lo, hi = spec.test_length_range
    if hi > n_events:
        raise GenerationError(f"tests may need {hi} events but an app has only {n_events}")

    vocab = [f"ev{i:03d}" for i in range(spec.n_canonical)]
    label_action = {}
    label_tokens = {}
    for name in vocab:
        label_action[name] = _ACTIONS[rng.below(len(_ACTIONS))]
        a, b = rng.below(len(_WORDS)), rng.below(len(_WORDS))
        label_tokens[name] = (_WORDS[a], _WORDS[b], name)

    width = max(2, len(str(spec.n_apps - 1)))
    apps, tests, canmaps = {}, {}, {}
    for i in range(spec.n_apps):
        app_id = f"{spec.app_prefix}{i:0{width}d}"
        order = list(range(spec.n_canonical))
        rng.shuffle(order)
        realized = sorted(vocab[j] for j in order[:k])
        labels = list(realized) + [realized[rng.below(k)] for _ in range(n_events - k)]
        rng.shuffle(labels)

        activities = tuple(f"A{a}" for a in range(spec.activities_per_app))
        events_by_activity = {}
        entries = {}
        pos = 0
        for a, act in enumerate(activities):
            evs = []
            for j in range(spec.events_per_activity):
                label = labels[pos]
                pos += 1
                locator = f"{app_id}:id/{act.lower()}_w{j}"
                if j == 0:
                    # a cycle through all activities keeps the graph strongly connected
                    nxt = activities[(a + 1) % len(activities)]
                else:
                    nxt = activities[rng.below(len(activities))]
                tokens = list(label_tokens[label])
                if rng.below(4) == 0:
                    tokens[rng.below(2)] = _WORDS[rng.below(len(_WORDS))]
                evs.append(AppEvent(GuiEvent(locator, label_action[label]), nxt, tuple(tokens)))
                entries[locator] = label
            events_by_activity[act] = tuple(evs)
        model = AppModel(app_id, activities[0], activities, events_by_activity)
        apps[app_id] = model
        canmaps[app_id] = CanonicalMap(app_id, entries)

        for t in range(spec.tests_per_app):
            test_id = f"t{t:02d}"
            length = lo + rng.below(hi - lo + 1)
            walk = _random_walk(model, length, rng)
            if walk is None:
                # some graphs admit no repeat-free walk that long
                walk = _walk_with_repeats(model, length, rng)
            events = [
                GuiEvent(e.locator, e.action, f"text{rng.below(1000)}" if e.action is Action.SEND_KEYS else None)
                for e in walk
            ]
            tests[app_id, test_id] = TestCase(app_id, test_id, Role.SOURCE, events)
    return Corpus(apps, tests, canmaps)


def _random_walk(model: AppModel, length: int, rng: SplitMix64) -> Optional[list[AppEvent]]:
    """Seeded depth-first search for a walk of ``length`` that never reuses an event.

    The first branch tried at every step is a uniformly random choice, so
    usually this is a plain random walk; it only backtracks on dead ends.
    Returns None when no such walk exists or the search budget runs out.
    """
    budget = _MAX_WALK_EXPANSIONS
    used: set = set()
    walk: list[AppEvent] = []
    activity = [model.main_activity]
    stack = [_shuffled_options(model, model.main_activity, used, rng)]
    while stack:
        if len(walk) == length:
            return walk
        options = stack[-1]
        if not options:
            stack.pop()
            if walk:
                ev = walk.pop()
                activity.pop()
                used.discard((activity[-1], ev.locator))
            continue
        budget -= 1
        if budget < 0:
            return None
        ev = options.pop()
        used.add((activity[-1], ev.locator))
        walk.append(ev)
        activity.append(ev.next_activity)
        stack.append(_shuffled_options(model, ev.next_activity, used, rng))
    return None


def _walk_with_repeats(model: AppModel, length: int, rng: SplitMix64) -> list[AppEvent]:
    current = model.main_activity
    walk = []
    for _ in range(length):
        options = model.get_all_events(current)
        ev = options[rng.below(len(options))]
        walk.append(ev)
        current = ev.next_activity
    return walk


def _shuffled_options(model: AppModel, current: str, used: set, rng: SplitMix64) -> list[AppEvent]:
    options = [e for e in model.get_all_events(current) if (current, e.locator) not in used]
    rng.shuffle(options)
    return options


# -- run outputs ----------------------------------------------------------------

def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def corpus_digest(corpus: Corpus) -> str:
    blob = {
        "apps": {a: corpus.apps[a].to_dict() for a in sorted(corpus.apps)},
        "tests": {f"{a}/{t}": corpus.tests[a, t].to_dict() for a, t in sorted(corpus.tests)},
        "canonical": {a: corpus.canonical_maps[a].to_dict() for a in sorted(corpus.canonical_maps)},
    }
    return _sha256(json.dumps(blob, sort_keys=True))


def build_manifest(plan: BenchmarkPlan, corpus: Corpus, run: BenchmarkRun,
                   source: Optional[Mapping] = None) -> dict:
    """Everything needed to reproduce a run; deliberately free of timestamps."""
    plan_dict = plan.to_dict()
    return {
        "fruiter_version": __version__,
        "plan": plan_dict,
        "corpus_source": dict(source or {}),
        "seeds": {t.name: t.config.seed for t in plan.techniques},
        "hashes": {
            "plan_sha256": _sha256(json.dumps(plan_dict, sort_keys=True)),
            "corpus_sha256": corpus_digest(corpus),
        },
        "counts": {
            "planned": run.n_planned,
            "entries": len(run.entries),
            "skipped": len(run.skipped),
        },
    }


def write_run(run: BenchmarkRun, plan: BenchmarkPlan, corpus: Corpus, out_dir,
              source: Optional[Mapping] = None) -> dict[str, Path]:
    """Write results.csv, results.jsonl, skipped.csv and manifest.json into ``out_dir``."""
    from fruiter.reporting import write_results_csv, write_skipped_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / "results.csv",
        "entries": out / "results.jsonl",
        "skipped": out / "skipped.csv",
        "manifest": out / "manifest.json",
    }
    write_results_csv(run.entries, paths["results"])
    with open(paths["entries"], "w", encoding="utf-8", newline="\n") as fh:
        for e in run.entries:
            fh.write(json.dumps(e.to_dict(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")
    write_skipped_csv(run.skipped, paths["skipped"])
    paths["manifest"].write_text(schemas.dump_json(build_manifest(plan, corpus, run, source)), encoding="utf-8")
    return paths
