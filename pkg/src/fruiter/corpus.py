"""Corpus directories: reading, writing and well-formedness checks.

Layout::

    apps/<app_id>.model.json
    tests/<app_id>/<test_id>.script | <test_id>.events.json
    canonical/<app_id>.canmap.json
    guimaps/<technique>/<src>__<tgt>__<test_id>.guimap.json
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fruiter import schemas
from fruiter.errors import CorpusIOError, ValidationError
from fruiter.extractor import ApiSignatureTable, read_script_test
from fruiter.model import AppModel, CanonicalMap, Corpus, GuiMap, Role, TestCase, model_problems

log = logging.getLogger(__name__)

MODEL_SUFFIX = ".model.json"
CANMAP_SUFFIX = ".canmap.json"
EVENTS_SUFFIX = ".events.json"
SCRIPT_SUFFIX = ".script"
GUIMAP_SUFFIX = ".guimap.json"


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.subject}: {self.message}"


def _strip(name: str, suffix: str) -> str:
    return name[: -len(suffix)]


def _sorted_files(directory: Path, suffix: str) -> list[Path]:
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.is_file() and p.name.endswith(suffix))


def load_corpus(root, table: Optional[ApiSignatureTable] = None) -> Corpus:
    """Read a corpus directory. Schema errors raise; semantic ones are left to :func:`validate_corpus`."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusIOError(root, "not a corpus directory")
    apps = {}
    for path in _sorted_files(root / "apps", MODEL_SUFFIX):
        model = AppModel.from_dict(schemas.load_json(path, "model"))
        if model.app_id in apps:
            raise ValidationError(f"app {model.app_id!r} defined twice", path=str(path))
        apps[model.app_id] = model

    tests = {}
    tests_dir = root / "tests"
    if tests_dir.is_dir():
        for app_dir in sorted(p for p in tests_dir.iterdir() if p.is_dir()):
            for path in sorted(app_dir.iterdir()):
                if path.name.endswith(EVENTS_SUFFIX):
                    test = TestCase.from_dict(schemas.load_json(path, "events"))
                    test_id = _strip(path.name, EVENTS_SUFFIX)
                    if test.app_id != app_dir.name or test.test_id != test_id:
                        raise ValidationError(
                            f"file declares {test.app_id}/{test.test_id} but lives at {app_dir.name}/{test_id}",
                            path=str(path),
                        )
                elif path.name.endswith(SCRIPT_SUFFIX):
                    test_id = _strip(path.name, SCRIPT_SUFFIX)
                    test = read_script_test(path, app_dir.name, test_id, table)
                else:
                    continue
                key = (test.app_id, test.test_id)
                if key in tests:
                    raise ValidationError(f"test {key[0]}/{key[1]} given twice", path=str(path))
                tests[key] = test

    canmaps = {}
    for path in _sorted_files(root / "canonical", CANMAP_SUFFIX):
        cm = CanonicalMap.from_dict(schemas.load_json(path, "canmap"))
        if cm.app_id in canmaps:
            raise ValidationError(f"canonical map for {cm.app_id!r} given twice", path=str(path))
        canmaps[cm.app_id] = cm

    guimaps = []
    gm_dir = root / "guimaps"
    if gm_dir.is_dir():
        for tech_dir in sorted(p for p in gm_dir.iterdir() if p.is_dir()):
            for path in _sorted_files(tech_dir, GUIMAP_SUFFIX):
                guimaps.append(GuiMap.from_dict(schemas.load_json(path, "guimap")))

    return Corpus(apps, tests, canmaps, tuple(guimaps))


def validate_corpus(corpus: Corpus) -> list[Violation]:
    """Every violated invariant in the corpus; empty when it is well-formed."""
    out: list[Violation] = []
    for app_id, model in corpus.apps.items():
        out.extend(Violation("model", app_id, msg) for msg in model_problems(model))
        cm = corpus.canonical_maps.get(app_id)
        if cm is None:
            out.append(Violation("canonical", app_id, "app has no canonical map"))
            continue
        for act, ev in model.iter_events():
            if cm.get_canonical(ev.locator) is None:
                out.append(Violation("ground-truth-gap", app_id,
                                     f"model event {ev.locator!r} in {act!r} has no canonical event"))

    for (app_id, test_id), test in corpus.tests.items():
        subject = f"{app_id}/{test_id}"
        if app_id not in corpus.apps:
            out.append(Violation("test", subject, f"test refers to unknown app {app_id!r}"))
            continue
        if test.role is Role.TRANSFERRED:
            out.append(Violation("test", subject, "corpus tests must be source or ground-truth tests"))
        cm = corpus.canonical_maps.get(app_id)
        if cm is not None:
            for ev in test.events:
                if cm.get_canonical(ev.locator) is None:
                    out.append(Violation("ground-truth-gap", subject,
                                         f"event {ev.locator!r} has no canonical event"))

    for app_id in corpus.canonical_maps:
        if app_id not in corpus.apps:
            out.append(Violation("canonical", app_id, "canonical map for unknown app"))

    for gm in corpus.guimaps:
        subject = f"{gm.technique}:{gm.source_app}->{gm.target_app}/{gm.test_id}"
        for app_id in (gm.source_app, gm.target_app):
            if app_id not in corpus.apps:
                out.append(Violation("guimap", subject, f"unknown app {app_id!r}"))
        if gm.test_id is not None and corpus.test(gm.source_app, gm.test_id) is None:
            out.append(Violation("guimap", subject, f"source test {gm.test_id!r} not in corpus"))
    return out


def guimap_filename(gm: GuiMap) -> str:
    return f"{gm.source_app}__{gm.target_app}__{gm.test_id}{GUIMAP_SUFFIX}"


def _write(path: Path, data: dict) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(schemas.dump_json(data), encoding="utf-8")
    except OSError as exc:
        raise CorpusIOError(path, str(exc)) from exc


def write_corpus(corpus: Corpus, root) -> Path:
    """Write ``corpus`` in the standard layout; output is byte-stable for equal corpora."""
    root = Path(root)
    for app_id in sorted(corpus.apps):
        _write(root / "apps" / f"{app_id}{MODEL_SUFFIX}", corpus.apps[app_id].to_dict())
    for (app_id, test_id) in sorted(corpus.tests):
        _write(root / "tests" / app_id / f"{test_id}{EVENTS_SUFFIX}", corpus.tests[app_id, test_id].to_dict())
    for app_id in sorted(corpus.canonical_maps):
        _write(root / "canonical" / f"{app_id}{CANMAP_SUFFIX}", corpus.canonical_maps[app_id].to_dict())
    for gm in corpus.guimaps:
        _write(root / "guimaps" / gm.technique / guimap_filename(gm), gm.to_dict())
    return root
