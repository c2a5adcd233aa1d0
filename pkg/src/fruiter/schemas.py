"""JSON schema loading and validated reads of corpus files."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
from referencing import Registry, Resource

from fruiter.errors import CorpusIOError, ValidationError

SCHEMA_NAMES = ("event", "events", "model", "canmap", "guimap", "signatures", "synthetic", "plan")


def _raw_schema(name: str) -> dict:
    text = resources.files("fruiter").joinpath(f"schema_data/{name}.schema.json").read_text("utf-8")
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    return Registry().with_resources(
        (f"{n}.schema.json", Resource.from_contents(_raw_schema(n))) for n in SCHEMA_NAMES
    )


@lru_cache(maxsize=None)
def validator(name: str) -> jsonschema.protocols.Validator:
    schema = _raw_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    return cls(schema, registry=_registry())


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ValueError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _json_path(error: jsonschema.ValidationError) -> str:
    parts = ["$"]
    for p in error.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def check(data: Any, name: str, path: str | None = None) -> None:
    """Raise :class:`ValidationError` for the first schema violation, naming the field."""
    errors = sorted(validator(name).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ValidationError(err.message, path=path, field=_json_path(err))


def parse_json(text: str, path: str | None = None) -> Any:
    try:
        return json.loads(text, object_pairs_hook=_reject_duplicates)
    except ValueError as exc:
        raise ValidationError(f"invalid JSON: {exc}", path=path) from exc


def load_json(path, name: str | None = None) -> Any:
    """Read a JSON file, optionally validating it against a named schema.

    Duplicate object keys are rejected, so a locator can never silently map
    to two canonical events.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusIOError(path, str(exc)) from exc
    data = parse_json(text, str(path))
    if name is not None:
        check(data, name, str(path))
    return data


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"
