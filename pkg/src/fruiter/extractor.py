"""Turn test scripts into GUI event sequences.

Scripts are written in a small line-oriented language::

    # comment
    let e = findElementById("email")
    e.sendKeys("u@x.com")
    findElementByXPath("//btn[1]").click()

The parser is API-agnostic: any ``name(...)`` is accepted as a finder or an
action, and an :class:`ApiSignatureTable` decides what each name means. That
keeps other testing frameworks a table swap away.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from fruiter import schemas
from fruiter.errors import (
    CorpusIOError,
    ScriptSyntaxError,
    UnknownApiError,
    UnresolvedDefinitionError,
    ValidationError,
)
from fruiter.model import Action, GuiEvent, Role, TestCase


@dataclass(frozen=True)
class ApiSignatureTable:
    finder_apis: Mapping[str, str]
    action_apis: Mapping[str, Action]
    input_bearing: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "finder_apis", dict(self.finder_apis))
        object.__setattr__(self, "action_apis", {k: Action(v) for k, v in self.action_apis.items()})
        object.__setattr__(self, "input_bearing", frozenset(self.input_bearing))
        for kind in self.finder_apis.values():
            if kind not in ("id", "xpath"):
                raise ValidationError(f"finder kind must be 'id' or 'xpath', got {kind!r}")
        overlap = set(self.finder_apis) & set(self.action_apis)
        if overlap:
            raise ValidationError(f"names used as both finder and action: {sorted(overlap)}")
        stray = self.input_bearing - set(self.action_apis)
        if stray:
            raise ValidationError(f"input-bearing names are not action APIs: {sorted(stray)}")

    @classmethod
    def default(cls) -> "ApiSignatureTable":
        return cls(
            finder_apis={"findElementById": "id", "findElementByXPath": "xpath"},
            action_apis={
                "click": Action.CLICK,
                "sendKeys": Action.SEND_KEYS,
                "longPress": Action.LONG_PRESS,
                "swipe": Action.SWIPE,
            },
            input_bearing={"sendKeys"},
        )

    @classmethod
    def from_dict(cls, d: Mapping) -> "ApiSignatureTable":
        return cls(d["finder_apis"], d["action_apis"], frozenset(d.get("input_bearing", ())))

    @classmethod
    def load(cls, path) -> "ApiSignatureTable":
        return cls.from_dict(schemas.load_json(path, "signatures"))

    def to_dict(self) -> dict:
        return {
            "finder_apis": dict(self.finder_apis),
            "action_apis": {k: v.value for k, v in self.action_apis.items()},
            "input_bearing": sorted(self.input_bearing),
        }


# -- syntax tree ------------------------------------------------------------

@dataclass(frozen=True)
class Finder:
    api: str
    argument: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    name: str
    finder: Finder
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Invoke:
    receiver: Union[Var, Finder]
    method: str
    argument: Optional[str] = None
    line: int = field(default=0, compare=False)


Statement = Union[Assign, Invoke]


# -- lexer ------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT, STRING, PUNCT, EOL
    text: str
    column: int


_PUNCT = "().="


def _tokenize(line: str, lineno: int) -> list[_Token]:
    tokens = []
    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch in " \t\r":
            i += 1
        elif ch == "#":
            break
        elif ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (line[j].isalnum() or line[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", line[i:j], i + 1))
            i = j
        elif ch == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ScriptSyntaxError("unterminated string", lineno, i + 1, line[i:])
                c = line[j]
                if c == "\\":
                    if j + 1 < n and line[j + 1] in '"\\':
                        buf.append(line[j + 1])
                        j += 2
                        continue
                    raise ScriptSyntaxError("invalid escape in string", lineno, j + 1, line[j:j + 2])
                if c == '"':
                    break
                buf.append(c)
                j += 1
            tokens.append(_Token("STRING", "".join(buf), i + 1))
            i = j + 1
        elif ch in _PUNCT:
            tokens.append(_Token("PUNCT", ch, i + 1))
            i += 1
        else:
            raise ScriptSyntaxError("unexpected character", lineno, i + 1, ch)
    tokens.append(_Token("EOL", "end of line", len(line.rstrip("\r\n")) + 1))
    return tokens


class _LineParser:
    def __init__(self, tokens: list[_Token], lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOL":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.peek()
        raise ScriptSyntaxError(message, self.lineno, tok.column, tok.text)

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind.lower()
            self.error(f"expected {want}")
        return self.advance()

    def statement(self) -> Optional[Statement]:
        tok = self.peek()
        if tok.kind == "EOL":
            return None
        if tok.kind == "IDENT" and tok.text == "let":
            self.advance()
            name = self.expect("IDENT").text
            self.expect("PUNCT", "=")
            stmt: Statement = Assign(name, self.finder(), self.lineno)
        else:
            stmt = self.invoke()
        if self.peek().kind != "EOL":
            self.error("unexpected trailing input")
        return stmt

    def call_args(self) -> Optional[str]:
        self.expect("PUNCT", "(")
        arg = None
        if self.peek().kind == "STRING":
            arg = self.advance().text
        self.expect("PUNCT", ")")
        return arg

    def finder(self) -> Finder:
        api = self.expect("IDENT").text
        tok = self.peek()
        arg = self.call_args()
        if arg is None:
            self.error("finder needs a string literal argument", tok)
        return Finder(api, arg, self.lineno)

    def invoke(self) -> Invoke:
        head = self.expect("IDENT")
        if self.peek().kind == "PUNCT" and self.peek().text == "(":
            self.pos -= 1
            receiver: Union[Var, Finder] = self.finder()
        else:
            receiver = Var(head.text, self.lineno)
        self.expect("PUNCT", ".")
        method = self.expect("IDENT").text
        return Invoke(receiver, method, self.call_args(), self.lineno)


def parse_script(text: str) -> list[Statement]:
    """Parse script source into assignments and invocations, in order.

    Raises :class:`ScriptSyntaxError` with the line, column and offending token.
    """
    statements = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stmt = _LineParser(_tokenize(line, lineno), lineno).statement()
        if stmt is not None:
            statements.append(stmt)
    return statements


def _resolve_finder(finder: Finder, table: ApiSignatureTable) -> str:
    if finder.api not in table.finder_apis:
        raise UnknownApiError(finder.api, finder.line)
    return finder.argument


def extract_events(statements: Sequence[Statement], table: Optional[ApiSignatureTable] = None) -> list[GuiEvent]:
    """One event per action invocation, in program order.

    A variable receiver takes the locator from its most recent assignment;
    the language is straight-line, so that is the only reaching definition.
    """
    table = table or ApiSignatureTable.default()
    defs: dict[str, str] = {}
    events = []
    for stmt in statements:
        if isinstance(stmt, Assign):
            defs[stmt.name] = _resolve_finder(stmt.finder, table)
            continue
        if isinstance(stmt.receiver, Var):
            if stmt.receiver.name not in defs:
                raise UnresolvedDefinitionError(stmt.receiver.name, stmt.line)
            locator = defs[stmt.receiver.name]
        else:
            locator = _resolve_finder(stmt.receiver, table)
        if stmt.method not in table.action_apis:
            raise UnknownApiError(stmt.method, stmt.line)
        action = table.action_apis[stmt.method]
        value = None
        if stmt.method in table.input_bearing:
            if stmt.argument is None:
                raise ValidationError(f"line {stmt.line}: {stmt.method} needs an input string")
            value = stmt.argument
        # arguments of non-input actions (e.g. a swipe direction) are not part of the event
        events.append(GuiEvent(locator, action, value if action is Action.SEND_KEYS else None))
    return events


def extract_script(text: str, table: Optional[ApiSignatureTable] = None) -> list[GuiEvent]:
    return extract_events(parse_script(text), table)


def ingest_events_json(path) -> TestCase:
    """Load a ``*.events.json`` test, validating it field by field."""
    return TestCase.from_dict(schemas.load_json(path, "events"))


def read_script_test(path, app_id: str, test_id: str, table: Optional[ApiSignatureTable] = None,
                     role: Role = Role.SOURCE) -> TestCase:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusIOError(path, str(exc)) from exc
    try:
        events = extract_script(text, table)
    except ValidationError as exc:
        raise ValidationError(str(exc), path=str(path)) from exc
    return TestCase(app_id, test_id, role, events)


def events_json(test: TestCase) -> str:
    return json.dumps(test.to_dict(), indent=2, ensure_ascii=False) + "\n"


def write_events_json(test: TestCase, path) -> None:
    Path(path).write_text(events_json(test), encoding="utf-8")
