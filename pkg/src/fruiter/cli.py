"""Command line for benchmarking GUI test transfer techniques.

Exit codes: 0 success, 1 validation/plan errors, 2 I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from fruiter import __version__, schemas
from fruiter.corpus import load_corpus, validate_corpus, write_corpus
from fruiter.errors import CorpusIOError, FruiterError, PlanError
from fruiter.extractor import ApiSignatureTable, extract_script, ingest_events_json
from fruiter.fidelity import compute_fidelity_metrics, derive_gui_map, evaluate_fidelity
from fruiter.harness import (
    BenchmarkPlan,
    SyntheticCorpusSpec,
    generate_synthetic_corpus,
    run_benchmark,
    write_run,
)
from fruiter.mappers import REGISTRY, MapperConfig, MapRequest, get_mapper
from fruiter.model import GuiMap, Role, TestCase
from fruiter.reporting import (
    AGGREGATE_FOOTER,
    CORRELATE_FOOTER,
    aggregate,
    aggregate_table,
    correlation_matrix,
    correlation_table,
    read_results_csv,
    render_delimited,
)
from fruiter.utility import LENIENT, STRICT, evaluate_utility

log = logging.getLogger("fruiter")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    corpus = load_corpus(args.corpus)
    problems = validate_corpus(corpus)
    for p in problems:
        print(p)
    if problems:
        print(f"{len(problems)} problem(s) found", file=sys.stderr)
        return 1
    print(f"ok: {len(corpus.apps)} apps, {len(corpus.tests)} tests, {len(corpus.canonical_maps)} canonical maps")
    return 0


def cmd_extract(args) -> int:
    table = ApiSignatureTable.load(args.table) if args.table else None
    path = Path(args.script)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusIOError(path, str(exc)) from exc
    events = extract_script(text, table)
    test_id = args.test_id or path.name.split(".")[0]
    test = TestCase(args.app_id, test_id, Role.SOURCE, events)
    _emit(schemas.dump_json(test.to_dict()), args.out)
    return 0


def cmd_map(args) -> int:
    corpus = load_corpus(args.corpus)
    src_test = corpus.test(args.source, args.test)
    if src_test is None:
        raise PlanError(f"no test {args.test!r} for app {args.source!r}")
    for app in (args.source, args.target):
        if app not in corpus.apps:
            raise PlanError(f"unknown app {app!r}")
    cfg = MapperConfig(args.technique, threshold=args.threshold, seed=args.seed)
    req = MapRequest(
        src_test.events,
        corpus.apps[args.source],
        corpus.apps[args.target],
        corpus.canonical_maps.get(args.source),
        corpus.canonical_maps.get(args.target),
    )
    trans = get_mapper(args.technique)(req, cfg)
    gm = derive_gui_map(src_test.events, trans, args.source, args.target, args.technique, args.test)
    _emit(schemas.dump_json(gm.to_dict()), args.out)
    return 0


def cmd_evaluate(args) -> int:
    if args.what == "fidelity":
        if not args.guimap or not args.corpus:
            raise PlanError("evaluate fidelity needs --guimap and --corpus")
        corpus = load_corpus(args.corpus)
        gm = GuiMap.from_dict(schemas.load_json(args.guimap, "guimap"))
        for app in (gm.source_app, gm.target_app):
            if app not in corpus.canonical_maps:
                raise PlanError(f"no canonical map for app {app!r}")
        sets = evaluate_fidelity(gm.source_events, gm, corpus.canonical_maps[gm.source_app],
                                 corpus.canonical_maps[gm.target_app])
        result = {"fidelity_sets": sets.to_dict(), "fidelity_metrics": compute_fidelity_metrics(sets).to_dict()}
    else:
        if not args.transferred or not args.ground_truth:
            raise PlanError("evaluate utility needs --transferred and --ground-truth")
        if args.transferred.endswith(".guimap.json"):
            transferred = list(GuiMap.from_dict(schemas.load_json(args.transferred, "guimap")).transferred)
        else:
            transferred = list(ingest_events_json(args.transferred).events)
        gts = [ingest_events_json(p).with_role(Role.GROUND_TRUTH) for p in args.ground_truth]
        result = {"utility_metrics": evaluate_utility(transferred, gts, STRICT if args.strict else LENIENT).to_dict()}
    _emit(schemas.dump_json(result), args.out)
    return 0


def _load_plan(path: Path):
    data = schemas.load_json(path, "plan")
    plan = BenchmarkPlan.from_dict(data)
    if ("corpus" in data) == ("synthetic" in data):
        raise PlanError("plan must give exactly one of 'corpus' or 'synthetic'")
    if "corpus" in data:
        corpus_dir = (path.parent / data["corpus"]).resolve()
        corpus = load_corpus(corpus_dir)
        source = {"corpus": data["corpus"]}
    else:
        spec = SyntheticCorpusSpec.from_dict(data["synthetic"])
        corpus = generate_synthetic_corpus(spec)
        source = {"synthetic": spec.to_dict()}
    return plan, corpus, source


def cmd_run(args) -> int:
    plan, corpus, source = _load_plan(Path(args.plan))
    problems = validate_corpus(corpus)
    for p in problems:
        log.warning("corpus: %s", p)
    run = run_benchmark(plan, corpus, workers=args.workers)
    paths = write_run(run, plan, corpus, args.out, source)
    print(f"{len(run.entries)} result entries, {len(run.skipped)} skipped, of {run.n_planned} planned")
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_report(args) -> int:
    rows = read_results_csv(args.results)
    if args.aggregate:
        table = aggregate(rows, averaging=args.averaging)
        text = render_delimited(aggregate_table(table), AGGREGATE_FOOTER)
    else:
        matrix = correlation_matrix(rows, per_technique=args.per_technique)
        text = render_delimited(correlation_table(matrix), CORRELATE_FOOTER)
    _emit(text, args.out)
    return 0


def cmd_gen_corpus(args) -> int:
    spec = SyntheticCorpusSpec.from_dict(schemas.load_json(args.spec, "synthetic"))
    corpus = generate_synthetic_corpus(spec)
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus.apps)} apps and {len(corpus.tests)} tests to {args.out}")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input validation failures, so they share exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fruiter", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a corpus directory")
    s.add_argument("corpus")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("extract", help="extract the event sequence of a test script")
    s.add_argument("script")
    s.add_argument("--table", help="API signature table (JSON)")
    s.add_argument("--app-id", default="app")
    s.add_argument("--test-id")
    s.add_argument("--out")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("map", help="transfer one test with a GUI mapper, printing its GUI map")
    s.add_argument("--technique", required=True, choices=sorted(REGISTRY))
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--corpus", required=True)
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("evaluate", help="score a single transfer")
    s.add_argument("what", choices=["fidelity", "utility"])
    s.add_argument("--corpus")
    s.add_argument("--guimap")
    s.add_argument("--transferred", help="events.json or guimap.json of the transferred test")
    s.add_argument("--ground-truth", nargs="+", help="one or more acceptable ground-truth events.json files")
    s.add_argument("--strict", action="store_true", help="compare input values too")
    s.add_argument("--out")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("run", help="run a benchmark plan")
    s.add_argument("--plan", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("report", help="aggregate or correlate a results.csv")
    s.add_argument("--results", required=True)
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--aggregate", action="store_true")
    mode.add_argument("--correlate", action="store_true")
    s.add_argument("--averaging", choices=["transfer", "pair"], default="transfer")
    s.add_argument("--per-technique", action="store_true", help="correlate per-technique means")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("gen-corpus", help="write a seeded synthetic corpus")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_corpus)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OSError as exc:
        print(f"fruiter: error: {exc}", file=sys.stderr)
        return 2
    except (FruiterError, KeyError, ValueError) as exc:
        print(f"fruiter: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
