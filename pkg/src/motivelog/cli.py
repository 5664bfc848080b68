"""Command-line pipeline: every stage reads and writes documented file
formats, so runs are composable and reproducible.

Exit codes: 0 success, 1 validation error, 2 I/O error. Every run emits a
manifest (content hashes of inputs and outputs, config, version) either next
to the main output file or, when streaming to stdout, as a JSON line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import IO, Optional

from . import __version__
from .classify import (
    DEFAULT_RESIDUAL_CUTOFF,
    auto_code_corpus,
    classify_records,
    prefilter_single_participant,
)
from .corpus import CorpusSpec, build_fixtures, generate
from .model import (
    AppCategoryMap,
    InvalidSpecError,
    KeywordRuleSet,
    Motive,
    MotiveMapping,
    REDACTED,
)
from .pipeline import (
    DEFAULT_COMPARE_PAIRS,
    comparison_report,
    comparison_tsv,
    longtail_json,
    longtail_tsv,
    run_compare,
    stats_report,
    stats_tsv,
)
from .sessions import (
    DEFAULT_GAP_TIMEOUT_MS,
    SessionAudit,
    SessionKeying,
    assign_sessions,
    build_records,
    collect_session_prompts,
)
from .abstractor import process_stream
from .agreement import cohen_kappa, confusion_matrix, disagreements, per_category_kappa
from . import io as mio


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _open_in(stack: ExitStack, path: str) -> IO[str]:
    if path == "-":
        return sys.stdin
    return stack.enter_context(open(path, "r", encoding="utf-8"))


def _open_out(stack: ExitStack, path: str) -> IO[str]:
    if path == "-":
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8"))


def _emit_manifest(
    args: argparse.Namespace,
    command: str,
    config: dict,
    inputs: list[str],
    outputs: list[str],
) -> None:
    real_inputs = [p for p in inputs if p and p != "-"]
    real_outputs = [p for p in outputs if p and p != "-"]
    manifest = mio.build_manifest(command, __version__, config, real_inputs, real_outputs)
    path: Optional[str] = getattr(args, "manifest", None)
    if path is None and real_outputs:
        path = real_outputs[0] + ".manifest.json"
    if path:
        Path(path).write_text(manifest.to_json() + "\n", encoding="utf-8")
    else:
        sys.stderr.write(manifest.to_json() + "\n")


def _keying(args: argparse.Namespace) -> SessionKeying:
    return SessionKeying(gap_timeout_ms=int(args.gap_timeout * 1000))


def _load_rules(args: argparse.Namespace) -> KeywordRuleSet:
    if getattr(args, "rules", None):
        return mio.load_rules(args.rules)
    return KeywordRuleSet.default()


def _read_all_records(stack: ExitStack, path: str):
    return list(mio.read_records(_open_in(stack, path)))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args: argparse.Namespace) -> int:
    overrides: dict = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        for key in ("motive_mix", "words_per_input", "match_probability"):
            if key in overrides:
                overrides[key] = {
                    Motive(m): tuple(v) if isinstance(v, list) else v
                    for m, v in overrides[key].items()
                }
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.participants is not None:
        overrides["participants"] = args.participants
    if args.days is not None:
        overrides["days"] = args.days
    spec = CorpusSpec(**overrides)
    spec.validate()
    fixtures = build_fixtures(spec)

    outputs = [args.out]
    with ExitStack() as stack:
        out = _open_out(stack, args.out)
        truth_fp: Optional[IO[str]] = None
        if args.truth:
            truth_fp = _open_out(stack, args.truth)
            truth_fp.write(
                "sid\tpid\tapp\tmotive\twords\tmatched\tprompted\tcovered\tinjected\trank\n"
            )
            outputs.append(args.truth)

        def on_truth(row) -> None:
            assert truth_fp is not None
            truth_fp.write(
                f"{row.session_id}\t{row.participant_id}\t{row.app_id}\t"
                f"{row.motive.value}\t{row.words}\t{row.matched}\t"
                f"{int(row.prompted)}\t{int(row.covered)}\t{int(row.injected)}\t{row.rank}\n"
            )

        mio.write_events(
            out, generate(spec, on_truth if truth_fp is not None else None, fixtures)
        )

    if args.fixtures:
        fixtures_dir = Path(args.fixtures)
        fixtures_dir.mkdir(parents=True, exist_ok=True)
        writes = {
            "dict.dic": mio.dictionary_to_text(fixtures.dictionary),
            "whitelist.txt": mio.whitelist_to_text(fixtures.whitelist),
            "mapping.tsv": mio.mapping_to_text(fixtures.mapping),
            "appcats.tsv": mio.app_categories_to_text(fixtures.app_categories),
            "rules.tsv": mio.rules_to_text(KeywordRuleSet.default()),
        }
        for name, text in writes.items():
            path = fixtures_dir / name
            path.write_text(text, encoding="utf-8")
            outputs.append(str(path))

    _emit_manifest(args, "gen", {"seed": spec.seed, "participants": spec.participants, "days": spec.days}, [], outputs)
    return 0


def _cmd_abstract(args: argparse.Namespace) -> int:
    dictionary = mio.load_dictionary(args.dict)
    whitelist = mio.load_whitelist(args.whitelist)
    keying = _keying(args)
    with ExitStack() as stack:
        events = mio.read_events(_open_in(stack, args.infile))
        out = _open_out(stack, args.out)
        for word in process_stream(assign_sessions(events, keying), dictionary, whitelist):
            out.write(mio.word_event_to_json(word))
            out.write("\n")
    _emit_manifest(
        args,
        "abstract",
        {"gap_timeout": args.gap_timeout},
        [args.infile, args.dict, args.whitelist],
        [args.out],
    )
    return 0


def _cmd_sessions(args: argparse.Namespace) -> int:
    keying = _keying(args)
    app_cats = mio.load_app_categories(args.appcats) if args.appcats else AppCategoryMap()
    with open(args.events, "r", encoding="utf-8") as fp:
        prompts = collect_session_prompts(mio.read_events(fp), keying)
    audit = SessionAudit()
    with ExitStack() as stack:
        words = mio.read_word_events(_open_in(stack, args.infile))
        out = _open_out(stack, args.out)
        mio.write_records(out, build_records(words, prompts, app_cats, audit))
    if audit.suppressed_zero_word:
        sys.stderr.write(f"suppressed zero-word sessions: {audit.suppressed_zero_word}\n")
    _emit_manifest(
        args,
        "sessions",
        {"gap_timeout": args.gap_timeout},
        [args.infile, args.events] + ([args.appcats] if args.appcats else []),
        [args.out],
    )
    return 0


def _cmd_prefilter(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
        filtered, report = prefilter_single_participant(records)
        out = _open_out(stack, args.out)
        mio.write_records(out, filtered)
    outputs = [args.out]
    if args.report:
        Path(args.report).write_text(
            json.dumps(
                {
                    "redacted_prompts": report.redacted_prompts,
                    "redacted_records": report.redacted_records,
                    "items": [
                        {
                            "prompt_hash": item.prompt_hash,
                            "participant_count": item.participant_count,
                            "record_count": item.record_count,
                        }
                        for item in report.items
                    ],
                },
                ensure_ascii=False,
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        outputs.append(args.report)
    _emit_manifest(args, "prefilter", {}, [args.infile], outputs)
    return 0


def _cmd_autocode(args: argparse.Namespace) -> int:
    rules = _load_rules(args)
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
    counts: dict[str, int] = {}
    total = 0
    for record in records:
        total += 1
        prompt = record.prompt_text
        if prompt is None or prompt == REDACTED:
            continue
        counts[prompt] = counts.get(prompt, 0) + 1
    result = auto_code_corpus(counts, rules, residual_cutoff=args.cutoff, total=total)
    Path(args.out).write_text(mio.mapping_to_text(result.mapping), encoding="utf-8")
    outputs = [args.out]
    if args.residual:
        lines = ["# prompt\tcount (manual-coding queue, frequency-descending)"]
        lines += [f"{prompt}\t{count}" for prompt, count in result.residual]
        Path(args.residual).write_text("\n".join(lines) + "\n", encoding="utf-8")
        outputs.append(args.residual)
    sys.stderr.write(
        f"auto-coded {len(result.mapping)} prompts, residual {len(result.residual)}, "
        f"below cutoff {result.below_cutoff}\n"
    )
    _emit_manifest(args, "autocode", {"cutoff": args.cutoff}, [args.infile], outputs)
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    mapping = mio.load_mapping(args.mapping) if args.mapping else MotiveMapping()
    rules = _load_rules(args)
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
        out = _open_out(stack, args.out)
        mio.write_records(out, classify_records(records, mapping, rules))
    _emit_manifest(
        args,
        "classify",
        {},
        [args.infile] + ([args.mapping] if args.mapping else []),
        [args.out],
    )
    return 0


def _figures_enabled(args: argparse.Namespace) -> bool:
    return bool(args.tsv) and not args.no_figures


def _cmd_stats(args: argparse.Namespace) -> int:
    rules = _load_rules(args)
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
    report = stats_report(records, rules)
    Path(args.out).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    outputs = [args.out]
    if args.tsv:
        Path(args.tsv).write_text(stats_tsv(report), encoding="utf-8")
        outputs.append(args.tsv)
    if _figures_enabled(args):
        from .figures import render_words_per_input

        fig_path = Path(args.tsv).with_suffix(".words.png")
        render_words_per_input(report, fig_path)
        outputs.append(str(fig_path))
    _emit_manifest(args, "stats", {}, [args.infile], outputs)
    return 0


def _parse_pairs(raw: str) -> tuple[tuple[Motive, str], ...]:
    pairs = []
    for chunk in raw.split(","):
        motive, _, app_cat = chunk.partition(":")
        if not app_cat:
            raise InvalidSpecError(f"pair must be Motive:AppCategory, got {chunk!r}")
        pairs.append((Motive(motive.strip()), app_cat.strip()))
    return tuple(pairs)


def _cmd_compare(args: argparse.Namespace) -> int:
    pairs = _parse_pairs(args.pairs) if args.pairs else DEFAULT_COMPARE_PAIRS
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
    table = run_compare(records, pairs)
    report = comparison_report(table)
    Path(args.out).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    outputs = [args.out]
    if args.tsv:
        Path(args.tsv).write_text(comparison_tsv(table), encoding="utf-8")
        outputs.append(args.tsv)
    if _figures_enabled(args):
        from .figures import render_matching_rates

        fig_path = Path(args.tsv).with_suffix(".rates.png")
        render_matching_rates(report, fig_path)
        outputs.append(str(fig_path))
    for skipped in table.skipped:
        sys.stderr.write(f"skipped empty selection pair: {skipped}\n")
    _emit_manifest(args, "compare", {"pairs": args.pairs or "default"}, [args.infile], outputs)
    return 0


def _cmd_longtail(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        records = _read_all_records(stack, args.infile)
    report = longtail_json(records, args.k)
    Path(args.out).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    outputs = [args.out]
    if args.tsv:
        Path(args.tsv).write_text(longtail_tsv(report), encoding="utf-8")
        outputs.append(args.tsv)
    if _figures_enabled(args):
        from .figures import render_longtail

        fig_path = Path(args.tsv).with_suffix(".curve.png")
        render_longtail(report, fig_path)
        outputs.append(str(fig_path))
    _emit_manifest(args, "longtail", {"k": args.k}, [args.infile], outputs)
    return 0


def _kappa_obj(result) -> dict:
    return {
        "kappa": result.kappa,
        "po": result.po,
        "pe": result.pe,
        "se": result.se,
        "ci95": list(result.ci95),
        "n": result.n,
    }


def _cmd_kappa(args: argparse.Namespace) -> int:
    codes_a = mio.parse_rater_codes(Path(args.rater_a).read_text(encoding="utf-8"))
    codes_b = mio.parse_rater_codes(Path(args.rater_b).read_text(encoding="utf-8"))
    matrix = confusion_matrix(codes_a, codes_b)
    overall = cohen_kappa(matrix)
    per_category = per_category_kappa(matrix)
    diffs = disagreements(codes_a, codes_b)
    report = {
        "n": matrix.n,
        "labels": [m.value for m in matrix.labels],
        "matrix": [list(row) for row in matrix.counts],
        "overall": _kappa_obj(overall),
        "per_category": [
            {"motive": m.value, "kappa": _kappa_obj(k) if k is not None else None}
            for m, k in per_category
        ],
        "disagreements": [
            {"prompt": p, "a": a.value, "b": b.value} for p, a, b in diffs
        ],
    }
    Path(args.out).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    _emit_manifest(args, "kappa", {}, [args.rater_a, args.rater_b], [args.out])
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import build_app

    residual: list[tuple[str, int]] = []
    for raw in Path(args.residual).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        prompt, _, count = line.partition("\t")
        residual.append((prompt, int(count) if count else 0))
    app = build_app(
        residual=residual,
        store_path=args.store,
        round_size=args.round_size,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="motivelog", description=__doc__)
    parser.add_argument("--version", action="version", version=f"motivelog {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p: argparse.ArgumentParser, default_in: str = "-", default_out: str = "-") -> None:
        p.add_argument("--in", dest="infile", default=default_in, help="input file or - for stdin")
        p.add_argument("--out", default=default_out, help="output file or - for stdout")
        p.add_argument("--manifest", default=None, help="manifest path override")

    p_gen = sub.add_parser("gen", help="Generate a synthetic snapshot-event corpus.")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--truth", default=None, help="ground-truth TSV path")
    p_gen.add_argument("--fixtures", default=None, help="directory for dict/whitelist/mapping/appcats fixtures")
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--participants", type=int, default=None)
    p_gen.add_argument("--days", type=int, default=None)
    p_gen.add_argument("--config", default=None, help="JSON file with CorpusSpec overrides")
    p_gen.add_argument("--manifest", default=None)

    p_abs = sub.add_parser("abstract", help="events.jsonl -> words.jsonl (the privacy boundary).")
    add_io(p_abs)
    p_abs.add_argument("--dict", required=True)
    p_abs.add_argument("--whitelist", required=True)
    p_abs.add_argument("--gap-timeout", type=float, default=DEFAULT_GAP_TIMEOUT_MS / 1000)

    p_ses = sub.add_parser("sessions", help="words.jsonl -> sessions.jsonl (one record per text input).")
    add_io(p_ses)
    p_ses.add_argument("--events", required=True, help="events.jsonl for per-session prompts")
    p_ses.add_argument("--appcats", default=None)
    p_ses.add_argument("--gap-timeout", type=float, default=DEFAULT_GAP_TIMEOUT_MS / 1000)

    p_pre = sub.add_parser("prefilter", help="Redact prompts seen by fewer than two participants.")
    add_io(p_pre)
    p_pre.add_argument("--report", default=None, help="redaction report JSON path")

    p_auto = sub.add_parser("autocode", help="Build the AutoKeyword mapping and the manual-coding queue.")
    add_io(p_auto, default_out="mapping.tsv")
    p_auto.add_argument("--residual", default=None, help="residual prompts TSV path")
    p_auto.add_argument("--rules", default=None)
    p_auto.add_argument("--cutoff", type=float, default=DEFAULT_RESIDUAL_CUTOFF)

    p_cls = sub.add_parser("classify", help="Assign motives to session records.")
    add_io(p_cls)
    p_cls.add_argument("--mapping", default=None)
    p_cls.add_argument("--rules", default=None)

    p_stats = sub.add_parser("stats", help="Descriptive statistics and rank tests report.")
    add_io(p_stats, default_out="stats.json")
    p_stats.add_argument("--tsv", default=None, help="plot-ready TSV path")
    p_stats.add_argument("--rules", default=None)
    p_stats.add_argument("--no-figures", action="store_true")

    p_cmp = sub.add_parser("compare", help="Motive vs app-category comparison table.")
    add_io(p_cmp, default_out="compare.json")
    p_cmp.add_argument("--tsv", default=None)
    p_cmp.add_argument("--pairs", default=None, help="Motive:AppCategory[,Motive:AppCategory...]")
    p_cmp.add_argument("--no-figures", action="store_true")

    p_lt = sub.add_parser("longtail", help="Top-k prompt frequency report.")
    add_io(p_lt, default_out="longtail.json")
    p_lt.add_argument("--tsv", default=None)
    p_lt.add_argument("--k", type=int, default=10)
    p_lt.add_argument("--no-figures", action="store_true")

    p_kap = sub.add_parser("kappa", help="Inter-rater agreement between two code files.")
    p_kap.add_argument("--a", dest="rater_a", required=True)
    p_kap.add_argument("--b", dest="rater_b", required=True)
    p_kap.add_argument("--out", default="kappa.json")
    p_kap.add_argument("--manifest", default=None)

    p_srv = sub.add_parser("serve", help="Run the annotation service.")
    p_srv.add_argument("--residual", required=True, help="residual prompts TSV (from autocode)")
    p_srv.add_argument("--store", default=None, help="append-only code store (or MOTIVELOG_STORE)")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8765)
    p_srv.add_argument("--round-size", type=int, default=50)
    p_srv.add_argument("--ui-dir", default=None, help="static console bundle directory")

    return parser


_HANDLERS = {
    "gen": _cmd_gen,
    "abstract": _cmd_abstract,
    "sessions": _cmd_sessions,
    "prefilter": _cmd_prefilter,
    "autocode": _cmd_autocode,
    "classify": _cmd_classify,
    "stats": _cmd_stats,
    "compare": _cmd_compare,
    "longtail": _cmd_longtail,
    "kappa": _cmd_kappa,
    "serve": _cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except OSError as exc:
        sys.stderr.write(f"motivelog: i/o error: {exc}\n")
        return 2
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"motivelog: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
