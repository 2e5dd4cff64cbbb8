"""Command line entry point: ``traceknn {ingest,score,detect,run,synth}``."""

from __future__ import annotations

import argparse
import io
import os
import sys

from tqdm import tqdm

from .detector import DetectorConfig
from .kernel import KernelBackend
from .knn_scorer import KnnConfig, read_scores, write_scores
from .log_ingest import DEFAULT_TIMESTAMP_FORMATS, IngestConfig, write_log
from .pipeline import PipelineError, RunConfig, ingest, run_pipeline, score, summary_lines, write_plots
from .synthgen import SynthSpec, default_spec, generate


def read_config_file(path: str) -> dict[str, str]:
    """`key = value` lines; lines starting with `#` are comments. Keys are flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_ingest(p):
    g = p.add_argument_group("ingest")
    g.add_argument("input", nargs="?", help="delimited event log")
    g.add_argument("--delimiter", default=";")
    g.add_argument("--case-col", default="case_id")
    g.add_argument("--activity-col", default="activity")
    g.add_argument("--timestamp-col", default="timestamp")
    g.add_argument("--timestamp-formats", default="|".join(DEFAULT_TIMESTAMP_FORMATS),
                   help="strptime patterns separated by '|', tried in order")
    g.add_argument("--tiebreak-col", default=None)
    g.add_argument("--alphabet", default=None,
                   help="'bpi2014' or a label<TAB>id table; default first-appearance ids")


def _add_knn(p):
    g = p.add_argument_group("scoring")
    g.add_argument("--k", type=int, required=False)
    g.add_argument("--exclude-self", type=_bool, default=True, metavar="BOOL")
    g.add_argument("--similarity-floor", type=float, default=1e-9)
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--no-prune", action="store_true", help="visit every candidate")
    g.add_argument("--backend", default=KernelBackend.BIT_PARALLEL.value,
                   choices=[b.value for b in KernelBackend])


def _add_detect(p):
    g = p.add_argument_group("detection")
    g.add_argument("--theta", type=float, default=5.0)
    g.add_argument("--top-m", type=int, default=10)
    g.add_argument("--bandwidth", type=float, default=None, help="KDE bandwidth (default Silverman)")
    g.add_argument("--bins", default="fd", help="'fd' or comma-separated bin edges")
    g.add_argument("--format", dest="fmt", default="json", choices=["json", "text"])
    g.add_argument("--emit-plots", default=None, metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="traceknn", description=__doc__)
    parser.add_argument("--config", default=None, help="key=value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a log and print the ingest summary")
    _add_ingest(p)
    p.add_argument("--output", default=None, help="write the corpus dump here")

    p = sub.add_parser("score", help="score every case, write the score dump")
    _add_ingest(p)
    _add_knn(p)
    p.add_argument("--output", default=None)

    p = sub.add_parser("detect", help="build the report from a score dump")
    _add_ingest(p)
    _add_knn(p)
    _add_detect(p)
    p.add_argument("--scores", required=False, help="score dump from `traceknn score`")
    p.add_argument("--output", default=None)

    p = sub.add_parser("run", help="full pipeline")
    _add_ingest(p)
    _add_knn(p)
    _add_detect(p)
    p.add_argument("--output", default=None)

    p = sub.add_parser("synth", help="generate a synthetic log with injected anomalies")
    p.add_argument("--spec", default=None, help="JSON synth spec (default: built-in)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=False)
    p.add_argument("--truth", default=None, help="write injected case ids here")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    args = parser.parse_args(argv)
    if not known.config:
        return args
    try:
        values = read_config_file(known.config)
    except (OSError, ValueError) as exc:
        parser.error(f"config: {exc}")
    choices = parser._subparsers._group_actions[0].choices
    sub = choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    known_anywhere = {a.dest for p in choices.values() for a in p._actions}
    defaults = {}
    for key, raw in values.items():
        if key not in actions:
            # one config file serves every subcommand; only typos are errors
            if key not in known_anywhere:
                parser.error(f"unknown config key {key!r}")
            continue
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = _bool(raw)
        else:
            defaults[key] = act.type(raw) if act.type else raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _run_config(args) -> RunConfig:
    if not args.input:
        raise PipelineError("config", "no input log given")
    if getattr(args, "k", None) is None and args.command != "ingest":
        raise PipelineError("config", "--k is required")
    ingest_cfg = IngestConfig(
        delimiter=args.delimiter,
        case_col=args.case_col,
        activity_col=args.activity_col,
        timestamp_col=args.timestamp_col,
        timestamp_formats=tuple(f for f in args.timestamp_formats.split("|") if f),
        tiebreak_col=args.tiebreak_col or None,
    )
    kw = {}
    if args.command != "ingest":
        kw.update(
            knn=KnnConfig(args.k, args.exclude_self, args.similarity_floor),
            backend=KernelBackend(args.backend),
            threads=max(1, args.threads),
            prune=not args.no_prune,
        )
    else:
        kw["knn"] = KnnConfig(1)
    if hasattr(args, "theta"):
        kw.update(
            detector=DetectorConfig(args.theta, args.top_m),
            bandwidth=args.bandwidth,
            bins=args.bins,
            emit_plots=args.emit_plots,
            fmt=args.fmt,
        )
    return RunConfig(input=args.input, ingest=ingest_cfg, alphabet=args.alphabet,
                     output=args.output, **kw)


def _progress(total):
    bar = tqdm(total=total, unit="case", file=sys.stderr, disable=None, desc="scoring")
    return bar.update, bar.close


def _emit(data: bytes, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _cmd_ingest(cfg: RunConfig):
    _, summary, corpus = ingest(cfg)
    if cfg.output:
        _emit(corpus.dump().encode("utf-8"), cfg.output)
    for k, v in summary.to_dict().items():
        print(f"{k}: {v}")
    print(f"alphabet_size: {len(corpus.alphabet)}")


def _cmd_score(cfg: RunConfig):
    _, _, corpus = ingest(cfg)
    update, close = _progress(corpus.n)
    try:
        scored = score(cfg, corpus, update)
    finally:
        close()
    buf = io.StringIO()
    write_scores(scored, buf)
    _emit(buf.getvalue().encode("utf-8"), cfg.output)


def _cmd_report(cfg: RunConfig, scores_path: str | None):
    scored = None
    if scores_path:
        try:
            with open(scores_path, encoding="utf-8") as fh:
                scored = read_scores(fh, cfg.knn.similarity_floor)
        except (OSError, ValueError) as exc:
            raise PipelineError("detect", str(exc)) from exc
    update, close = _progress(None) if scored is None else (None, lambda: None)
    try:
        report, data = run_pipeline(cfg, scored, update)
    finally:
        close()
    try:
        _emit(data, cfg.output)
        if cfg.emit_plots:
            write_plots(report, cfg.emit_plots)
    except OSError as exc:
        raise PipelineError("report", str(exc)) from exc
    out = sys.stderr if cfg.output in (None, "-") else sys.stdout
    for line in summary_lines(report):
        print(line, file=out)


def _cmd_synth(args):
    spec = SynthSpec.load(args.spec) if args.spec else default_spec()
    if args.seed is not None:
        spec = SynthSpec(spec.normal_variants, spec.anomaly_injections, spec.alphabet_size,
                         args.seed, spec.noise)
    cases, truth = generate(spec, args.n)
    buf = io.StringIO()
    write_log(cases, buf)
    _emit(buf.getvalue().encode("utf-8"), args.output)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as fh:
            fh.write("".join(f"{t}\n" for t in sorted(truth)))


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, sys.argv[1:] if argv is None else list(argv))
    try:
        if args.command == "synth":
            _cmd_synth(args)
            return 0
        cfg = _run_config(args)
        if args.command == "ingest":
            _cmd_ingest(cfg)
        elif args.command == "score":
            _cmd_score(cfg)
        elif args.command == "detect":
            if not args.scores:
                raise PipelineError("config", "detect needs --scores (use `run` for the full pipeline)")
            _cmd_report(cfg, args.scores)
        else:
            _cmd_report(cfg, None)
    except PipelineError as exc:
        print(f"traceknn: error {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"traceknn: error [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
