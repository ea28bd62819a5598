"""Command line interface.

Exit status: 0 success, 1 runtime failure, 2 bad configuration or arguments,
3 missing results directory.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

EXIT_FAILURE, EXIT_CONFIG, EXIT_MISSING = 1, 2, 3


class _MissingResults(Exception):
    pass


def _store(path: str):
    from .experiment import ResultsStore

    store = ResultsStore(path)
    if not store.exists():
        raise _MissingResults(f"{path}: not a results directory (no manifest.json)")
    return store


def _aocc_rows(store):
    from .experiment.validation import read_aocc_rows

    path = store.analysis_dir / "aocc.csv"
    if not path.exists():
        raise _MissingResults(f"{path}: missing; run `aadbench validate {store.root}` first")
    return read_aocc_rows(path)


def cmd_run(args) -> int:
    from .experiment import load_config, run_experiment

    cfg = load_config(args.config).with_overrides(args.seed, args.workers, args.out)
    store = run_experiment(cfg, validate_results=False if args.no_validate else None)
    summary = store.summary()
    print(f"{summary['completed']} of {len(summary['cells'])} cells completed; results in {store.root}")
    for key in summary["failed"]:
        print(f"failed cell: {key}", file=sys.stderr)
    if (store.analysis_dir / "report.txt").exists():
        print((store.analysis_dir / "report.txt").read_text(encoding="utf-8"), end="")
    return EXIT_FAILURE if summary["failed"] else 0


def cmd_validate(args) -> int:
    from .experiment import validate

    store = _store(args.results)
    cfg = store.config().with_overrides(args.seed, args.workers)
    res = validate(store, cfg, n_runs=args.n_runs)
    print(res["report"].to_text(), end="")
    return 0


def cmd_ceg(args) -> int:
    from .experiment.validation import write_cegs

    store = _store(args.results)
    paths = write_cegs(store, store.config(), args.feature)
    for p in paths:
        print(p)
    return 0


def cmd_report(args) -> int:
    from .experiment.validation import write_report

    store = _store(args.results)
    report = write_report(store.analysis_dir, _aocc_rows(store), store.config())
    print(report.to_text(), end="")
    return 0


def cmd_elo(args) -> int:
    from dataclasses import replace

    from .experiment.validation import write_elo

    store = _store(args.results)
    cfg = store.config()
    elo = cfg.elo
    if args.seed is not None:
        elo = replace(elo, seed=args.seed)
    if args.matches is not None:
        elo = replace(elo, n_matches=args.matches)
    table = write_elo(store.analysis_dir, _aocc_rows(store), replace(cfg, elo=elo))
    if table is None:
        print("fewer than two selected algorithms; nothing to rate", file=sys.stderr)
        return EXIT_FAILURE
    print(table.to_csv(), end="")
    return 0


def _suite_from_arg(text: str):
    from .experiment.config import ConfigError, _parse_problem, _Table, tomllib

    path = Path(text)
    if path.is_file():
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), str(exc)) from None
        data = data.get("problems", [data])[0] if "problems" in data else data
        loc = str(path)
    else:
        data, loc = {}, "suite-spec"
        for part in filter(None, text.split(",")):
            key, sep, value = part.partition("=")
            if not sep:
                raise ConfigError(loc, f"expected key=value, got {part!r}")
            key, value = key.strip(), value.strip()
            if key in ("kind", "name"):
                data[key] = value
            elif key == "fids":
                data[key] = [int(v) for v in value.split(":") if v]
            else:
                try:
                    data[key] = int(value)
                except ValueError:
                    raise ConfigError(f"{loc}.{key}", f"expected an integer, got {value!r}") from None
    data.setdefault("name", "suite")
    try:
        return _parse_problem(_Table(data, "")).suite
    except ConfigError as exc:
        raise ConfigError(f"{loc}: {exc.location}" if exc.location else loc, exc.message) from None


def cmd_instances(args) -> int:
    from dataclasses import replace

    from .problems import save_instances, suite_split

    suite = _suite_from_arg(args.suite)
    if args.seed is not None:
        suite = replace(suite, master_seed=args.seed)
    out = Path(args.out or "instances")
    out.mkdir(parents=True, exist_ok=True)
    for role, insts in suite_split(suite).items():
        if insts:
            save_instances(insts, out / f"{role}.jsonl")
            print(f"{len(insts)} {role} instances -> {out / (role + '.jsonl')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aadbench", description="Benchmark LLM-driven algorithm discovery.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a TOML config (or a manifest.json)")
    r.add_argument("config")
    r.add_argument("--seed", type=int, help="override master_seed")
    r.add_argument("--workers", type=int, help="override worker_count")
    r.add_argument("--out", help="override the output directory")
    r.add_argument("--no-validate", action="store_true", help="skip validation and analysis")
    r.set_defaults(fn=cmd_run)

    v = sub.add_parser("validate", help="validate best candidates and baselines, write analysis/")
    v.add_argument("results")
    v.add_argument("--seed", type=int, help="override master_seed (changes validation seeds)")
    v.add_argument("--workers", type=int)
    v.add_argument("--n-runs", type=int, help="runs per validation instance")
    v.set_defaults(fn=cmd_validate)

    a = sub.add_parser("analyze", help="code evolution graphs and reports")
    asub = a.add_subparsers(dest="what", required=True)
    c = asub.add_parser("ceg", help="write code evolution graphs (DOT + CSV) for every run")
    c.add_argument("results")
    c.add_argument("--feature", default="token_count")
    c.set_defaults(fn=cmd_ceg)
    rep = asub.add_parser("report", help="re-render report.txt / report.csv from analysis/aocc.csv")
    rep.add_argument("results")
    rep.set_defaults(fn=cmd_report)

    rt = sub.add_parser("rate", help="ratings")
    rsub = rt.add_subparsers(dest="what", required=True)
    e = rsub.add_parser("elo", help="ELO tournament over the selected algorithms")
    e.add_argument("results")
    e.add_argument("--seed", type=int, help="tournament seed")
    e.add_argument("--matches", type=int)
    e.set_defaults(fn=cmd_elo)

    i = sub.add_parser("instances", help="problem instances")
    isub = i.add_subparsers(dest="what", required=True)
    g = isub.add_parser("generate", help="write train/test/validation instance files")
    g.add_argument("suite", help="TOML file with a problem table, or key=value pairs, "
                                 "e.g. kind=SBOX,fids=2:5,dimension=5,train=5,test=10")
    g.add_argument("--seed", type=int, help="override the suite master_seed")
    g.add_argument("--out", help="output directory (default ./instances)")
    g.set_defaults(fn=cmd_instances)
    return p


def main(argv=None) -> int:
    from .analysis import AnalysisConfigError
    from .experiment import ConfigError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, AnalysisConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _MissingResults as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
