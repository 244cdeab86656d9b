"""Command-line surface: fingerprint, dist-table, train, classify, timemap, serve, simulate."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import requests

from . import reports, store
from .classifier import (
    InductionConfig,
    LabeledDataset,
    classify,
    evaluate,
    induce_tree,
    load_tree,
    save_tree,
    serialize_tree,
    tree_attributes,
)
from .errors import QuirkprintError
from .server import ServerConfig, run_server
from .signatures import SignatureDataset
from .simagent import load_profiles, replay_all
from .store import DEFAULT_MIN_CONFIDENCE, export_signatures_text


def _load_dataset(path: str, min_confidence: float) -> SignatureDataset:
    result = store.import_signatures(path, min_confidence)
    for row, conf in result.excluded:
        print(
            f"note: excluded row {row} (confidence {conf:.4f} < {min_confidence})",
            file=sys.stderr,
        )
    return result.dataset


def _write_or_print(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_fingerprint(args: argparse.Namespace) -> int:
    ds = _load_dataset(args.dataset, args.min_confidence)
    if args.token:
        if not args.server:
            raise QuirkprintError("--token needs --server to fetch the signature from")
        resp = requests.get(f"{args.server.rstrip('/')}/sig/{args.token}", timeout=30)
        if resp.status_code != 200:
            raise QuirkprintError(
                f"signature fetch for token {args.token} failed: HTTP {resp.status_code}"
            )
        queries = store.import_signatures_text(resp.text, min_confidence=0.0).dataset
    else:
        queries = store.import_signatures(args.query, min_confidence=0.0).dataset
    for query in queries.signatures:
        report = reports.fingerprint(query, ds, outlier_factor=args.outlier_factor)
        sys.stdout.write(reports.render_fingerprint_report(report))
    return 0


def cmd_dist_table(args: argparse.Namespace) -> int:
    ds = _load_dataset(args.dataset, args.min_confidence)
    report = reports.build_distance_report(ds)
    _write_or_print(reports.render_distance_table(report), args.output)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    ds = _load_dataset(args.dataset, args.min_confidence)
    labeled = LabeledDataset(signatures=ds.signatures, attributes=ds.attributes)
    tree = induce_tree(
        labeled,
        InductionConfig(split_kind=args.split, max_depth=args.max_depth),
    )
    save_tree(tree, args.tree)
    matrix = evaluate(tree, labeled)
    total = matrix.total
    correct = matrix.trace
    wrong = total - correct
    print(f"Total number of instances        {total:5d}  100.00%")
    print(f"Correctly classified instances   {correct:5d}  {correct / total:.2%}")
    print(f"Incorrectly classified instances {wrong:5d}  {wrong / total:.2%}")
    print()
    print(_render_confusion(matrix))
    print(f"tree written to {args.tree} "
          f"({len(tree_attributes(tree))} attributes tested)")
    if args.figure:
        from .figures import render_confusion_figure

        render_confusion_figure(matrix, args.figure)
        print(f"confusion figure written to {args.figure}")
    return 0


def _render_confusion(matrix) -> str:
    families = matrix.families
    width = max([len(f) for f in families] + [5])
    lines = ["confusion matrix (rows = actual, columns = predicted):"]
    header = " " * (width + 2) + "  ".join(f.rjust(width) for f in families)
    lines.append(header)
    for actual in families:
        cells = "  ".join(
            str(matrix.count(actual, predicted)).rjust(width) for predicted in families
        )
        lines.append(actual.ljust(width + 2) + cells)
    return "\n".join(lines)


def cmd_classify(args: argparse.Namespace) -> int:
    tree = load_tree(args.tree)
    ds = _load_dataset(args.dataset, args.min_confidence)
    print("browser,family")
    for sig in ds.signatures:
        print(f"{_cell(sig.browser_label)},{classify(tree, sig)}")
    return 0


def _cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def cmd_timemap(args: argparse.Namespace) -> int:
    ds = _load_dataset(args.dataset, args.min_confidence)
    points = reports.timemap_points(ds, family=args.family)
    _write_or_print(reports.render_timemap_csv(points), args.output)
    if args.figure:
        from .figures import render_timemap_figure

        title = (
            f"Release gap vs MHD ({args.family})"
            if args.family
            else "Release gap vs MHD"
        )
        render_timemap_figure(points, args.figure, title=title)
        print(f"timemap figure written to {args.figure}", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    if args.config:
        config = ServerConfig.from_json_file(args.config)
    else:
        config = ServerConfig()
    if args.corpus:
        config.corpus_path = args.corpus
    if args.listen:
        host, _, port_text = args.listen.rpartition(":")
        config.listen_host = host or "127.0.0.1"
        config.listen_port = int(port_text)
    if args.runner_html:
        config.runner_html = args.runner_html
    if args.event_log_dir:
        config.event_log_dir = args.event_log_dir
    if not config.corpus_path:
        raise QuirkprintError("serve needs a corpus (--corpus or config file)")
    run_server(config)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    if args.server:
        ds = replay_all(profiles, args.server, mechanism=args.mechanism)
    else:
        if not args.corpus:
            raise QuirkprintError("simulate needs --server or --corpus")
        from .corpus import load_corpus
        from .server import TestDriver, make_server
        import threading

        driver = TestDriver(load_corpus(args.corpus))
        server = make_server(driver)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]
        try:
            ds = replay_all(
                profiles, f"http://{host}:{port}", mechanism=args.mechanism
            )
        finally:
            server.shutdown()
            server.server_close()
    _write_or_print(export_signatures_text(ds), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quirkprint",
        description="Browser fingerprinting from HTML parser quirks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, dataset_required: bool = True) -> None:
        p.add_argument("--dataset", required=dataset_required, help="signature file")
        p.add_argument(
            "--min-confidence",
            type=float,
            default=DEFAULT_MIN_CONFIDENCE,
            help="confidence gate for dataset rows (default 0.90)",
        )

    p = sub.add_parser("fingerprint", help="nearest-neighbor fingerprint of a query")
    add_common(p)
    p.add_argument("--query", help="signature file holding the query row(s)")
    p.add_argument("--token", help="live session token (with --server)")
    p.add_argument("--server", help="test driver base URL for --token")
    p.add_argument(
        "--outlier-factor",
        type=float,
        default=2.0,
        help="outlier threshold as a multiple of the dataset MDD median",
    )
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("dist-table", help="distance analysis table (MHD/MDF/MDD)")
    add_common(p)
    p.add_argument("--output", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_dist_table)

    p = sub.add_parser("train", help="induce a family decision tree")
    add_common(p)
    p.add_argument("--tree", required=True, help="output tree file")
    p.add_argument(
        "--split",
        choices=("binary", "multiway"),
        default="binary",
        help="split scheme (default binary one-vs-rest)",
    )
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--figure", help="also render the confusion matrix as an image")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify signatures with a tree file")
    add_common(p)
    p.add_argument("--tree", required=True, help="tree file from train")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("timemap", help="release-gap vs distance point export")
    add_common(p)
    p.add_argument("--family", help="restrict to pairs within one family")
    p.add_argument("--output", help="write CSV here instead of stdout")
    p.add_argument("--figure", help="also render the scatter as an image")
    p.set_defaults(func=cmd_timemap)

    p = sub.add_parser("serve", help="run the HTTP test driver")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--corpus", help="corpus file (overrides config)")
    p.add_argument("--listen", help="host:port (overrides config)")
    p.add_argument("--runner-html", help="runner page to serve at /runner")
    p.add_argument("--event-log-dir", help="persist per-session event logs here")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="replay quirk profiles against a driver")
    p.add_argument("--profiles", required=True, help="profile file (P/S/N behavior)")
    p.add_argument("--server", help="existing driver base URL")
    p.add_argument("--corpus", help="corpus for an ephemeral in-process driver")
    p.add_argument(
        "--mechanism",
        choices=("img_beacon", "xhr", "location_redirect", "cookie"),
        default="img_beacon",
    )
    p.add_argument("--output", help="write resulting signatures here")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QuirkprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
