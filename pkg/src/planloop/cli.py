"""Command-line interface: batch corpus runs and the interactive service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .metrics import build_report, load_ground_truth
from .refine import load_lexicon
from .scenario import ManifestError, load_manifest, run_manifest
from .session import CONFIGURATIONS


def _write_outputs(results, report, out_dir: Path) -> None:
    sessions_dir = out_dir / "sessions"
    sessions_dir.mkdir(parents=True, exist_ok=True)
    for result in results:
        stem = f"{result.scenario_id}__{result.configuration}"
        trace_lines = [json.dumps(e, sort_keys=True) for e in result.events]
        (sessions_dir / f"{stem}.trace.jsonl").write_text("\n".join(trace_lines) + "\n")
        (sessions_dir / f"{stem}.progress.txt").write_text(result.progress_text)
    (out_dir / "report.txt").write_text(report.render())
    (out_dir / "report.json").write_text(report.to_json())


def cli_run(
    manifest_path: str,
    out_dir: str,
    configurations: Optional[Sequence[str]] = None,
    feedback_budget: Optional[int] = None,
    ground_truth_path: Optional[str] = None,
    quiet: bool = False,
) -> int:
    """Run every scenario under every requested configuration; exit 0 when
    all sessions terminated (task failure is a result, not a crash)."""
    try:
        manifest = load_manifest(manifest_path, configurations)
        results = run_manifest(manifest, feedback_budget)
        ground_truth = load_ground_truth(ground_truth_path) if ground_truth_path else None
        lexicon = load_lexicon(manifest.scenarios[0].lexicon_path) if ground_truth else None
        report = build_report(results, ground_truth, lexicon)
        _write_outputs(results, report, Path(out_dir))
    except ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not quiet:
        print(report.render(), end="")
        print(f"\nwrote {len(results)} session logs to {out_dir}/sessions")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="planloop",
        description="Knowledge-grounded task planning with scripted LLM replies and a human oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario manifest headlessly and write reports")
    run.add_argument("manifest", help="path to a manifest JSON listing scenarios")
    run.add_argument("-o", "--out", default="out", help="output directory (default: out)")
    run.add_argument(
        "--configurations",
        help=f"comma-separated subset of {','.join(CONFIGURATIONS)} (default: manifest's list)",
    )
    run.add_argument("--feedback-budget", type=int, help="override every scenario's re-prompt budget")
    run.add_argument("--ground-truth", help="recipe ground-truth file for ingredient overlap")
    run.add_argument("-q", "--quiet", action="store_true", help="suppress the report on stdout")

    serve = sub.add_parser("serve", help="serve the interactive session API (and oracle console)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--base-dir", default=".", help="directory scenario paths resolve against")
    serve.add_argument("--ui-dir", help="static directory to serve at / (the oracle console build)")

    args = parser.parse_args(argv)
    if args.command == "run":
        configurations = args.configurations.split(",") if args.configurations else None
        return cli_run(
            args.manifest,
            args.out,
            configurations,
            args.feedback_budget,
            args.ground_truth,
            args.quiet,
        )
    if args.command == "serve":
        import uvicorn

        from .server import create_app

        app = create_app(Path(args.base_dir), ui_dir=Path(args.ui_dir) if args.ui_dir else None)
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
