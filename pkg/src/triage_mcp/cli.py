"""
Triage MCP - Command line

Usage:
  triage diagnose LOG_DIR [--backend mock|http|replay] [--budget-tokens N]
  triage eval [--cases N] [--seed S] [--faults ComponentCrash,...] [--no-timing] [--output FILE]
  triage metrics [--json]
  triage serve [--host HOST] [--port PORT]
  triage mcp [--transport stdio|http]

Exit codes of ``diagnose``: 0 conclusive, 2 insufficient information,
3 unparseable response, 1 operational error. Other commands exit 0 on
success and 1 on invalid flags or operational errors.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from . import __version__
from .config import ServiceConfig, load_config
from .errors import TriageError
from .models.diagnosis import Outcome

logger = logging.getLogger(__name__)

LOG_FORMAT = "[triage] %(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INSUFFICIENT = 2
EXIT_UNPARSEABLE = 3

OUTCOME_EXIT_CODES = {
    Outcome.CONCLUSIVE: EXIT_OK,
    Outcome.INSUFFICIENT_INFORMATION: EXIT_INSUFFICIENT,
    Outcome.UNPARSEABLE: EXIT_UNPARSEABLE,
}


def configure_logging(verbose: bool = False) -> None:
    """Send log records to stderr; stdout carries command output only."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    logging.getLogger("httpx").setLevel(logging.WARNING)


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with exit status 1 (2 means insufficient information)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _faults(value: str) -> list[str]:
    return [label.strip() for label in value.split(",") if label.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="triage", description="Integration test failure triage")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--config", type=Path, help="Key-value config file (KEY=value lines)")
    parser.add_argument("--store-dir", type=Path, help="Findings and feedback directory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    diagnose = sub.add_parser("diagnose", help="Diagnose one failed test's log directory")
    diagnose.add_argument("root_dir", type=Path, help="Bundle directory")
    diagnose.add_argument("--backend", choices=["http", "mock", "replay"])
    diagnose.add_argument("--replay-dir", type=Path, help="Recordings for the replay backend")
    diagnose.add_argument("--budget-tokens", type=int, help="Prompt token budget")
    diagnose.add_argument(
        "--message-only", action="store_true", help="Drop metadata columns from log lines"
    )

    evaluate = sub.add_parser("eval", help="Evaluate accuracy on generated failures")
    evaluate.add_argument("--cases", type=int, default=20, help="Number of cases (default: 20)")
    evaluate.add_argument("--seed", type=int, default=0, help="Corpus seed (default: 0)")
    evaluate.add_argument("--faults", type=_faults, help="Comma separated fault kinds")
    evaluate.add_argument("--components", type=int, default=5, help="SUT components per case")
    evaluate.add_argument("--min-lines", type=int, default=200, help="Min lines per file")
    evaluate.add_argument("--max-lines", type=int, default=2000, help="Max lines per file")
    evaluate.add_argument("--noise-error-rate", type=float, default=0.05)
    evaluate.add_argument("--backend", choices=["http", "mock", "replay"])
    evaluate.add_argument("--replay-dir", type=Path, help="Recordings for the replay backend")
    evaluate.add_argument("--work-dir", type=Path, help="Keep generated bundles here")
    evaluate.add_argument("--concurrency", type=int, default=4)
    evaluate.add_argument(
        "--no-timing", action="store_true", help="Omit latency lines (deterministic report)"
    )
    evaluate.add_argument("--output", type=Path, help="Also write the report as JSON")

    metrics = sub.add_parser("metrics", help="Print feedback metrics")
    metrics.add_argument("--json", action="store_true", help="Print JSON instead of a table")

    serve = sub.add_parser("serve", help="Run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)

    mcp = sub.add_parser("mcp", help="Run the MCP server")
    mcp.add_argument("mcp_args", nargs=argparse.REMAINDER)
    return parser


def _load(args: argparse.Namespace, **overrides) -> ServiceConfig:
    return load_config(args.config, store_dir=args.store_dir, **overrides)


def cmd_diagnose(args: argparse.Namespace) -> int:
    from .findings import FeedbackStore
    from .merging import render_message, render_raw
    from .pipeline import run_pipeline

    config = _load(
        args, kind=args.backend, replay_dir=args.replay_dir, budget_tokens=args.budget_tokens
    )
    run = asyncio.run(
        run_pipeline(
            args.root_dir, config, render=render_message if args.message_only else render_raw
        )
    )
    path = FeedbackStore.from_config(config).add_finding(run.finding)
    sys.stdout.write(run.finding.body_markdown)
    logger.info("Finding %s written to %s", run.finding.finding_id, path)
    return OUTCOME_EXIT_CODES[run.outcome]


def cmd_eval(args: argparse.Namespace) -> int:
    from .backends import create_backend
    from .evaluation import build_corpus, render_eval_report, run_eval

    if args.cases < 0:
        raise ValueError("--cases must be >= 0")
    config = _load(args, kind=args.backend, replay_dir=args.replay_dir)
    corpus = build_corpus(
        args.cases,
        args.seed,
        args.faults,
        components=args.components,
        lines_per_file=(args.min_lines, args.max_lines),
        noise_error_rate=args.noise_error_rate,
    )
    report = asyncio.run(
        run_eval(
            corpus,
            create_backend(config.backend),
            config=config,
            work_dir=args.work_dir,
            concurrency=args.concurrency,
        )
    )
    sys.stdout.write(render_eval_report(report, include_timing=not args.no_timing))
    if args.output:
        exclude = {"mean_latency_seconds": True, "results": {"__all__": {"latency_seconds"}}}
        args.output.write_text(
            report.model_dump_json(indent=2, exclude=exclude if args.no_timing else None) + "\n",
            encoding="utf-8",
        )
        logger.info("Report written to %s", args.output)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    from .findings import FeedbackStore, compute_metrics, render_metrics

    config = _load(args)
    report = compute_metrics(FeedbackStore.from_config(config))
    if args.json:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    else:
        sys.stdout.write(render_metrics(report))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .http_app import run_http_server

    config = _load(args, host=args.host, port=args.port)
    run_http_server(config)
    return EXIT_OK


def cmd_mcp(args: argparse.Namespace) -> int:
    from .server import main as server_main

    server_main(args.mcp_args)
    return EXIT_OK


COMMANDS = {
    "diagnose": cmd_diagnose,
    "eval": cmd_eval,
    "metrics": cmd_metrics,
    "serve": cmd_serve,
    "mcp": cmd_mcp,
}


def main(argv: Optional[list[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (TriageError, OSError, ValidationError, ValueError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
