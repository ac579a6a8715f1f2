"""
Quantum-measure toolkit - command-line entry point

    python -m src.main <command> [argument] --input <file> [options]

Reports go to stdout (or --out); logs go to stderr.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.cli.models import DocumentError, parse_document
from src.cli.rendering import render
from src.config.toolkit_config import CoeventMethod, get_settings
from src.measure.models import CapacityError, DomainError, ToolkitError
from src.monitoring import metrics
from src.services.toolkit_service import COMMANDS, ToolkitService, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOCUMENT = 2
EXIT_CAPACITY = 3
EXIT_DOMAIN = 4


class ToolkitArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the usage code, not 2."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(
        prog="qmeasure",
        description="Finite-histories quantum measure: preclusion, coevents, classical partitions.",
    )
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument(
        "argument", nargs="?", default=None,
        help="event (a,b,c), partition (a,b;c), declared-events file or second document",
    )
    parser.add_argument("--input", required=True, help="system document (JSON)")
    parser.add_argument("--epsilon", type=float, default=None, help="preclusion tolerance")
    parser.add_argument(
        "--method", choices=[m.value for m in CoeventMethod], default=None,
        help="coevent algorithm",
    )
    parser.add_argument("--format", choices=["json", "text"], default="json")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument("--timing", action="store_true", help="add wall time and RSS to the report")
    parser.add_argument("--metrics-out", default=None, help="write Prometheus metrics to this file")
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        with metrics.track_command(args.command) as timing:
            try:
                text = Path(args.input).read_text(encoding="utf-8")
            except OSError as e:
                raise DocumentError(f"cannot read {args.input}: {e.strerror}") from e
            service = ToolkitService(parse_document(text), text, args.epsilon, args.method)
            report = service.run(args.command, args.argument)
        if args.timing:
            report.timing = dict(timing)
        output = render(report, args.format)
        if args.out:
            Path(args.out).write_text(output, encoding="utf-8")
        else:
            sys.stdout.write(output)
        code = EXIT_OK
        if args.command == "validate" and not report.results.get("valid", True):
            code = EXIT_DOMAIN
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_USAGE
    except DocumentError as e:
        print(f"document error: {e}", file=sys.stderr)
        code = EXIT_DOCUMENT
    except CapacityError as e:
        print(f"capacity error: {e} (size {e.size}, cap {e.cap})", file=sys.stderr)
        code = EXIT_CAPACITY
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        code = EXIT_DOMAIN
    except ToolkitError as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_DOMAIN
    finally:
        metrics.export_metrics(args.metrics_out)
    return code


if __name__ == "__main__":
    sys.exit(main())
