"""smockctl - command line entry point.

    smockctl <command> [name] --scene <file> [--out <csv>] [--plot-dir <dir>]
             [--budget <n>] [--seed <u64>] [--log-level <level>]

The CSV report goes to stdout (or ``--out``); progress logs go to stderr.
Exit status is 0 on success, 2 when a domain check fails (invalid scene,
exceeded budget, missing seed) and 1 for anything unexpected.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from smock import __version__
from smock.agents.orchestrator import DEMOS, ExperimentOrchestrator
from smock.errors import SceneError, SmockError, UnknownCommand
from smock.logging_setup import configure_logging
from smock.services.scenes import parse_scene, scene_digest

logger = logging.getLogger(__name__)

COMMANDS = (
    "dist",
    "constants",
    "hausdorff",
    "net",
    "gh",
    "converge",
    "local-bounds",
    "tangent",
    "defect",
    "measure",
    "demo",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smockctl", description="Experiments on smocked metric spaces")
    parser.add_argument("command", help=f"one of: {', '.join(COMMANDS)}")
    parser.add_argument("name", nargs="?", help=f"demo name: {', '.join(DEMOS)}")
    parser.add_argument("--scene", type=Path, help="scene JSON document")
    parser.add_argument("--out", type=Path, help="write the CSV report here instead of stdout")
    parser.add_argument("--plot-dir", type=Path, help="write one .dat series per numeric column")
    parser.add_argument("--budget", type=int, help="cap on net candidates and d_k enumeration")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed, overrides the scene")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--version", action="version", version=f"smockctl {__version__}")
    return parser


def _read_scene(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise SceneError([("", f"cannot read scene {path}: {exc.strerror}")]) from exc


def run(args: argparse.Namespace) -> int:
    if args.command not in COMMANDS:
        raise UnknownCommand(f"Unknown command '{args.command}'", {"known": list(COMMANDS)})
    if args.budget is not None and args.budget < 1:
        raise SceneError([("--budget", "budget must be a positive integer")])
    if args.seed is not None and args.seed < 0:
        raise SceneError([("--seed", "seed must be nonnegative")])

    scene, digest = None, ""
    if args.command != "demo":
        if args.scene is None:
            raise SceneError([("--scene", f"command '{args.command}' needs --scene")])
        text = _read_scene(args.scene)
        scene = parse_scene(text, seed=args.seed)
        digest = scene_digest(text)
        logger.info(f"🚀 smockctl {args.command}: scene {args.scene} (sha256 {digest[:12]})")

    orchestrator = ExperimentOrchestrator(scene, scene_hash=digest, seed=args.seed, budget=args.budget)
    report = orchestrator.run(args.command, args.name)

    csv_text = report.to_csv()
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(csv_text)
        logger.info(f"✅ Report written to {args.out}")
    else:
        sys.stdout.write(csv_text)
    if args.plot_dir is not None:
        written = report.write_plot_series(args.plot_dir)
        logger.info(f"✅ {len(written)} plot series written to {args.plot_dir}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return run(args)
    except SmockError as exc:
        logger.error(f"❌ {exc.message}")
        return 2
    except Exception as exc:
        logger.exception(f"❌ Unexpected failure: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
