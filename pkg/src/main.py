# FILE: src/main.py
# Command line entry point: mvrp render | detect | run | bench

import argparse
import csv
import logging
import sys
from pathlib import Path

from src import __version__
from src.core.error_handler import (
    ConfigError,
    ErrorHandler,
    ImageFormatError,
    ImageTooSmallError,
    MVRPError,
    MVRPIOError,
)
from src.core.detectors import detect
from src.core.file_manager import FileManager
from src.core.geometry import load_pfp_table
from src.core.harness import bench, render_run_frames, run_trajectory, summarize
from src.core.image_io import as_gray, read_image
from src.core.report_generator import emit_reports, format_summary_table
from src.core.settings_manager import ConfigManager
from src.models.features import DetectorKind

EXIT_OK = 0
EXIT_FRAMES_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

logger = logging.getLogger("MVRP")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvrp",
        description="Monocular relative pose estimation against a tanker's pre-set feature points",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-dir", type=Path, default=None, help="Directory for log files (default data/logs)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_options(p, with_detector):
        p.add_argument("--config", type=Path, help="TOML or JSON config file")
        p.add_argument("--out-dir", type=Path, help="Output directory")
        p.add_argument("--seed", type=int, help="Seed for the scene, trajectory and initial pose noise")
        if with_detector:
            p.add_argument("--detector", choices=[k.value for k in DetectorKind])
            p.add_argument("--frames-dir", type=Path, help="Use a sequence written by 'render'")
            p.add_argument("--no-timing", action="store_true", help="Record t_fe as 0 for reproducible CSVs")

    add_run_options(sub.add_parser("render", help="Render the trajectory frames and truth.csv"), False)

    p_detect = sub.add_parser("detect", help="Extract corners from one image")
    p_detect.add_argument("--algo", required=True, choices=[k.value for k in DetectorKind])
    p_detect.add_argument("--in", dest="input", required=True, type=Path, help="PGM or PPM image")
    p_detect.add_argument("--out", required=True, type=Path, help="CSV file with u,v,score rows")
    p_detect.add_argument("--config", type=Path, help="TOML or JSON config file with detector settings")

    add_run_options(sub.add_parser("run", help="Estimate poses over the trajectory with one detector"), True)
    add_run_options(sub.add_parser("bench", help="Compare Harris, SUSAN and FAST on the same frames"), True)
    return parser


def _config_manager(args) -> ConfigManager:
    config = ConfigManager(args.config)
    config.apply_overrides(
        detector=getattr(args, "detector", None),
        output_dir=args.out_dir,
        seed=args.seed,
        report_timing=False if getattr(args, "no_timing", False) else None,
    )
    return config


def _sequence(cfg, args, pfps):
    if args.frames_dir:
        return FileManager(args.frames_dir).load_sequence()
    return render_run_frames(cfg, pfps)


def cmd_render(args) -> int:
    cfg = _config_manager(args).build_run_config()
    pfps = load_pfp_table(cfg.pfp_file)
    truths, frames = render_run_frames(cfg, pfps)
    FileManager(cfg.output_dir).write_sequence(truths, frames)
    print(f"Rendered {len(frames)} frames into {cfg.output_dir}")
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = ConfigManager(args.config).build_run_config()
    image = as_gray(read_image(args.input))
    corners = detect(image, args.algo, cfg.harris, cfg.susan, cfg.fast)
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["u", "v", "score"])
            writer.writerows([c.u, c.v, repr(c.score)] for c in corners)
    except OSError as e:
        raise MVRPIOError(f"Cannot write {args.out}: {e}") from e
    print(f"{len(corners)} corners written to {args.out}")
    return EXIT_OK


def _report(results, out_dir) -> int:
    summary = summarize(results)
    emit_reports(results, summary, out_dir)
    print(format_summary_table(summary))
    failed = sum(1 for r in results if not r.ok)
    return EXIT_OK if failed == 0 else EXIT_FRAMES_FAILED


def cmd_run(args) -> int:
    cfg = _config_manager(args).build_run_config()
    pfps = load_pfp_table(cfg.pfp_file)
    FileManager(cfg.output_dir).ensure_directory()
    truths, frames = _sequence(cfg, args, pfps)
    results = run_trajectory(cfg, truths, frames, pfps)
    return _report(results, cfg.output_dir)


def cmd_bench(args) -> int:
    cfg = _config_manager(args).build_run_config()
    pfps = load_pfp_table(cfg.pfp_file)
    FileManager(cfg.output_dir).ensure_directory()
    truths, frames = _sequence(cfg, args, pfps)
    by_detector = bench(cfg, truths=truths, frames=frames, pfps=pfps)
    results = [r for group in by_detector.values() for r in group]
    return _report(results, cfg.output_dir)


COMMANDS = {"render": cmd_render, "detect": cmd_detect, "run": cmd_run, "bench": cmd_bench}


def exit_code_for(error: Exception) -> int:
    if isinstance(error, (ImageFormatError, MVRPIOError)):
        return EXIT_IO
    if isinstance(error, (ConfigError, ImageTooSmallError)):
        return EXIT_USAGE
    return EXIT_IO


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    error_handler = ErrorHandler(
        log_dir=args.log_dir,
        level=logging.DEBUG if args.verbose else logging.INFO,
        install_hook=argv is None,
    )
    try:
        with error_handler.error_context(f"mvrp {args.command}"):
            return COMMANDS[args.command](args)
    except MVRPError as e:
        print(f"mvrp {args.command}: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
