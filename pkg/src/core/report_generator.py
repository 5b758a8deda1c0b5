# FILE: src/core/report_generator.py
# Per-frame CSV tables, the detector summary table and the error charts.

import csv
import logging
from pathlib import Path
from typing import Dict, List, Sequence

from src.core.constants import POSE_COMPONENTS
from src.core.error_handler import EmptyInputError, MVRPIOError
from src.models.features import DetectorKind
from src.models.results import DetectorSummary, FrameResult
from src.utils.svg_generator import LineChart

FRAME_HEADER = ["k", "x_err", "y_err", "z_err", "psi_err", "theta_err", "phi_err", "t_fe", "n_miss", "n_m", "status"]
SUMMARY_HEADER = [
    "detector", "frames", "failed", "mean_t_fe", "mean_n_miss",
    "mean_abs_x", "mean_abs_y", "mean_abs_z", "mean_abs_psi", "mean_abs_theta", "mean_abs_phi",
]
NOT_AVAILABLE = "n/a"

_UNITS = {"x": "m", "y": "m", "z": "m", "psi": "deg", "theta": "deg", "phi": "deg"}


class ReportGenerator:
    """Writes the artifacts of a run into one output directory

    Floats are written with repr() so the CSV values parse back to the exact
    in-memory numbers.
    """

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.logger = logging.getLogger("ReportGenerator")

    def _ensure_dir(self):
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise MVRPIOError(f"Cannot create output directory {self.out_dir}: {e}") from e

    def _write_csv(self, name: str, header: List[str], rows) -> Path:
        path = self.out_dir / name
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise MVRPIOError(f"Cannot write {path}: {e}") from e
        self.logger.info(f"Wrote {path}")
        return path

    def write_frames(self, detector: DetectorKind, results: Sequence[FrameResult]) -> Path:
        rows = [
            [r.k, *(repr(e) for e in r.errors), repr(r.t_fe), r.n_miss, r.n_m, r.status.value]
            for r in results
        ]
        return self._write_csv(f"frames_{detector.value}.csv", FRAME_HEADER, rows)

    def write_summary(self, summary: Sequence[DetectorSummary]) -> Path:
        rows = []
        for s in summary:
            try:
                means = [repr(m) for m in s.accuracy]
            except EmptyInputError:
                means = [NOT_AVAILABLE] * len(POSE_COMPONENTS)
            rows.append([s.detector.value, s.frames, s.failed, repr(s.mean_t_fe), repr(s.mean_n_miss), *means])
        return self._write_csv("summary.csv", SUMMARY_HEADER, rows)

    def write_charts(self, grouped: Dict[DetectorKind, List[FrameResult]]) -> List[Path]:
        """One chart per pose component with a polyline per detector (Ok frames only)"""
        paths = []
        for index, component in enumerate(POSE_COMPONENTS):
            series = {
                kind.value: (
                    [r.k for r in results],
                    [r.errors[index] if r.ok else None for r in results],
                )
                for kind, results in grouped.items()
            }
            chart = LineChart(
                f"Estimation error of {component}",
                f"{component} error ({_UNITS[component]})",
                series,
            )
            paths.append(chart.save(self.out_dir / f"error_{component}.svg"))
        return paths

    def emit(self, results: Sequence[FrameResult], summary: Sequence[DetectorSummary]) -> List[Path]:
        if not results:
            raise EmptyInputError("No frame results to report")
        self._ensure_dir()
        grouped: Dict[DetectorKind, List[FrameResult]] = {}
        for r in results:
            grouped.setdefault(r.detector, []).append(r)

        written = [self.write_frames(kind, group) for kind, group in grouped.items()]
        written.append(self.write_summary(summary))
        written.extend(self.write_charts(grouped))
        return written


def emit_reports(results: Sequence[FrameResult], summary: Sequence[DetectorSummary], out_dir) -> List[Path]:
    """Write frames_<detector>.csv, summary.csv and error_<component>.svg into out_dir

    Raises:
        EmptyInputError: no results
        MVRPIOError: the directory or a file cannot be written
    """
    return ReportGenerator(out_dir).emit(results, summary)


def format_summary_table(summary: Sequence[DetectorSummary]) -> str:
    """Console table with the timing and accuracy columns"""
    header = f"{'detector':<8} {'frames':>6} {'failed':>6} {'t_FE (ms)':>10} {'N_miss':>7}"
    header += "".join(f" {'|e_' + c + '|':>10}" for c in POSE_COMPONENTS)
    lines = [header]
    for s in summary:
        line = f"{s.detector.value:<8} {s.frames:>6} {s.failed:>6} {s.mean_t_fe * 1000.0:>10.3f} {s.mean_n_miss:>7.2f}"
        try:
            line += "".join(f" {m:>10.4f}" for m in s.accuracy)
        except EmptyInputError:
            line += "".join(f" {NOT_AVAILABLE:>10}" for _ in POSE_COMPONENTS)
        lines.append(line)
    return "\n".join(lines)
