# FILE: src/core/file_manager.py
# Output directories and rendered frame sequences on disk:
# frame_NNNN.ppm files plus truth.csv with one ground-truth pose per frame.

import csv
import logging
from pathlib import Path
from typing import List, Sequence, Tuple

from src.core.constants import POSE_COMPONENTS
from src.core.error_handler import ImageFormatError, MVRPError, MVRPIOError
from src.core.image_io import read_image, write_image
from src.models.images import GrayImage, RgbImage
from src.models.pose import PoseVector

TRUTH_FILE = "truth.csv"
TRUTH_HEADER = ["k", *POSE_COMPONENTS]


class FileManager:
    """File management for one run or sequence directory"""

    def __init__(self, base_dir):
        """Initialize the file manager

        Args:
            base_dir: Directory holding frames, truth.csv and reports
        """
        self.base_dir = Path(base_dir)
        self.logger = logging.getLogger("FileManager")

    def ensure_directory(self) -> Path:
        """Create the base directory if needed

        Raises:
            MVRPIOError: the directory cannot be created or is not a directory
        """
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise MVRPIOError(f"Cannot create output directory {self.base_dir}: {e}") from e
        return self.base_dir

    @staticmethod
    def frame_name(k: int) -> str:
        return f"frame_{k:04d}.ppm"

    def frame_path(self, k: int) -> Path:
        return self.base_dir / self.frame_name(k)

    def write_truth(self, truths: Sequence[PoseVector]) -> Path:
        path = self.base_dir / TRUTH_FILE
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(TRUTH_HEADER)
                for k, pose in enumerate(truths):
                    writer.writerow([k, *(repr(v) for v in pose.as_array().tolist())])
        except OSError as e:
            raise MVRPIOError(f"Cannot write {path}: {e}") from e
        return path

    def read_truth(self) -> List[PoseVector]:
        """Ground-truth poses ordered by k

        Raises:
            MVRPIOError: truth.csv cannot be read
            MVRPError: malformed rows or non-consecutive frame indices
        """
        path = self.base_dir / TRUTH_FILE
        try:
            with open(path, newline="", encoding="utf-8") as f:
                rows = list(csv.DictReader(f))
        except OSError as e:
            raise MVRPIOError(f"Cannot read {path}: {e}") from e

        poses = []
        for expected_k, row in enumerate(rows):
            try:
                k = int(row["k"])
                pose = PoseVector(*(float(row[c]) for c in POSE_COMPONENTS))
            except (KeyError, TypeError, ValueError) as e:
                raise MVRPError(f"{path}: malformed row {expected_k + 1}: {e}") from e
            if k != expected_k:
                raise MVRPError(f"{path}: expected frame {expected_k}, found {k}")
            poses.append(pose)
        return poses

    def write_sequence(self, truths: Sequence[PoseVector], frames: Sequence[RgbImage]) -> List[Path]:
        """Write every frame and truth.csv; returns the frame paths"""
        self.ensure_directory()
        paths = []
        for k, frame in enumerate(frames):
            path = self.frame_path(k)
            write_image(frame, path)
            paths.append(path)
        self.write_truth(truths)
        self.logger.info(f"Saved {len(paths)} frames and {TRUTH_FILE} to {self.base_dir}")
        return paths

    def load_sequence(self) -> Tuple[List[PoseVector], List[RgbImage]]:
        """Load a sequence written by write_sequence

        Gray frames are expanded to three equal channels.

        Raises:
            MVRPIOError: a file is missing or unreadable
            ImageFormatError: a frame is malformed
        """
        truths = self.read_truth()
        frames = []
        for k in range(len(truths)):
            image = read_image(self.frame_path(k))
            if isinstance(image, GrayImage):
                image = RgbImage(image.pixels[:, :, None].repeat(3, axis=2))
            frames.append(image)
        if frames and len({(f.width, f.height) for f in frames}) != 1:
            raise ImageFormatError(f"Frames in {self.base_dir} do not share one size")
        self.logger.info(f"Loaded {len(frames)} frames from {self.base_dir}")
        return truths, frames
