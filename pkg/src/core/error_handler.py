# ERROR HANDLING AND LOGGING SYSTEM
# FILE: src/core/error_handler.py

import logging
import sys
import traceback
from datetime import datetime
from pathlib import Path

from src.core.constants import LOGS_DIR


# EXCEPTION HIERARCHY

class MVRPError(Exception):
    """Base class for every error raised by the pose estimation pipeline"""


class InvalidPoseError(MVRPError, ValueError):
    """A pose component is not finite"""


class InvalidFovError(MVRPError, ValueError):
    """Field of view outside the open interval (0, 180) degrees"""


class BehindCameraError(MVRPError):
    """A matched feature point projects with z_C <= 0"""

    def __init__(self, pfp_id, z_c):
        super().__init__(f"PFP {pfp_id} is behind the camera (z_C = {z_c:.6g})")
        self.pfp_id = pfp_id
        self.z_c = z_c


class ImageFormatError(MVRPError, ValueError):
    """Netpbm file is malformed (bad magic, maxval or truncated payload)"""


class MVRPIOError(MVRPError, OSError):
    """File or directory could not be read or written"""


class ImageTooSmallError(MVRPError, ValueError):
    """Image is smaller than the detector footprint"""


class InsufficientPointsError(MVRPError):
    """Fewer than three matched pairs are available for pose estimation"""

    def __init__(self, n_m):
        super().__init__(f"Pose estimation needs N_M >= 3 matched pairs, got {n_m}")
        self.n_m = n_m


class NotConvergedError(MVRPError):
    """Levenberg-Marquardt hit max_iterations; the flagged estimate is attached"""

    def __init__(self, estimate):
        super().__init__(
            f"Solver did not converge after {estimate.iterations} iterations "
            f"(rms residual {estimate.rms_residual:.4f} px)"
        )
        self.estimate = estimate


class MissingPreviousError(MVRPError):
    """Sample index k >= 2 requires the previous estimate"""


class EmptyInputError(MVRPError, ValueError):
    """Nothing to summarize"""


class ConfigError(MVRPError, ValueError):
    """Run configuration is invalid"""


class ErrorHandler:
    """Centralized logging setup and error reporting for the command line tool

    Library modules only create named loggers; this class owns the handlers.
    """

    def __init__(self, log_dir=None, level=logging.INFO, install_hook=True):
        """Initialize the error handler

        Args:
            log_dir: Directory for the log files (defaults to data/logs)
            level: Root logging level
            install_hook: Whether to install the global exception hook
        """
        self.log_dir = Path(log_dir) if log_dir else LOGS_DIR
        self.original_hook = None
        self.setup_logging(level)
        if install_hook:
            self.install_exception_hook()

    def setup_logging(self, level=logging.INFO):
        """Setup the logging system

        Args:
            level: Level of the root logger and the console handler
        """
        self.logger = logging.getLogger()
        self.logger.setLevel(level)

        # Clear existing handlers to avoid duplicates
        if self.logger.handlers:
            self.logger.handlers.clear()

        # Console handler is always available, file handlers only if the dir is writable
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(logging.Formatter("%(levelname)s - %(name)s: %(message)s"))
        self.logger.addHandler(console_handler)

        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            current_date = datetime.now().strftime("%Y-%m-%d")

            file_handler = logging.FileHandler(self.log_dir / f"application_{current_date}.log")
            file_handler.setFormatter(
                logging.Formatter("%(asctime)s - %(levelname)s - %(name)s - %(message)s")
            )
            self.logger.addHandler(file_handler)

            # Error log for warnings and above
            error_handler = logging.FileHandler(self.log_dir / f"errors_{current_date}.log")
            error_handler.setLevel(logging.WARNING)
            error_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(levelname)s - %(name)s - %(message)s\n"
                    "File: %(pathname)s\nLine: %(lineno)d\n"
                )
            )
            self.logger.addHandler(error_handler)
        except OSError as e:
            self.logger.warning(f"File logging disabled, cannot use {self.log_dir}: {e}")

        self.app_logger = logging.getLogger("MVRP")
        self.app_logger.debug("Logging system initialized")

    def install_exception_hook(self):
        """Install global exception hook"""
        self.original_hook = sys.excepthook
        sys.excepthook = self.exception_hook

    def exception_hook(self, exc_type, exc_value, exc_traceback):
        """Log unhandled exceptions, then defer to the original hook

        Args:
            exc_type: Exception type
            exc_value: Exception value
            exc_traceback: Exception traceback
        """
        tb_text = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))
        self.app_logger.critical(f"Unhandled exception: {exc_type.__name__}: {exc_value}\n{tb_text}")
        if self.original_hook:
            self.original_hook(exc_type, exc_value, exc_traceback)

    def log_error(self, error_type, message, traceback_obj=None):
        """Log an error

        Args:
            error_type: Type of error
            message: Error message
            traceback_obj: Traceback object (optional)
        """
        error_details = str(message)
        if traceback_obj:
            tb_text = "".join(traceback.format_tb(traceback_obj))
            error_details = f"{message}\n{tb_text}"
        self.app_logger.error(f"{error_type}: {error_details}")

    def log_info(self, message):
        self.app_logger.info(str(message))

    def error_context(self, context_name, suppress=False):
        """Context manager for error handling

        Usage:
            with error_handler.error_context("bench"):
                # code that might raise an exception

        Args:
            context_name: Name of the operation context
            suppress: Swallow the exception after logging it

        Returns:
            Context manager object
        """
        return ErrorContext(self, context_name, suppress)


class ErrorContext:
    """Context manager that logs the start, end and failure of an operation"""

    def __init__(self, error_handler, context_name, suppress=False):
        self.error_handler = error_handler
        self.context_name = context_name
        self.suppress = suppress

    def __enter__(self):
        self.error_handler.log_info(f"Starting: {self.context_name}")
        return self

    def __exit__(self, exc_type, exc_value, exc_traceback):
        if exc_type is not None:
            self.error_handler.log_error(
                exc_type.__name__,
                f"Error in {self.context_name}: {exc_value}",
                exc_traceback if not isinstance(exc_value, MVRPError) else None,
            )
            return self.suppress

        self.error_handler.log_info(f"Completed: {self.context_name}")
        return False
