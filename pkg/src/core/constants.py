"""
Paths and fixed simulation parameters for the MVRP pipeline
"""
from pathlib import Path

# Base directories
ROOT_DIR = Path(__file__).parent.parent.parent
DATA_DIR = ROOT_DIR / "data"

# Data subdirectories (created on demand by setup_directories.py / ErrorHandler)
LOGS_DIR = DATA_DIR / "logs"
RUNS_DIR = DATA_DIR / "runs"
PFP_TABLE_FILE = DATA_DIR / "kc10_pfps.txt"

# Camera and image
IMAGE_WIDTH = 512
IMAGE_HEIGHT = 384
CAMERA_PITCH_DEG = 38.0
DEFAULT_FOV_Y_DEG = 60.0

# Approach trajectory: pre-contact pose, per-frame step, frame count
PRE_CONTACT_POSE = (0.0, 80.0, 60.0, 0.0, 0.0, 0.0)
TRAJECTORY_STEP_Y = -0.5
TRAJECTORY_STEP_Z = -0.5
TRAJECTORY_FRAMES = 71

# Gross error thresholds
T1_PIXELS = 5.0
T2_PERCENT = 50.0

# Minimum matched pairs for pose estimation
MIN_MATCHES = 3

POSE_COMPONENTS = ("x", "y", "z", "psi", "theta", "phi")
