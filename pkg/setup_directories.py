from pathlib import Path

from src.core.constants import LOGS_DIR, RUNS_DIR


def create_directories():
    # Runtime folders for logs and run outputs
    for dir_path in (LOGS_DIR, RUNS_DIR):
        Path(dir_path).mkdir(parents=True, exist_ok=True)


if __name__ == "__main__":
    create_directories()
