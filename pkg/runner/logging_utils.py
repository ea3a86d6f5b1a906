import csv
import logging
import os
from threading import Lock

from runner.config import config

logger = logging.getLogger(__name__)


class CsvLogger:
    def __init__(self, file_path: str, headers: list):
        self.file_path = file_path
        self.headers = headers
        self._lock = Lock()
        self._initialized = False

    def _initialize_file(self):
        """Creates file with headers if it doesn't exist."""
        directory = os.path.dirname(self.file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if not os.path.exists(self.file_path):
            with open(self.file_path, "w", newline="", encoding="utf-8") as f:
                csv.writer(f).writerow(self.headers)
        self._initialized = True

    def log_row(self, row_dict: dict):
        """Appends one row; keys outside the headers are dropped."""
        with self._lock:
            try:
                if not self._initialized:
                    self._initialize_file()
                with open(self.file_path, "a", newline="", encoding="utf-8") as f:
                    writer = csv.DictWriter(f, fieldnames=self.headers)
                    writer.writerow({k: row_dict.get(k, "") for k in self.headers})
            except OSError as e:
                logger.error("Failed to write to log %s: %s", self.file_path, e)

    def read_rows(self) -> list[dict]:
        if not os.path.exists(self.file_path):
            return []
        with open(self.file_path, newline="", encoding="utf-8") as f:
            return list(csv.DictReader(f))

    def reset(self):
        """Clears the log file and re-writes headers."""
        with self._lock:
            try:
                if os.path.exists(self.file_path):
                    os.remove(self.file_path)
                self._initialize_file()
                logger.info("Log reset: %s", self.file_path)
            except OSError as e:
                logger.error("Failed to reset log %s: %s", self.file_path, e)


# Run log: one row per CLI invocation
RUN_LOG_PATH = os.path.join(config.LOG_DIR, "runs_log.csv")
RUN_HEADERS = [
    "command", "scenario", "seed", "status", "exit_code", "wall_seconds", "output_dir",
]
run_logger = CsvLogger(RUN_LOG_PATH, RUN_HEADERS)
