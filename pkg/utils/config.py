import os
from dataclasses import dataclass

from models.config import OUTPUT_DIR

# Define the subdirectories
RASTERS_SUBDIR = "rasters"
TABLES_SUBDIR = "tables"
EVENTS_SUBDIR = "events"

# Define the file names
REPORT_CSV = "report.csv"
REPORT_JSONL = "report.jsonl"
INTENSITY_SWEEP_CSV = "intensity_sweep.csv"
INTENSITY_SUMMARY_CSV = "intensity_sweep_summary.csv"
DELTA_SWEEP_CSV = "delta_sweep.csv"
DELTA_SUMMARY_CSV = "delta_sweep_summary.csv"
BASELINE_CSV = "baseline.csv"
EVENTS_CSV = "events.csv"


@dataclass(frozen=True)
class RunLayout:
    """Artifact paths under one output directory."""
    root: str

    @property
    def rasters_dir(self) -> str:
        return os.path.join(self.root, RASTERS_SUBDIR)

    @property
    def tables_dir(self) -> str:
        return os.path.join(self.root, TABLES_SUBDIR)

    @property
    def events_dir(self) -> str:
        return os.path.join(self.root, EVENTS_SUBDIR)

    def raster(self, name: str) -> str:
        """Base path (no extension) of a raster artifact."""
        return os.path.join(self.rasters_dir, name)

    def table(self, file_name: str) -> str:
        return os.path.join(self.tables_dir, file_name)

    def ensure(self) -> "RunLayout":
        # Create the directories if they don't exist
        os.makedirs(self.rasters_dir, exist_ok=True)
        os.makedirs(self.tables_dir, exist_ok=True)
        os.makedirs(self.events_dir, exist_ok=True)
        return self


def run_layout(output_dir: str = OUTPUT_DIR) -> RunLayout:
    return RunLayout(output_dir).ensure()
