"""
Logging configuration for the phase retrieval toolkit.
"""

import logging
import os
from datetime import datetime

from models.config import LOG_LEVEL, LOG_TO_FILE, OUTPUT_DIR

# Configure logging
logger = logging.getLogger("event_phase")
logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.INFO))

# Create formatter
formatter = logging.Formatter(
    "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)

# Create console handler
if not logger.handlers:
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if LOG_TO_FILE:
        log_dir = os.path.join(OUTPUT_DIR, "logs")
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"event_phase_{datetime.now().strftime('%Y%m%d')}.log")
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


def set_level(level: str) -> None:
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
