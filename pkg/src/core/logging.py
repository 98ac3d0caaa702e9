import logging

VALID_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def parse_log_level(level: str) -> str:
    # Parse log level - extract just the first word to handle comments
    words = (level or "").split()
    log_level = words[0].upper() if words else "INFO"

    # Validate and set default if invalid
    if log_level not in VALID_LEVELS:
        log_level = "INFO"
    return log_level


def setup_logging(level: str = "INFO") -> logging.Logger:
    """Configure root logging once for a CLI process."""
    log_level = parse_log_level(level)

    # Logging Configuration
    logging.basicConfig(
        level=getattr(logging, log_level),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    logging.getLogger().setLevel(getattr(logging, log_level))

    return logging.getLogger("src")


logger = logging.getLogger("src")
