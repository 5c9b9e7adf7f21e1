import logging

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

_configured = False


def setup_logging(level: str = "INFO") -> None:
    """Configure the root logger once with the project format."""
    global _configured
    numeric_level = getattr(logging, str(level).upper(), logging.INFO)
    if not _configured:
        logging.basicConfig(level=numeric_level, format=LOG_FORMAT)
        _configured = True
    logging.getLogger().setLevel(numeric_level)