import logging
import math
from typing import Any


def setup_logging(verbose: bool = False) -> None:
    """Route log records to stderr; data output never goes through logging"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def finite_or_none(value: Any) -> Any:
    """JSON has no inf/nan; map them to null"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
