import logging
import os
from pathlib import Path
from typing import Dict, List, Optional

from . import config

logger = logging.getLogger(__name__)


# --- File Reading ---
def read_text_file(file_path_str: str, encoding: str = None) -> Optional[str]:
    """
    Reads the content of a text file (FOLD documents are plain JSON text).

    Args:
        file_path_str: The path to the input file.
        encoding: Overrides config.DEFAULT_ENCODING.

    Returns:
        The content as a string, or None if an error occurs.
    """
    file_path = Path(file_path_str)
    if not file_path.is_file():
        logger.error(f"File Not Found Error: The file '{file_path_str}' was not found.")
        return None

    resolved_encoding = encoding if encoding else config.DEFAULT_ENCODING
    logger.info(f"Attempting to read text file: {file_path} with encoding {resolved_encoding}")
    try:
        with open(file_path, "r", encoding=resolved_encoding) as f:
            content = f.read()
        logger.info(f"Successfully read {len(content)} characters from text file {file_path}")
        return content
    except IOError as e:
        logger.error(f"IO Error reading text file '{file_path}'. Details: {e}")
        return None
    except UnicodeDecodeError as e:
        logger.error(
            f"Encoding Error: Failed to decode text file '{file_path}' with encoding '{resolved_encoding}'. Details: {e}"
        )
        return None
    except Exception as e:
        logger.error(
            f"An unexpected error occurred while reading text file '{file_path}': {e}",
            exc_info=True,
        )
        return None


# --- File Writing ---
def write_text_file(file_path: str, content: str, encoding: str = None) -> bool:
    resolved_encoding = encoding if encoding else config.DEFAULT_ENCODING
    logger.info(
        f"Attempting to write {len(content)} characters to file: {file_path} with encoding {resolved_encoding}"
    )
    try:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        # No newline translation.
        with open(file_path, "w", encoding=resolved_encoding, newline="") as f:
            f.write(content)
        logger.info(f"Successfully wrote content to {file_path}")
        return True
    except IOError as e:
        logger.error(
            f"IO Error: An error occurred while writing to the file '{file_path}'. Details: {e}"
        )
        return False
    except Exception as e:
        logger.error(
            f"An unexpected error occurred while writing file '{file_path}': {e}",
            exc_info=True,
        )
        return False


# --- Argument Parsing Helpers ---
def parse_float_list(text: str) -> List[float]:
    """'1,1.5,0.5' -> [1.0, 1.5, 0.5]. Raises ValueError on malformed input."""
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError(f"Expected a comma-separated list of numbers, got '{text}'")
    return [float(item) for item in items]


def parse_level_assignments(pairs: Optional[List[str]]) -> Dict[int, float]:
    """['2=30', '3=25.5'] -> {2: 30.0, 3: 25.5}. Raises ValueError on malformed input."""
    result: Dict[int, float] = {}
    for pair in pairs or []:
        level, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"Expected LEVEL=VALUE, got '{pair}'")
        result[int(level)] = float(value)
    return result
