"""Application-wide constants for COMODI."""

import os
from pathlib import Path
from typing import Optional

# ============================================================================
# Directory Structure Constants
# ============================================================================

DEFAULT_BASE_DIR_NAME = ".comodi"
HOME_ENV_VAR = "COMODI_HOME"
DEFAULT_CONFIG_FILE = "comodi.xml"
LOCAL_REPO_SUBDIR = "repository"
LOGS_SUBDIR = "logs"
RUN_LOGS_SUBDIR = "logs/runs"
MAIN_LOG_FILE = "comodi.log"
INDEX_FILE = "index.xml"
PACKAGES_SUBDIR = "pkg"


def get_base_dir(custom_dir: Optional[Path] = None) -> Path:
    """Get the base COMODI directory.

    Args:
        custom_dir: Optional custom base directory

    Returns:
        Path to base directory ($COMODI_HOME, else ~/.comodi)
    """
    if custom_dir is not None:
        return custom_dir
    env_home = os.environ.get(HOME_ENV_VAR)
    if env_home:
        return Path(env_home)
    return Path.home() / DEFAULT_BASE_DIR_NAME


# ============================================================================
# Parser Engine Constants
# ============================================================================

# Step budget for one recognize() call; exhausting it is a defect, not a parse error
DEFAULT_FUEL = 5_000_000

# Special-sequence catalog allowed inside `? ... ?`
CHARACTER_CLASSES = ("letter", "digit", "any", "eol", "whitespace")

END_OF_INPUT = "<eoi>"

# Grammar section directives
LEXICAL_MARKER = "LEXICAL"
SYNTAX_MARKER = "SYNTAX"
SKIP_MARKER = "SKIP"


# ============================================================================
# Descriptor and Glue Constants
# ============================================================================

CDL_VERSION = "1"
GLOBAL_NAME_PREFIX = "cmdi_"
GLUE_FILE_SUFFIX = "_glue.c"
WIRING_FILE_SUFFIX = "_wiring.xml"
CDF_FILE_NAME = "component.xml"
MANIFEST_PATH = "manifest.xml"


# ============================================================================
# Repository and Compilation Constants
# ============================================================================

DEFAULT_REPO_HOST = "127.0.0.1"
DEFAULT_REPO_PORT = 8765
HTTP_TIMEOUT_SECONDS = 30
COMPILE_TIMEOUT_SECONDS = 300
DIGEST_HEADER = "X-Comodi-Digest"
ARCHIVE_FORMATS = ("zip", "tar.gz")

# Fixed timestamp for reproducible archive entries
ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


# ============================================================================
# Runtime Constants
# ============================================================================

DEFAULT_CALL_DEPTH_LIMIT = 10_000


# ============================================================================
# CLI Exit Codes
# ============================================================================

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_ENVIRONMENT = 3


# ============================================================================
# Display Constants
# ============================================================================

SEPARATOR_WIDTH = 60


# ============================================================================
# Logging Constants
# ============================================================================

LOG_FILE_MAX_BYTES = 10 * 1024 * 1024  # 10MB per log file
LOG_FILE_BACKUP_COUNT = 5
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
