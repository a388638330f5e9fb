"""Configuration model for COMODI."""

import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, Field, ValidationError

from comodi.core.errors import ConfigurationError
from comodi.utils.constants import (
    COMPILE_TIMEOUT_SECONDS,
    DEFAULT_CALL_DEPTH_LIMIT,
    DEFAULT_CONFIG_FILE,
    DEFAULT_FUEL,
    LOCAL_REPO_SUBDIR,
    get_base_dir,
)
from comodi.utils.storage_helpers import CorruptedFileError, atomic_write_text, safe_xml_load
from comodi.utils.xml_helpers import to_xml_text

logger = logging.getLogger("comodi.config")


class RepositoryConfig(BaseModel):
    """Remote repository endpoint and local cache location."""

    endpoint: str = ""
    local_dir: str = ""


class CompilerConfig(BaseModel):
    """Compilation service configuration."""

    # Template with {sources} and {output} placeholders
    command: str = ""
    platform: str = "linux-x86_64"
    timeout_seconds: int = COMPILE_TIMEOUT_SECONDS
    remote_endpoint: str = ""


class EngineConfig(BaseModel):
    """Parser and runtime limits."""

    fuel: int = DEFAULT_FUEL
    call_depth_limit: int = DEFAULT_CALL_DEPTH_LIMIT


class LoggingConfig(BaseModel):
    level: str = "INFO"


class Config(BaseModel):
    """Main configuration model."""

    repository: RepositoryConfig = Field(default_factory=RepositoryConfig)
    compiler: CompilerConfig = Field(default_factory=CompilerConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    def local_repo_dir(self, base_dir: Optional[Path] = None) -> Path:
        """Local component repository directory, defaulting under the base dir."""
        if self.repository.local_dir:
            return Path(self.repository.local_dir).expanduser()
        return get_base_dir(base_dir) / LOCAL_REPO_SUBDIR


def config_to_xml(config: Config) -> str:
    """Render a config as ``<comodi><section key="value"/>...</comodi>``."""
    root = ET.Element("comodi")
    for section, values in config.model_dump().items():
        ET.SubElement(root, section, {key: str(value) for key, value in values.items()})
    return to_xml_text(root)


def config_from_xml(root: ET.Element) -> Config:
    """Build a config from its XML form; unknown sections are ignored."""
    data: dict[str, dict[str, Any]] = {}
    for section in root:
        if section.tag in Config.model_fields:
            data[section.tag] = dict(section.attrib)
    try:
        return Config.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid configuration: {e}") from e


class ConfigStorage:
    """Configuration file storage."""

    def __init__(self, base_dir: Optional[Path] = None):
        self.base_dir = get_base_dir(base_dir)
        self.config_file = self.base_dir / DEFAULT_CONFIG_FILE

    def load(self) -> Config:
        """Load configuration from file, falling back to defaults."""
        try:
            root = safe_xml_load(self.config_file)
        except CorruptedFileError:
            logger.warning(f"Using default configuration, {self.config_file} is corrupted")
            return Config()
        if root is None:
            return Config()
        return config_from_xml(root)

    def save(self, config: Config) -> None:
        self.base_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(self.config_file, config_to_xml(config))
        logger.info(f"Saved configuration to {self.config_file}")

    def update(self, **kwargs: Any) -> Config:
        """Update specific configuration values.

        Keys are dotted paths such as ``compiler.command``.

        Raises:
            ConfigurationError: unknown key or invalid value
        """
        config = self.load()
        config_dict = config.model_dump()

        for key, value in kwargs.items():
            parts = key.split(".")
            target = config_dict
            for part in parts[:-1]:
                if part not in target or not isinstance(target[part], dict):
                    raise ConfigurationError(f"unknown configuration key: {key}")
                target = target[part]
            if parts[-1] not in target:
                raise ConfigurationError(f"unknown configuration key: {key}")
            target[parts[-1]] = value

        try:
            config = Config.model_validate(config_dict)
        except ValidationError as e:
            raise ConfigurationError(f"invalid configuration: {e}") from e
        self.save(config)
        return config
