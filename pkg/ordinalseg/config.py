from collections.abc import Mapping
from pathlib import Path
from typing import Any, Optional, Union

from .exceptions import ConfigValidationError, OrdSegException

CONFIG_SUFFIXES = (".toml", ".json", ".yaml", ".yml")


class ExperimentConfigFile:
    """
    An experiment description in a toml, json or yaml file. Options are read from
    a ``[tool.ordseg]`` table when the file has one, so they can live in a
    pyproject.toml, otherwise from the top level of the file.
    """

    path: Path
    _content: Optional[Mapping[str, Any]] = None

    def __init__(self, path: Union[Path, str]):
        self.path = Path(path)

    @property
    def is_pyproject(self) -> bool:
        return self.path.name == "pyproject.toml"

    def load(self, force: bool = False) -> Mapping[str, Any]:
        if force or self._content is None:
            if self.path.suffix not in CONFIG_SUFFIXES:
                raise ConfigValidationError(
                    f"Unsupported config file type {self.path.suffix!r}, expected "
                    + ", ".join(CONFIG_SUFFIXES),
                    filename=str(self.path),
                )
            content = self._read_config_file(self.path)
            if not isinstance(content, Mapping):
                raise ConfigValidationError(
                    "Expected a table of options at the top level",
                    filename=str(self.path),
                )
            table = content.get("tool", {}).get("ordseg")
            if table is None:
                table = content.get("tool.ordseg")
            if table is None and self.is_pyproject:
                raise ConfigValidationError(
                    "No [tool.ordseg] table found", filename=str(self.path)
                )
            self._content = content if table is None else table
        assert self._content is not None
        return self._content

    @staticmethod
    def _read_config_file(path: Path) -> Mapping[str, Any]:
        try:
            if path.suffix == ".json":
                import json

                try:
                    with path.open("rb") as file:
                        return json.load(file)
                except json.decoder.JSONDecodeError as error:
                    raise ConfigValidationError(
                        f"Couldn't parse json file from {path}",
                        error,
                        filename=str(path),
                    ) from error

            elif path.suffix in (".yaml", ".yml"):
                import yaml

                try:
                    with path.open("rb") as file:
                        return yaml.safe_load(file) or {}
                except yaml.YAMLError as error:
                    raise ConfigValidationError(
                        f"Couldn't parse yaml file from {path}",
                        error,
                        filename=str(path),
                    ) from error

            else:
                try:
                    import tomllib as tomli
                except ImportError:
                    import tomli  # type: ignore[no-redef]

                try:
                    with path.open("rb") as file:
                        return tomli.load(file)
                except tomli.TOMLDecodeError as error:
                    raise ConfigValidationError(
                        f"Couldn't parse toml file at {path}",
                        error,
                        filename=str(path),
                    ) from error

        except OrdSegException:
            raise
        except Exception as error:
            raise ConfigValidationError(
                f"Couldn't open file at {path}", filename=str(path)
            ) from error
