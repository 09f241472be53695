import os
import sys
from io import StringIO
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
import pytest

from ordinalseg.app import OrdSegApp
from ordinalseg.io import write_labels, write_tensor

try:
    import tomllib as tomli
except ImportError:
    import tomli  # type: ignore[no-redef]

PROJECT_ROOT = Path(__file__).resolve().parent.parent
PROJECT_TOML = PROJECT_ROOT.joinpath("pyproject.toml")


@pytest.fixture(scope="session")
def pyproject():
    with PROJECT_TOML.open("rb") as toml_file:
        return tomli.load(toml_file)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240611))


class RunResult(NamedTuple):
    code: int
    capture: str
    stdout: str
    stderr: str

    def __str__(self):
        return (
            "RunResult(\n"
            f"  code={self.code!r},\n"
            f"  capture=`{self.capture}`,\n"
            f"  stdout=`{self.stdout}`,\n"
            f"  stderr=`{self.stderr}`,\n"
            ")"
        )

    @property
    def lines(self) -> list[str]:
        return self.capture.splitlines()


@pytest.fixture
def run_ordseg(capsys, monkeypatch):
    def run_ordseg(
        *run_args: str,
        program_name: str = "ordseg",
        env: Optional[dict[str, str]] = None,
    ) -> RunResult:
        for key, value in (env or {}).items():
            monkeypatch.setenv(key, value)
        output_capture = StringIO()
        app = OrdSegApp(output=output_capture, program_name=program_name)
        result = app(run_args)
        output_capture.seek(0)
        run_result = RunResult(result, output_capture.read(), *capsys.readouterr())
        print(run_result)  # when a test fails this is usually useful to debug
        return run_result

    return run_ordseg


@pytest.fixture
def run_ordseg_main(capsys):
    def run_ordseg_main(*cli_args: str) -> RunResult:
        from ordinalseg import main

        sys.argv = ("ordseg", *cli_args)
        try:
            main()
            code = 0
        except SystemExit as exit_:
            code = int(exit_.code or 0)
        return RunResult(code, "", *capsys.readouterr())

    return run_ordseg_main


@pytest.fixture
def label_file(tmp_path):
    """Write a label map given as nested lists to a PGM file."""

    def label_file(values, k_classes: Optional[int] = None, name="labels.pgm"):
        path = tmp_path / name
        write_labels(path, np.asarray(values, dtype=np.int64), k_classes)
        return str(path)

    return label_file


@pytest.fixture
def tensor_file(tmp_path):
    def tensor_file(values, name="tensor.tensor"):
        path = tmp_path / name
        write_tensor(path, np.asarray(values, dtype=np.float64))
        return str(path)

    return tensor_file


@pytest.fixture
def in_tmp_dir(tmp_path):
    prev_cwd = os.getcwd()
    os.chdir(tmp_path)
    yield tmp_path
    os.chdir(prev_cwd)
