from __future__ import annotations

import json
from pathlib import Path

import pytest

from mpiwrapgen.apispec import ApiSpec, load_api_spec, merge_api_specs
from mpiwrapgen.tasks import TaskConfig, load_config_with_library

FIXTURES = Path(__file__).parent / "fixtures"

DEFAULT_CONFIG = Path(__file__).parents[1] / "src" / "mpiwrapgen" / "data" / "task_config.json"


@pytest.fixture(scope="session")
def spec10() -> ApiSpec:
    return load_api_spec(FIXTURES / "mpi10_v41.json")


@pytest.fixture(scope="session")
def spec40() -> ApiSpec:
    return load_api_spec(FIXTURES / "mpi_v40.json")


@pytest.fixture(scope="session")
def supplement() -> ApiSpec:
    return load_api_spec(FIXTURES / "supplement.json")


@pytest.fixture(scope="session")
def merged(spec40, spec10, supplement) -> ApiSpec:
    return merge_api_specs([spec40, spec10], supplement)


@pytest.fixture(scope="session")
def spec50() -> ApiSpec:
    return load_api_spec(FIXTURES / "mpi50.json")


@pytest.fixture(scope="session")
def default_config10(spec10) -> TaskConfig:
    return load_config_with_library(DEFAULT_CONFIG, spec10)


@pytest.fixture(scope="session")
def default_config50(spec50) -> TaskConfig:
    return load_config_with_library(DEFAULT_CONFIG, spec50)


def make_doc(procedures: list[dict], version: str = "4.1") -> dict:
    return {"format_version": 1, "mpi_version": version, "procedures": procedures}


def write_doc(path: Path, procedures: list[dict], version: str = "4.1") -> Path:
    path.write_text(json.dumps(make_doc(procedures, version)), encoding="utf-8")
    return path
