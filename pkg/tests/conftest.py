"""
Pytest configuration and fixtures for Conjnorm tests.

Provides common fixtures and test utilities across all test modules.
"""

import os
import shutil
import tempfile
from collections.abc import Generator
from pathlib import Path

import pytest
import yaml

from conjnorm.config import ConjnormConfig
from conjnorm.groups import FiniteGroup, named_group
from conjnorm.logging_config import setup_logging


@pytest.fixture(scope="session")
def test_logs_dir() -> Generator[str, None, None]:
    """
    Create temporary directory for test logs that persists for the session.

    Yields:
        Path to temporary logs directory
    """
    temp_dir = tempfile.mkdtemp(prefix="conjnorm_test_logs_")
    logs_dir = Path(temp_dir) / "logs"
    logs_dir.mkdir(parents=True)

    yield str(logs_dir)

    shutil.rmtree(temp_dir)


@pytest.fixture
def isolated_test_env(test_logs_dir: str) -> Generator[dict[str, str], None, None]:
    """
    Create isolated test environment with clean environment variables.

    Yields:
        Dictionary of original environment variables
    """
    original_env = os.environ.copy()

    for key in list(os.environ.keys()):
        if key.startswith("CONJNORM_"):
            del os.environ[key]

    os.environ["CONJNORM_LOG_DIR"] = test_logs_dir

    yield original_env

    os.environ.clear()
    os.environ.update(original_env)


@pytest.fixture
def test_config(isolated_test_env: dict[str, str]) -> ConjnormConfig:
    """Test configuration with small caps and debug logging."""
    return ConjnormConfig(
        log_level="DEBUG",
        verbose=True,
        log_dir=os.environ["CONJNORM_LOG_DIR"],
        max_group_order=5_000,
        max_ball_size=20_000,
    )


@pytest.fixture
def temp_workspace() -> Generator[Path, None, None]:
    """
    Create temporary workspace directory for input files.

    Yields:
        Path to temporary workspace
    """
    temp_dir = tempfile.mkdtemp(prefix="conjnorm_workspace_")
    workspace = Path(temp_dir)

    yield workspace

    shutil.rmtree(temp_dir)


@pytest.fixture
def test_logger(test_config: ConjnormConfig):
    """Configure logging for tests."""
    return setup_logging(
        log_dir=test_config.log_dir,
        verbose=test_config.verbose,
        log_level=test_config.log_level,
        enable_file_logging=False,
    )


# Group corpus


@pytest.fixture(scope="session")
def cyclic6() -> FiniteGroup:
    return named_group("cyclic", 6)


@pytest.fixture(scope="session")
def dihedral4() -> FiniteGroup:
    """Symmetries of the square, order 8."""
    return named_group("dihedral", 4)


@pytest.fixture(scope="session")
def s3() -> FiniteGroup:
    return named_group("symmetric", 3)


@pytest.fixture(scope="session")
def s4() -> FiniteGroup:
    return named_group("symmetric", 4)


@pytest.fixture(scope="session")
def group_corpus() -> list[FiniteGroup]:
    """Small groups of mixed structure for exhaustive property checks."""
    return [
        named_group("cyclic", 1),
        named_group("cyclic", 7),
        named_group("dihedral", 5),
        named_group("symmetric", 4),
        named_group("alternating", 4),
        named_group("abelian", 2, 4),
    ]


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "slow: marks tests as slow")


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add markers automatically."""
    for item in items:
        if any(keyword in item.nodeid for keyword in ["slow", "exhaustive"]):
            item.add_marker(pytest.mark.slow)


class TestHelper:
    """Helper class for common test operations."""

    @staticmethod
    def write_yaml(path: Path, document: dict) -> Path:
        """Write a YAML input document."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(document, sort_keys=False))
        return path

    @staticmethod
    def create_test_file(path: Path, content: str) -> Path:
        """Create a test file with given content."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
        return path


@pytest.fixture
def test_helper() -> TestHelper:
    """Provide test helper utilities."""
    return TestHelper()
