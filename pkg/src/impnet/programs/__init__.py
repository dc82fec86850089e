"""Bundled example programs with their topologies and initial bindings."""

from importlib import resources
from pathlib import Path

NAMES = ("program1", "program2", "program3")


def path(name: str, suffix: str = ".impnet") -> Path:
    """Filesystem path of a bundled file such as ``program1.net``."""
    return Path(str(resources.files(__name__).joinpath(name + suffix)))


def available(name: str, suffix: str) -> bool:
    return path(name, suffix).is_file()
