"""Bundled example programs."""

from importlib import resources

from ..kernel import Program
from ..syntax import SourceProgram, parse_program


def names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".flp"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.flp").read_text()


def load(name: str) -> Program:
    return parse_program(SourceProgram(source(name), f"{name}.flp"))
