"""Bundled example programs and machine specs used by tests and docs."""

from __future__ import annotations

from importlib import resources

from ..parser import SourceFile, parse

SAFE_FIXTURES = (
    "add.tier",
    "mul.tier",
    "intro_sync.tier",
    "intro_zero.tier",
    "zrange.tier",
    "zrange2.tier",
    "shuffle.tier",
    "binary_add.tier",
    "spin.tier",
)

REJECTED_FIXTURES = (
    "exp.tier",
    "badd.tier",
    "unsafe_loop.tier",
    "unsafe_subword.tier",
)

MACHINE_FIXTURES = (
    "binary_inc.tm",
    "identity.tm",
    "busy.tm",
)


def fixture_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text()


def load_source(name: str) -> SourceFile:
    return parse(fixture_text(name))
