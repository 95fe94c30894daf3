"""Python front end for the jetgeom core; reports come back as dicts."""

import json

from . import _core
from ._core import JetgeomError, model_algebra, parse_expression

__version__ = _core.__version__


def run(*args):
    """Runs the command line. Returns (exit_code, verdict, report)."""
    code, verdict, report = _core.run_command([str(a) for a in args])
    return code, verdict, json.loads(report) if report else None


def invariants(problem, point="", order=4, transversal=""):
    return json.loads(_core.invariants(problem, point, order, transversal))


def regularity(problem, point=""):
    return json.loads(_core.regularity(problem, point))


def canonical_bundle(problem, point="", order=1, cartan=True, fiber_cap=-1):
    return json.loads(_core.canonical_bundle(problem, point, order, cartan, fiber_cap))


def schwarzian_check(problem, point, f):
    return json.loads(_core.schwarzian_check(problem, point, f))


__all__ = [
    "JetgeomError",
    "canonical_bundle",
    "invariants",
    "model_algebra",
    "parse_expression",
    "regularity",
    "run",
    "schwarzian_check",
]
