"""Resource caps for symbolic computations.

Expression swell is the failure mode of exact elimination chains, so every
constructive operation checks its inputs/outputs against the active limits
and raises ResourceLimit instead of thrashing.  The term cap can be raised
from the environment via DELTA_REDUCE_MAX_TERMS.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace

DEFAULT_MAX_ORDER = 12
DEFAULT_MAX_DEGREE = 20
DEFAULT_MAX_TERMS = 10**6

ENV_MAX_TERMS = "DELTA_REDUCE_MAX_TERMS"


@dataclass(frozen=True)
class Limits:
    max_order: int = DEFAULT_MAX_ORDER
    max_degree: int = DEFAULT_MAX_DEGREE
    max_terms: int = DEFAULT_MAX_TERMS


def _default_limits() -> Limits:
    limits = Limits()
    raw = os.environ.get(ENV_MAX_TERMS)
    if raw:
        limits = replace(limits, max_terms=int(raw))
    return limits


_active: ContextVar[Limits] = ContextVar("delta_reduce_limits")


def active_limits() -> Limits:
    try:
        return _active.get()
    except LookupError:
        limits = _default_limits()
        _active.set(limits)
        return limits


@contextmanager
def limits(**overrides):
    """Temporarily override caps, e.g. ``with limits(max_degree=40): ...``."""
    token = _active.set(replace(active_limits(), **overrides))
    try:
        yield _active.get()
    finally:
        _active.reset(token)
