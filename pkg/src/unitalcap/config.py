"""Run configuration and seeded random streams."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DimensionLimitError, ParameterError

DEFAULT_GUARD = 4096
ENV_PREFIX = "UNITALCAP_"


def derive_stream(master_seed: int, *task: int) -> np.random.Generator:
    """Random stream for one independent task.

    The stream depends only on ``(master_seed, task)``, so results do not
    depend on execution order or on how tasks are spread over workers.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(t) for t in task))
    return np.random.Generator(np.random.PCG64(ss))


def check_guard(size: int, guard: int | None = None, what: str = "dimension") -> None:
    limit = DEFAULT_GUARD if guard is None else guard
    if size > limit:
        raise DimensionLimitError(f"{what} {size} exceeds the dimension guard {limit}")


@dataclass(frozen=True)
class AscentOptions:
    """Knobs for the randomized 2-norm ascent."""

    restarts: int = 64
    max_iter: int = 500
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ParameterError("restarts and max_iter must be >= 1")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")


@dataclass(frozen=True)
class RunConfig:
    master_seed: int = 0
    dimension_guard: int = DEFAULT_GUARD
    restarts: int = 64
    max_iter: int = 500
    tol: float = 1e-12
    trials: int | None = None
    n: int = 1
    eps: float = 1.0
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.dimension_guard < 4:
            raise ParameterError("dimension_guard must be >= 4")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError("master_seed must be a 64-bit unsigned integer")

    def ascent(self, **overrides) -> AscentOptions:
        opts = AscentOptions(restarts=self.restarts, max_iter=self.max_iter,
                             tol=self.tol, seed=self.master_seed)
        return replace(opts, **overrides)

    @classmethod
    def from_env(cls, environ=None, **explicit) -> "RunConfig":
        """Build a config from ``UNITALCAP_*`` variables, then explicit values.

        Explicit keyword arguments that are ``None`` do not override.
        """
        environ = os.environ if environ is None else environ
        kwargs = {}
        for f in fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in environ:
                kwargs[f.name] = _coerce(f.type, environ[key])
        # short aliases matching the CLI flags
        for alias, name in (("SEED", "master_seed"), ("GUARD", "dimension_guard")):
            if ENV_PREFIX + alias in environ:
                kwargs[name] = _coerce(int, environ[ENV_PREFIX + alias])
        kwargs.update({k: v for k, v in explicit.items() if v is not None})
        return cls(**kwargs)


def _coerce(tp, raw: str):
    tp = str(tp)
    if "float" in tp:
        return float(raw)
    if "int" in tp:
        return int(raw, 0)
    return raw
