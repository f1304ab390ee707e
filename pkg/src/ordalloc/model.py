"""Problem parameters, result containers and error types shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIMPLEX_ATOL = 1e-10

MOMENT_KINDS = ("raw-joint", "covariance", "correlation")
METHODS = ("EWP", "SWP", "rule-of-thumb", "mean-variance", "min-variance")


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class ConvergenceError(RuntimeError):
    """A series or iteration did not reach its tolerance within the cap."""

    def __init__(self, message, partial_sum=None, terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


@dataclass(frozen=True)
class ModelParams:
    """One allocation problem.

    ``a`` is the absolute maximum output per alternative; it already absorbs
    the budget scaling ``a = a' * c0**(1 - nu)``, so ``c0`` is carried for
    reporting only.
    """

    n: int
    nu: float
    a: float = 1.0
    b: float = 0.0
    c0: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"nu must lie in [0, 1], got {self.nu!r}")
        if not self.a > 0:
            raise DomainError(f"a must be positive, got {self.a!r}")
        if not self.b >= 0:
            raise DomainError(f"b must be non-negative, got {self.b!r}")
        if not self.c0 > 0:
            raise DomainError(f"c0 must be positive, got {self.c0!r}")

    @classmethod
    def from_base_scale(cls, n, nu, a_base, c0, b=0.0):
        """Build params from the unscaled constant ``a'`` and budget ``c0``."""
        return cls(n=n, nu=nu, a=a_base * c0 ** (1.0 - nu), b=b, c0=c0)


@dataclass(frozen=True)
class MomentMatrix:
    m: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in MOMENT_KINDS:
            raise ValueError(f"unknown moment-matrix kind {self.kind!r}")
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"moment matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "m", m)

    @property
    def n(self):
        return self.m.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.m)


@dataclass(frozen=True)
class AllocationReport:
    weights: np.ndarray
    expected_output: float
    variance: float
    utility: float
    method: str
    params: ModelParams
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def as_dict(self):
        return {
            "method": self.method,
            "weights": [float(w) for w in self.weights],
            "expected_output": float(self.expected_output),
            "variance": float(self.variance),
            "utility": float(self.utility),
            "n": self.params.n,
            "nu": self.params.nu,
            "a": self.params.a,
            "b": self.params.b,
            "c0": self.params.c0,
        }


def check_weights(w, n=None, floor=0.0, atol=SIMPLEX_ATOL):
    """Validate a weight vector against the long-only budget simplex.

    Returns the weights as a float array; raises :class:`DomainError`.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DomainError("weights must be a non-empty 1-d vector")
    if n is not None and w.size != n:
        raise DomainError(f"expected {n} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    if np.any(w < floor - atol):
        raise DomainError(f"weights must be >= {floor}")
    if abs(w.sum() - 1.0) > atol:
        raise DomainError(f"weights must sum to 1, got {w.sum()!r}")
    return w
