"""Prefix integrals of psi^2 by binary segmentation of the cut index."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .estimation import QueryLedger, derive_seed, estimate_amplitude
from .memory import GoodSet, QuantumMemory

MAX_SEGMENT_EPS = 0.49


class ValidityWarning(UserWarning):
    """An error target sits outside the regime the cost bound covers."""


@dataclass(frozen=True)
class Segment:
    p: int
    W: int
    q_hat: float

    def to_dict(self) -> dict:
        return {"p": self.p, "W": self.W, "q_hat": self.q_hat}


@dataclass(frozen=True)
class PrefixEstimate:
    X: int
    x_hat: float
    psi_hat_value: float
    segments: tuple = ()
    eps_psi_target: float = 0.0
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def to_dict(self) -> dict:
        return {
            "X": self.X,
            "x_hat": self.x_hat,
            "psi_hat_value": self.psi_hat_value,
            "segments": [s.to_dict() for s in self.segments],
            "eps_psi_target": self.eps_psi_target,
            "ledger": self.ledger.to_dict(),
        }


def binary_decompose(X: int, n: int) -> list[int]:
    """Set bit positions of ``X``, most significant first.

    ``X == 2**n`` is the whole register and comes back as ``[n]``.
    """
    if not 0 <= X <= (1 << n):
        raise ValueError(f"cut index {X} outside [0, {1 << n}]")
    if X == 1 << n:
        return [n]
    return [p for p in range(n - 1, -1, -1) if (X >> p) & 1]


def prefix_error_budget(eps_psi: float, n: int, max_psi: float) -> float:
    """Per-segment amplitude precision that keeps the summed error near ``eps_psi``."""
    if eps_psi > n * max_psi * max_psi:
        warnings.warn(
            f"eps_psi={eps_psi:g} exceeds n*max_psi^2={n * max_psi * max_psi:g}; cost bound does not apply",
            ValidityWarning,
            stacklevel=2,
        )
    return eps_psi / (n * max_psi)


def estimate_prefix_integral(
    mem: QuantumMemory,
    X: int,
    eps_psi: float,
    mode: str = "exact",
    seed: int = 0,
    max_psi: float | None = None,
    grid_values=None,
    shots: int | None = None,
) -> PrefixEstimate:
    """Estimate ``(1/N) * sum_{j<X} psi(x_j)^2`` one dyadic window at a time.

    ``max_psi`` defaults to the largest sampled value, recovered from the
    memory's own amplitudes when ``grid_values`` is not given. Window ``i``
    uses the seed stream ``(seed, i)``. With ``a_psi < 1`` the per-segment
    precision is tightened by ``a_psi`` and the squared estimates are divided
    by ``a_psi**2``.
    """
    n = mem.n
    if eps_psi <= 0:
        raise ValueError("eps_psi must be positive")
    bits = binary_decompose(X, n)
    x_hat = 2.0 * X / mem.size - 1.0
    if not bits:
        return PrefixEstimate(X, x_hat, 0.0, (), eps_psi, QueryLedger())
    if max_psi is None:
        max_psi = _max_sample(mem, grid_values)
    eps = prefix_error_budget(eps_psi, n, max_psi) * mem.a_psi
    if eps >= 0.5:
        warnings.warn(f"per-segment precision {eps:g} capped at {MAX_SEGMENT_EPS}", ValidityWarning, stacklevel=2)
        eps = MAX_SEGMENT_EPS
    kw = {} if shots is None else {"shots": shots}

    W = 0
    segments = []
    ledger = QueryLedger()
    squares = []
    for i, p in enumerate(bits):
        good = GoodSet(W, p)
        assert good.stop <= mem.size, "window overflow"
        est = estimate_amplitude(mem, good, eps, mode, derive_seed(seed, i), **kw)
        segments.append(Segment(p, W, est.q_hat))
        squares.append(est.q_hat * est.q_hat)
        ledger = ledger + est.ledger
        W += 1 << p
    a2 = mem.a_psi * mem.a_psi
    return PrefixEstimate(X, x_hat, math.fsum(squares) / a2, tuple(segments), eps_psi, ledger)


def exact_prefix(mem: QuantumMemory, X: int) -> float:
    """Brute-force prefix probability over ``[0, X)`` with the sub-normalization divided out."""
    head = mem.amplitudes_good[:X]
    return math.fsum((head.real**2 + head.imag**2).tolist()) / (mem.a_psi * mem.a_psi)


def _max_sample(mem: QuantumMemory, grid_values) -> float:
    if grid_values is not None:
        return float(max(grid_values))
    # amplitudes are a_psi * psi_j / sqrt(N) and N is close to 2^(n-1)
    return float(abs(mem.amplitudes_good).max() * math.sqrt(mem.size / 2) / mem.a_psi)
