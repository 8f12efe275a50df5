"""Amplitude estimation on the simulated memory, with query metering.

Three modes:

* ``exact``    - the true amplitude, one preparation charged.
* ``noisy``    - true amplitude plus seeded uniform noise in ``[-eps, eps]``.
* ``grover-ml`` - maximum-likelihood amplitude estimation over Grover powers
  ``0, 1, 2, 4, ..., 2**K`` with ``K = ceil(log2(c / eps))``; measurement
  counts are binomial draws from the exact statevector probabilities.

Random numbers come from numpy's PCG64 bit generator seeded with a 64-bit
integer; per-call seeds are derived from a master seed through
``numpy.random.SeedSequence`` so runs reproduce across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .memory import GoodSet, QuantumMemory, good_mask, prefix_probability

MODES = ("exact", "noisy", "grover-ml")
DEFAULT_SHOTS = 100
SCHEDULE_CONSTANT = 1.0
COARSE_GRID = 10_000
STAGE_GRID = 250
GOLDEN_TOL = 1e-10
BEAM = 3


@dataclass(frozen=True)
class QueryLedger:
    grover_applications: int = 0
    shots: int = 0

    @property
    def prep_queries(self) -> int:
        # one prepare + one un-prepare per Grover application, one prepare per shot
        return 2 * self.grover_applications + self.shots

    def __add__(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(self.grover_applications + other.grover_applications, self.shots + other.shots)

    def to_dict(self) -> dict:
        return {
            "prep_queries": self.prep_queries,
            "grover_applications": self.grover_applications,
            "shots": self.shots,
        }


@dataclass(frozen=True)
class AmplitudeEstimate:
    q_hat: float
    epsilon_target: float
    mode: str
    ledger: QueryLedger
    seed: int
    powers: tuple = ()
    hits: tuple = ()
    shots_per_power: int = 0
    theta_hat: float = field(default=float("nan"))


def derive_seed(master: int, *path: int) -> int:
    """Independent 64-bit seed for the stream ``(master, *path)``."""
    words = np.random.SeedSequence([int(master) & (2**64 - 1), *map(int, path)]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


# Grover operator

def _grover_step(state: np.ndarray, prepared: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # Q = -(I - 2|P><P|)(I - 2 Pi_good)
    out = state.copy()
    out[mask] = -out[mask]
    out -= 2.0 * np.vdot(prepared, out) * prepared
    return -out


def apply_grover(mem: QuantumMemory, good: GoodSet, reps: int) -> QuantumMemory:
    """Apply the Grover operator ``reps`` times to ``mem``, reflecting about ``mem``'s own state.

    The reflection about the prepared state is a rank-one update, so each
    application costs O(2^n).
    """
    if reps < 0:
        raise ValueError("reps must be non-negative")
    prepared = mem.state
    mask = good_mask(mem, good)
    state = prepared.copy()
    for _ in range(reps):
        state = _grover_step(state, prepared, mask)
    return mem.with_state(state)


def good_probability(mem: QuantumMemory, good: GoodSet) -> float:
    """Probability that a measurement lands in the good window (ancilla 0)."""
    return prefix_probability(mem, good)


def grover_subspace(mem: QuantumMemory, good: GoodSet) -> tuple[np.ndarray, float]:
    """Matrix of the Grover operator restricted to span{|good>, |bad>}.

    Obtained by applying one Grover step to the normalized good and bad parts
    of the prepared state. Returns ``(R, p)`` with ``p`` the good probability.
    """
    prepared = mem.state
    mask = good_mask(mem, good)
    p = float(np.clip(math.fsum(np.abs(prepared[mask]) ** 2), 0.0, 1.0))
    if p <= 0.0 or p >= 1.0:
        return np.eye(2), p
    g = np.where(mask, prepared, 0.0)
    b = prepared - g
    g /= np.linalg.norm(g)
    b /= np.linalg.norm(b)
    cols = []
    for v in (g, b):
        w = _grover_step(v, prepared, mask)
        cols.append([np.vdot(g, w).real, np.vdot(b, w).real])
    return np.array(cols).T, p


def power_probabilities(mem: QuantumMemory, good: GoodSet, powers) -> np.ndarray:
    """Good-window probability after ``Q**m`` for each ``m`` in ``powers``."""
    R, p = grover_subspace(mem, good)
    if p <= 0.0 or p >= 1.0:
        return np.full(len(powers), p)
    v = np.array([math.sqrt(p), math.sqrt(1.0 - p)])
    out = []
    for m in powers:
        w = np.linalg.matrix_power(R, int(m)) @ v
        out.append(min(max(w[0] * w[0], 0.0), 1.0))
    return np.array(out)


# maximum likelihood

def schedule(eps: float, c: float = SCHEDULE_CONSTANT) -> list[int]:
    K = max(math.ceil(math.log2(c / eps)), 0)
    return [0] + [1 << k for k in range(K + 1)]


def log_likelihood(theta, powers, hits, shots: int) -> np.ndarray:
    """Binomial log-likelihood of the hit counts, broadcast over ``theta``."""
    theta = np.asarray(theta, dtype=float)
    k = 2.0 * np.asarray(powers, dtype=float) + 1.0
    h = np.asarray(hits, dtype=float)
    s = np.sin(np.multiply.outer(theta, k)) ** 2
    return (xlogy(h, s) + xlogy(shots - h, 1.0 - s)).sum(axis=-1)


def _golden_max(fn, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _local_maxima(grid, ll, keep: int):
    interior = (ll[1:-1] >= ll[:-2]) & (ll[1:-1] >= ll[2:])
    idx = np.flatnonzero(interior) + 1
    ends = [i for i in (0, len(ll) - 1) if ll[i] >= ll[1 if i == 0 else i - 1]]
    idx = np.concatenate([idx, np.array(ends, dtype=int)])
    # stable sort on -ll keeps the smaller theta first among equal peaks
    order = idx[np.argsort(-ll[idx], kind="stable")] if idx.size else np.array([int(np.argmax(ll))])
    order = order[np.argsort(-ll[order], kind="stable")]
    return [(float(ll[i]), float(grid[i]), float(grid[1] - grid[0])) for i in order[:keep]]


def ml_theta(powers, hits, shots: int, beam: int = BEAM) -> float:
    """Maximum-likelihood Grover angle in ``[0, pi/2]``.

    A coarse grid over the whole range seeds the search from the identity
    power alone. Each further power is then resolved inside one alias
    period (``pi / (2m + 1)``) around each of the ``beam`` best peaks so
    far, scored by the likelihood of all powers seen. The winner is polished
    by golden-section search. Ties go to the smallest angle.
    """
    half_pi = math.pi / 2.0
    grid = np.linspace(0.0, half_pi, COARSE_GRID)
    peaks = _local_maxima(grid, log_likelihood(grid, powers[:1], hits[:1], shots), beam)
    for s in range(1, len(powers)):
        w = math.pi / (2 * powers[s] + 1)
        grids = np.array([
            np.linspace(max(theta - w, 0.0), min(theta + w, half_pi), STAGE_GRID) for _, theta, _ in peaks
        ])
        lls = log_likelihood(grids, powers[: s + 1], hits[: s + 1], shots)
        found = []
        for grid, ll in zip(grids, lls):
            found.extend(_local_maxima(grid, ll, beam))
        found.sort(key=lambda t: (-t[0], t[1]))
        peaks = []
        for cand in found:
            if all(abs(cand[1] - p[1]) > 2 * max(cand[2], p[2]) for p in peaks):
                peaks.append(cand)
            if len(peaks) == beam:
                break
    best_ll, theta, step = peaks[0]

    def fn(t):
        return float(log_likelihood(t, powers, hits, shots))

    polished = _golden_max(fn, max(theta - step, 0.0), min(theta + step, half_pi))
    return polished if fn(polished) >= best_ll else theta


def estimate_amplitude(
    mem: QuantumMemory,
    good: GoodSet,
    eps: float,
    mode: str = "exact",
    seed: int = 0,
    shots: int = DEFAULT_SHOTS,
    c: float = SCHEDULE_CONSTANT,
) -> AmplitudeEstimate:
    """Estimate ``q = sqrt(P(good window))`` to absolute precision ``eps``."""
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    q = math.sqrt(min(max(prefix_probability(mem, good), 0.0), 1.0))
    if mode == "exact":
        return AmplitudeEstimate(q, eps, mode, QueryLedger(0, 1), seed)
    rng = rng_for(seed)
    if mode == "noisy":
        q_hat = min(max(q + rng.uniform(-eps, eps), 0.0), 1.0)
        return AmplitudeEstimate(q_hat, eps, mode, QueryLedger(0, math.ceil(1.0 / eps)), seed)

    powers = schedule(eps, c)
    probs = power_probabilities(mem, good, powers)
    hits = tuple(int(rng.binomial(shots, p)) for p in probs)
    theta = ml_theta(powers, hits, shots)
    ledger = QueryLedger(shots * sum(powers), shots * len(powers))
    return AmplitudeEstimate(
        math.sin(theta), eps, mode, ledger, seed,
        powers=tuple(powers), hits=hits, shots_per_power=shots, theta_hat=theta,
    )
