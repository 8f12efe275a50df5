"""Chebyshev interpolation of the prefix integral and recovery of psi.

Basis: ``u_0 = sqrt(1/M) T_0`` and ``u_j = sqrt(2/M) T_j`` for ``j >= 1``,
orthonormal over the ``M`` first-kind Chebyshev nodes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np


class NodeCollisionError(ValueError):
    pass


class IllConditionedError(np.linalg.LinAlgError):
    pass


class ClampWarning(UserWarning):
    """The squared approximant went below the clamp floor before the square root."""


MAX_CONDITION = 1e6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class NodeSet:
    M: int
    n: int
    cheb_nodes: np.ndarray = field(repr=False)
    mock_nodes: np.ndarray = field(repr=False)
    mock_indices: np.ndarray = field(repr=False)

    @property
    def snap_errors(self) -> np.ndarray:
        return np.abs(self.cheb_nodes - self.mock_nodes)

    @property
    def max_snap_error(self) -> float:
        return float(self.snap_errors.max())

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "n": self.n,
            "cheb_nodes": self.cheb_nodes.tolist(),
            "mock_nodes": self.mock_nodes.tolist(),
            "mock_indices": [int(i) for i in self.mock_indices],
            "snap_errors": self.snap_errors.tolist(),
            "max_snap_error": self.max_snap_error,
        }


def basis_scales(M: int, tamper: float = 1.0) -> np.ndarray:
    """``sqrt(1/M)`` for j = 0, ``sqrt(2/M)`` otherwise. ``tamper`` is a fault-injection hook."""
    s = np.full(M, math.sqrt(2.0 / M))
    s[0] = math.sqrt(1.0 / M)
    return s * tamper


def chebyshev_t(j, x) -> np.ndarray:
    """T_j(x) = cos(j arccos x), x clipped into [-1, 1]."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    return np.cos(np.multiply.outer(np.arccos(x), np.asarray(j, dtype=float)))


def chebyshev_u(j, x) -> np.ndarray:
    """U_j(x) = sin((j+1) t) / sin t with t = arccos x.

    At x = +-1 the closed-form limits (+-1)^j (j+1) are used. Returns shape
    ``x.shape + j.shape``.
    """
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    jj = np.atleast_1d(np.asarray(j, dtype=float))
    xf = np.atleast_1d(x)
    t = np.arccos(xf)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(np.multiply.outer(t, jj + 1.0)) / np.sin(t)[:, None]
    out[xf == 1.0] = jj + 1.0
    out[xf == -1.0] = (-1.0) ** jj * (jj + 1.0)
    return out.reshape(x.shape + np.shape(j))


def chebyshev_nodes(M: int) -> np.ndarray:
    k = np.arange(1, M + 1)
    return np.cos((2 * k - 1) * np.pi / (2 * M))


def choose_M(lam: float, eps_cheb: float) -> int:
    """ceil(e * lambda + 2 ln(1/eps_cheb)), at least 2."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if not 0.0 < eps_cheb < 1.0:
        raise ValueError("eps_cheb must lie in (0, 1)")
    bound = math.e * lam + 2.0 * math.log(1.0 / eps_cheb)
    # absorb rounding in e.g. log(exp(4)) so exact integers are not bumped
    return max(math.ceil(bound - 1e-9), 2)


def make_node_set(M: int, n: int) -> NodeSet:
    """Snap each Chebyshev node to the nearest grid point 2j/2^n - 1."""
    if M < 1:
        raise ValueError("M must be at least 1")
    size = 1 << n
    if size < 4 * M * M:
        warnings.warn(f"2^n = {size} < 4 M^2 = {4 * M * M}; snapped nodes may collide", stacklevel=2)
    cheb = chebyshev_nodes(M)
    idx = np.clip(np.floor((cheb + 1.0) * (size / 2) + 0.5).astype(np.int64), 0, size - 1)
    seen: dict[int, int] = {}
    for k, j in enumerate(idx):
        if int(j) in seen:
            a = seen[int(j)]
            raise NodeCollisionError(
                f"Chebyshev nodes {a + 1} ({cheb[a]:.6g}) and {k + 1} ({cheb[k]:.6g}) "
                f"both snap to grid index {int(j)} at n={n}"
            )
        seen[int(j)] = k
    mock = 2.0 * idx / size - 1.0
    return NodeSet(M, n, cheb, mock, idx)


def build_vandermonde(nodes, M: int, tamper: float = 1.0) -> np.ndarray:
    """Entry (k, j) = u_j(nodes[k])."""
    return chebyshev_t(np.arange(M), nodes) * basis_scales(M, tamper)[None, :]


def solve_coefficients(V: np.ndarray, f) -> np.ndarray:
    """Pivoted LU solve of ``V a = f`` with conditioning and residual checks."""
    f = np.asarray(f, dtype=float)
    cond = float(np.linalg.cond(V))
    if not cond <= MAX_CONDITION:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    a = np.linalg.solve(V, f)
    resid = float(np.linalg.norm(V @ a - f))
    scale = max(float(np.linalg.norm(f)), np.finfo(float).tiny)
    if resid > RESIDUAL_TOL * scale:
        raise IllConditionedError(f"residual {resid:.3g} exceeds {RESIDUAL_TOL:g} * |f| (cond {cond:.3g})")
    return a


@dataclass(frozen=True)
class ChebyshevInterpolant:
    M: int
    coeffs: np.ndarray
    node_set: NodeSet | None = None
    condition: float = 1.0
    tamper: float = 1.0

    @property
    def basis_scale(self) -> tuple[float, float]:
        return math.sqrt(1.0 / self.M), math.sqrt(2.0 / self.M)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return chebyshev_t(np.arange(self.M), x) @ (self.coeffs * basis_scales(self.M, self.tamper))

    def derivative(self, x):
        """sum_j a_j scale_j j U_{j-1}(x)."""
        x = np.asarray(x, dtype=float)
        if self.M < 2:
            return np.zeros_like(x)
        j = np.arange(1, self.M)
        w = self.coeffs[1:] * basis_scales(self.M, self.tamper)[1:] * j
        return chebyshev_u(j - 1, x) @ w


def interpolate(nodes, values, M: int | None = None, node_set: NodeSet | None = None) -> ChebyshevInterpolant:
    """Fit the M-term expansion through ``values`` at ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    M = len(nodes) if M is None else M
    V = build_vandermonde(nodes, M)
    coeffs = solve_coefficients(V, values)
    return ChebyshevInterpolant(M, coeffs, node_set, float(np.linalg.cond(V)))


def differentiate_interpolant(interp: ChebyshevInterpolant):
    """Callable approximant of the integrand (psi^2)."""
    return interp.derivative


def sqrt_recover(approx_sq, min_floor: float = 0.0):
    """x -> sqrt(max(approx_sq(x), min_floor)), warning whenever the floor bites."""

    def psi(x):
        v = np.asarray(approx_sq(x), dtype=float)
        low = v < min_floor
        if np.any(low):
            worst = float(v[low].min()) if v.ndim else float(v)
            warnings.warn(
                f"squared approximant clamped at {np.count_nonzero(low)} point(s); most negative value {worst:.3g}",
                ClampWarning,
                stacklevel=2,
            )
        return np.sqrt(np.maximum(v, min_floor))

    return psi
