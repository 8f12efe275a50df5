"""Target functions psi(x) on [-1, 1] and their classical ground truth."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import quadrature
from .expr import compile_expr

CHECK_POINTS = 10_000
MAX_QUBITS = 24
NORM_TOL = 1e-10


class DomainError(ValueError):
    """psi is non-positive or non-finite somewhere on [-1, 1]."""


@dataclass(frozen=True)
class FunctionModel:
    name: str
    evaluator: Callable = field(repr=False)
    lam: Optional[float]
    min_psi: float
    max_psi: float
    provenance: str  # builtin | parsed-expression | tabulated
    scale: float = 1.0
    # closed-form integral of psi^2 from -1, in the model's own (scaled) units
    cumulative: Optional[Callable] = field(default=None, repr=False)
    # integrand kinks, used to seed quadrature panels (tabulated models)
    breakpoints: Optional[np.ndarray] = field(default=None, repr=False)
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluator(x)

    def square(self, x):
        v = self.evaluator(x)
        return v * v


@dataclass(frozen=True)
class GridFunction:
    n: int
    values: np.ndarray = field(repr=False)
    norm_sq: float

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.n)


def grid_points(n: int) -> np.ndarray:
    """x_j = 2 j / 2^n - 1 for j in [0, 2^n); +1 itself is not a grid point."""
    return 2.0 * np.arange(1 << n) / (1 << n) - 1.0


def check_grid() -> np.ndarray:
    return np.linspace(-1.0, 1.0, CHECK_POINTS)


def _range_on_check_grid(evaluator, name: str) -> tuple[float, float]:
    v = np.asarray(evaluator(check_grid()), dtype=float)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name}: non-finite values on [-1, 1]")
    if np.any(v <= 0):
        at = check_grid()[np.argmin(v)]
        raise DomainError(f"{name}: psi must be strictly positive, got {v.min():.6g} at x={at:.6g}")
    return float(v.min()), float(v.max())


def from_callable(name, evaluator, provenance="builtin", lam=None, cumulative=None, params=None) -> FunctionModel:
    lo, hi = _range_on_check_grid(evaluator, name)
    return FunctionModel(name, evaluator, lam, lo, hi, provenance, cumulative=cumulative, params=params or {})


def parse_function_expr(src: str) -> FunctionModel:
    """Unnormalized model for an arithmetic expression in ``x``."""
    f = compile_expr(src)
    return from_callable(src.strip(), f, provenance="parsed-expression")


# built-in catalog

def constant() -> FunctionModel:
    c = 1.0 / math.sqrt(2.0)
    return from_callable(
        "constant",
        lambda x: np.full_like(np.asarray(x, dtype=float), c) if np.ndim(x) else c,
        cumulative=lambda x: 0.5 * (np.asarray(x, dtype=float) + 1.0),
    )


def cosine_bump(a: float = 0.5) -> FunctionModel:
    """psi(x) = sqrt((1 + a cos(pi x)) / 2), already normalized."""
    if not 0.0 < a < 1.0:
        raise ValueError("cosine bump amplitude must lie in (0, 1)")

    def psi(x):
        return np.sqrt((1.0 + a * np.cos(np.pi * np.asarray(x, dtype=float))) / 2.0)

    def big_psi(x):
        x = np.asarray(x, dtype=float)
        return (x + 1.0) / 2.0 + a * np.sin(np.pi * x) / (2.0 * np.pi)

    return from_callable(f"cosine-bump:{a:g}", psi, cumulative=big_psi, params={"a": a})


def gaussian(alpha: float = 4.0) -> FunctionModel:
    """exp(-alpha x^2), unnormalized; pass through :func:`normalize`."""
    if alpha <= 0:
        raise ValueError("gaussian width parameter must be positive")
    return from_callable(
        f"gaussian:{alpha:g}",
        lambda x: np.exp(-alpha * np.asarray(x, dtype=float) ** 2),
        params={"alpha": alpha},
    )


CATALOG = {"constant": constant, "cosine-bump": cosine_bump, "gaussian": gaussian}


def builtin(spec: str) -> FunctionModel:
    """``name`` or ``name:param``, e.g. ``cosine-bump:0.3``."""
    name, _, arg = spec.partition(":")
    if name not in CATALOG:
        raise KeyError(f"unknown builtin function {name!r}; choose from {sorted(CATALOG)}")
    if arg:
        if name == "constant":
            raise ValueError("constant takes no parameter")
        return CATALOG[name](float(arg))
    return CATALOG[name]()


def tabulated(values, lam: float, name: str = "tabulated") -> FunctionModel:
    """Model from samples on the 2^n grid; piecewise-linear between samples."""
    values = np.asarray(values, dtype=float)
    size = len(values)
    if size < 2 or size & (size - 1):
        raise ValueError(f"tabulated input needs 2^n values, got {size}")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise DomainError(f"{name}: tabulated values must be finite and positive")
    if lam is None or lam < 0:
        raise ValueError("tabulated input requires a non-negative lambda")
    xs = grid_points(int(math.log2(size)))

    def psi(x):
        return np.interp(x, xs, values)

    lo, hi = _range_on_check_grid(psi, name)
    return FunctionModel(name, psi, float(lam), lo, hi, "tabulated", breakpoints=xs,
                         params={"n": int(math.log2(size))})


def load_function_file(path) -> FunctionModel:
    """Read a function definition file.

    Format: ``#`` starts a comment. An optional ``lambda = <float>`` header.
    Then either one ``expr = <expression>`` line, or a ``values`` line followed
    by 2^n whitespace-separated numbers (tabulated mode, lambda required).
    """
    lam = None
    expr = None
    values: list[float] = []
    in_values = False
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if in_values:
            values.extend(float(tok) for tok in line.split())
            continue
        key, sep, rest = line.partition("=")
        key = key.strip().lower()
        if sep and key == "lambda":
            lam = float(rest)
        elif sep and key == "expr":
            expr = rest.strip()
        elif line.lower() == "values":
            in_values = True
        else:
            raise ValueError(f"{path}: unrecognised line {raw!r}")
    if expr is not None and values:
        raise ValueError(f"{path}: give either expr or values, not both")
    if expr is not None:
        model = parse_function_expr(expr)
        return dataclasses.replace(model, lam=lam) if lam is not None else model
    if values:
        return tabulated(values, lam, name=Path(path).stem)
    raise ValueError(f"{path}: no expr or values found")


def resolve(spec: str) -> FunctionModel:
    """CLI-style function spec: ``<builtin>``, ``expr:<expression>`` or ``file:<path>``."""
    if spec.startswith("expr:"):
        return parse_function_expr(spec[5:])
    if spec.startswith("file:"):
        return load_function_file(spec[5:])
    return builtin(spec)


def squared_integral(f: FunctionModel, tol: float = quadrature.DEFAULT_TOL) -> float:
    return quadrature.integrate(f.square, -1.0, 1.0, tol=tol, breakpoints=f.breakpoints)


def normalize(f: FunctionModel) -> FunctionModel:
    """Rescale so that the integral of psi^2 over [-1, 1] is one.

    The applied factor is folded into ``scale``. A closed-form cumulative
    integral, if present, is rescaled with it.
    """
    total = squared_integral(f)
    if not total > 0:
        raise DomainError(f"{f.name}: squared integral is {total}")
    s = 1.0 / math.sqrt(total)
    if abs(s - 1.0) <= 1e-15:
        return f
    base = f.evaluator
    cum = f.cumulative

    def scaled(x):
        return s * base(x)

    scaled_cum = None if cum is None else (lambda x: (s * s) * cum(x))
    return dataclasses.replace(
        f,
        evaluator=scaled,
        min_psi=s * f.min_psi,
        max_psi=s * f.max_psi,
        scale=f.scale * s,
        cumulative=scaled_cum,
    )


def integral_oracle(f: FunctionModel, x):
    """Psi(x) = integral of psi^2 from -1 to x, by adaptive quadrature.

    Accepts a scalar or an array; array inputs share one panel sweep.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1.0) or np.any(arr > 1.0):
        raise ValueError("x must lie in [-1, 1]")
    out = quadrature.cumulative(f.square, arr, a=-1.0, breakpoints=f.breakpoints)
    return float(out) if arr.ndim == 0 else out


def sample_grid(f: FunctionModel, n: int) -> GridFunction:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {n!r}")
    values = np.asarray(f.evaluator(grid_points(n)), dtype=float)
    return GridFunction(int(n), values, math.fsum(values * values))


# derivative-growth bound

_FD_STEP = 0.05


def _central_difference(f, x: np.ndarray, order: int, h: float) -> np.ndarray:
    k = np.arange(order + 1)
    offsets = (k - order / 2.0) * h
    coef = np.array([(-1) ** (order - i) * comb(order, i) for i in k], dtype=float)
    return (f(x[:, None] + offsets[None, :]) @ coef) / h**order


def derivative(f, x, order: int, h: float = _FD_STEP) -> np.ndarray:
    """``order``-th derivative by central differences plus one Richardson step."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if order == 0:
        return np.asarray(f(x), dtype=float)
    coarse = _central_difference(f, x, order, h)
    fine = _central_difference(f, x, order, h / 2)
    return (4.0 * fine - coarse) / 3.0


def estimate_lambda(f: FunctionModel, k_max: int = 8, points: int = 4096) -> float:
    """max over j <= k_max and x of |psi^(j)(x)|^(1/(j+1)).

    Derivative estimates under the finite-difference roundoff floor count as
    zero. The evaluator must be defined slightly beyond [-1, 1] (stencils
    reach out by ``k_max * step / 2``).
    """
    if not 0 <= k_max <= 8:
        raise ValueError("k_max must be in [0, 8]")
    if f.provenance == "tabulated":
        raise ValueError("tabulated models carry a user-supplied lambda; nothing to estimate")
    x = np.linspace(-1.0, 1.0, points)
    peak = float(np.max(np.abs(f.evaluator(x))))
    best = 0.0
    for j in range(k_max + 1):
        d = derivative(f.evaluator, x, j)
        if not np.all(np.isfinite(d)):
            raise DomainError(f"{f.name}: non-finite derivative of order {j}")
        m = float(np.max(np.abs(d)))
        if j > 0:
            floor = 100.0 * 2.0**j * np.finfo(float).eps * peak / (_FD_STEP / 2) ** j
            if m <= floor:
                m = 0.0
        best = max(best, m ** (1.0 / (j + 1)))
    return best


def with_lambda(f: FunctionModel, lam: Optional[float] = None, k_max: int = 8) -> FunctionModel:
    """Attach lambda: the user's value wins, else keep an existing one, else estimate."""
    if lam is not None:
        return dataclasses.replace(f, lam=float(lam))
    if f.lam is not None:
        return f
    return dataclasses.replace(f, lam=estimate_lambda(f, k_max))
