"""End-to-end extraction runs, parameter sweeps and self-verification."""

from __future__ import annotations

import contextlib
import csv
import dataclasses
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import chebyshev as cheb
from . import functions as fm
from .estimation import MODES, DEFAULT_SHOTS, QueryLedger, apply_grover, derive_seed
from .memory import GoodSet, prefix_probability, prepare
from .prefix import estimate_prefix_integral, exact_prefix

EVAL_POINTS = 2048
MIN_QUBITS = 4
EPS_PSI_SAFETY = 10.0


class ExtractionError(RuntimeError):
    """A pipeline stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class ExtractionConfig:
    function: str = "cosine-bump"
    n: int = 12
    a_psi: float = 1.0
    eps_total: float = 0.01
    eps_psi: Optional[float] = None
    eps_cheb: Optional[float] = None
    mode: str = "exact"
    seed: int = 0
    M: Optional[int] = None
    lam: Optional[float] = None
    k_max: int = 8
    shots: int = DEFAULT_SHOTS

    def __post_init__(self):
        if not self.eps_total > 0:
            raise ValueError("eps_total must be positive")
        if not MIN_QUBITS <= self.n <= fm.MAX_QUBITS:
            raise ValueError(f"n must lie in [{MIN_QUBITS}, {fm.MAX_QUBITS}]")
        if not 0.0 < self.a_psi <= 1.0:
            raise ValueError("a_psi must lie in (0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.eps_psi is not None and not self.eps_psi > 0:
            raise ValueError("eps_psi must be positive")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ExtractionReport:
    config: dict
    function: dict
    node_set: dict
    prefix_estimates: list
    coefficients: list
    condition: float
    metrics: dict
    ledger: dict
    predicted_cost: float
    eps_psi: float
    eps_cheb: float
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return dumps(self.to_dict())


# serialization

def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    if v == int(v) and abs(v) < 1e16:
        return repr(float(v))
    return format(v, ".17g")


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float written to 17 significant digits."""
    out = io.StringIO()

    def emit(o, depth):
        pad = " " * (indent * (depth + 1))
        end = " " * (indent * depth)
        if isinstance(o, dict):
            if not o:
                out.write("{}")
                return
            out.write("{\n")
            for i, (k, v) in enumerate(o.items()):
                out.write(f'{pad}"{k}": ')
                emit(v, depth + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.write("[]")
                return
            out.write("[\n")
            for i, v in enumerate(o):
                out.write(pad)
                emit(v, depth + 1)
                out.write(",\n" if i < len(o) - 1 else "\n")
            out.write(end + "]")
        elif isinstance(o, (bool, np.bool_)):
            out.write("true" if o else "false")
        elif o is None:
            out.write("null")
        elif isinstance(o, (int, np.integer)):
            out.write(str(int(o)))
        elif isinstance(o, (float, np.floating)):
            out.write(_fmt_float(float(o)))
        elif isinstance(o, str):
            out.write(json.dumps(o))
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    out.write("\n")
    return out.getvalue()


# cost model

def predicted_cost(cfg: ExtractionConfig, lam: float, min_psi: float, max_psi: float) -> float:
    """(1/a_psi) * lambda^2 * n^2 * max_psi / (eps_total * min_psi), constant one."""
    return (1.0 / cfg.a_psi) * lam * lam * cfg.n * cfg.n * max_psi / (cfg.eps_total * min_psi)


def default_eps_psi(eps_total: float, min_psi: float, M: int) -> float:
    return eps_total * min_psi / (EPS_PSI_SAFETY * M * M)


def eval_grid(n: int, points: int = EVAL_POINTS) -> tuple[np.ndarray, float]:
    guard = 2.0 / (1 << n)
    return np.linspace(-1.0 + guard, 1.0 - guard, points), guard


def _err(a, b) -> dict:
    d = np.abs(np.asarray(a) - np.asarray(b))
    return {"sup": float(d.max()), "l2": float(math.sqrt(np.mean(d * d)))}


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except ExtractionError:
        raise
    except Exception as exc:
        raise ExtractionError(name, exc) from exc


def prepare_function(cfg: ExtractionConfig) -> fm.FunctionModel:
    f = fm.normalize(fm.resolve(cfg.function))
    return fm.with_lambda(f, cfg.lam, cfg.k_max)


def extract(cfg: ExtractionConfig) -> ExtractionReport:
    """Run the full readout for ``cfg`` and score it against the classical oracles."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        with _stage("function"):
            f = prepare_function(cfg)
        with _stage("memory"):
            grid = fm.sample_grid(f, cfg.n)
            mem = prepare(grid, cfg.a_psi)
            max_sample = float(grid.values.max())
        with _stage("nodes"):
            eps_cheb = cfg.eps_cheb or cfg.eps_psi or cfg.eps_total
            M = cfg.M if cfg.M is not None else cheb.choose_M(f.lam, min(eps_cheb, 0.5))
            nodes = cheb.make_node_set(M, cfg.n)
        eps_psi = cfg.eps_psi if cfg.eps_psi is not None else default_eps_psi(cfg.eps_total, f.min_psi, M)
        with _stage("prefix"):
            estimates = [
                estimate_prefix_integral(
                    mem, int(X), eps_psi, cfg.mode, derive_seed(cfg.seed, k),
                    max_psi=max_sample, shots=cfg.shots,
                )
                for k, X in enumerate(nodes.mock_indices)
            ]
        with _stage("solve"):
            samples = np.array([e.psi_hat_value for e in estimates])
            interp = cheb.interpolate(nodes.mock_nodes, samples, M, nodes)
        with _stage("recover"):
            sq = cheb.differentiate_interpolant(interp)
            psi_t = cheb.sqrt_recover(sq)
            x, guard = eval_grid(cfg.n)
            psi_hat = psi_t(x)
        with _stage("metrics"):
            truth = f(x)
            metrics = {
                "psi": _err(psi_hat, truth),
                "psi_sq": _err(sq(x), truth * truth),
                "cumulative": _err(interp(x), fm.integral_oracle(f, x)),
                "eval_points": len(x),
                "guard_band": guard,
            }
    ledger = sum((e.ledger for e in estimates), QueryLedger())
    messages = []
    for w in caught:
        text = f"{w.category.__name__}: {w.message}"
        if text not in messages:
            messages.append(text)
    return ExtractionReport(
        config=cfg.to_dict(),
        function={
            "name": f.name,
            "provenance": f.provenance,
            "lambda": f.lam,
            "min_psi": f.min_psi,
            "max_psi": f.max_psi,
            "scale": f.scale,
            "norm_sq": grid.norm_sq,
        },
        node_set=nodes.to_dict(),
        prefix_estimates=[e.to_dict() for e in estimates],
        coefficients=interp.coeffs.tolist(),
        condition=interp.condition,
        metrics=metrics,
        ledger=ledger.to_dict(),
        predicted_cost=predicted_cost(cfg, f.lam, f.min_psi, f.max_psi),
        eps_psi=eps_psi,
        eps_cheb=eps_cheb,
        warnings=messages,
    )


# sweeps

SWEEP_AXES = ("n", "eps_total", "eps_psi", "M", "a_psi", "mode")
SWEEP_HEADER = ["axis", "value", "sup_error", "l2_error", "prep_queries", "predicted_cost", "M", "warnings", "error"]
_AXIS_FIELD = {"n": "n", "eps_total": "eps_total", "eps_psi": "eps_psi", "M": "M", "a_psi": "a_psi", "mode": "mode"}


def parse_axis_value(axis: str, raw: str):
    if axis in ("n", "M"):
        return int(raw)
    if axis == "mode":
        return raw
    return float(raw)


def sweep(cfg: ExtractionConfig, axis: str, values) -> list[dict]:
    """One extraction per value, seed ``derive_seed(cfg.seed, i)`` for run ``i``.

    A failing run yields a row with the ``error`` column filled in.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    rows = []
    for i, value in enumerate(values):
        row = dict.fromkeys(SWEEP_HEADER, "")
        row.update(axis=axis, value=value)
        try:
            run = dataclasses.replace(cfg, **{_AXIS_FIELD[axis]: value, "seed": derive_seed(cfg.seed, i)})
            rep = extract(run)
        except (ExtractionError, ValueError) as exc:
            row["error"] = str(exc)
        else:
            row.update(
                sup_error=rep.metrics["psi"]["sup"],
                l2_error=rep.metrics["psi"]["l2"],
                prep_queries=rep.ledger["prep_queries"],
                predicted_cost=rep.predicted_cost,
                M=rep.node_set["M"],
                warnings=len(rep.warnings),
            )
        rows.append(row)
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (_fmt_float(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# verification

@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _suite_orthonormality(tamper: float) -> SuiteResult:
    worst = 0.0
    for M in range(1, 65):
        V = cheb.build_vandermonde(cheb.chebyshev_nodes(M), M, tamper)
        worst = max(worst, float(np.abs(V.T @ V - np.eye(M)).max()))
    return SuiteResult("orthonormality", worst <= 1e-12, worst, 1e-12, "max |V^T V - I|, M = 1..64")


def _suite_segmentation(f: fm.FunctionModel) -> SuiteResult:
    worst = 0.0
    for model in (fm.normalize(fm.constant()), f):
        mem = prepare(fm.sample_grid(model, 8), 1.0)
        for X in range(257):
            est = estimate_prefix_integral(mem, X, 0.01, "exact")
            worst = max(worst, abs(est.psi_hat_value - exact_prefix(mem, X)))
    return SuiteResult("segmentation", worst <= 1e-13, worst, 1e-13, "n = 8, X = 0..256, exact mode")


def _suite_grover(f: fm.FunctionModel, n: int) -> SuiteResult:
    mem = prepare(fm.sample_grid(f, n), 1.0)
    size = 1 << n
    worst = 0.0
    for good in (GoodSet(0, n - 1), GoodSet(size // 4, n - 3), GoodSet(size - 1, 0)):
        theta = math.asin(math.sqrt(prefix_probability(mem, good)))
        for reps in range(6):
            p = prefix_probability(apply_grover(mem, good, reps), good)
            worst = max(worst, abs(p - math.sin((2 * reps + 1) * theta) ** 2))
    return SuiteResult("grover-subspace", worst <= 1e-10, worst, 1e-10, f"n = {n}, reps 0..5")


def _suite_derivative(f: fm.FunctionModel, seed: int) -> SuiteResult:
    M = 16
    nodes = cheb.chebyshev_nodes(M)
    interp = cheb.interpolate(nodes, fm.integral_oracle(f, nodes), M)
    x = np.random.default_rng(seed).uniform(-0.99, 0.99, 50)
    h = 1e-4
    fd = (interp(x + h) - interp(x - h)) / (2 * h)
    worst = float(np.abs(interp.derivative(x) - fd).max())
    return SuiteResult("derivative-fd", worst <= 1e-6, worst, 1e-6, "50 points, h = 1e-4, M = 16")


def _suite_conditioning(tamper: float) -> list[SuiteResult]:
    worst = 0.0
    for M in range(1, 65):
        worst = max(worst, abs(np.linalg.cond(cheb.build_vandermonde(cheb.chebyshev_nodes(M), M, tamper)) - 1.0))
    M, n = 16, 12
    ns = cheb.make_node_set(M, n)
    V = cheb.build_vandermonde(ns.cheb_nodes, M, tamper)
    Vp = cheb.build_vandermonde(ns.mock_nodes, M, tamper)
    kappa = float(np.linalg.cond(Vp))
    gap = float(np.linalg.norm(V - Vp, 2))
    bound = 10 * M**2.5 / (1 << n)
    return [
        SuiteResult("condition-exact", worst <= 1e-10, worst, 1e-10, "|cond(V) - 1|, M = 1..64"),
        SuiteResult("condition-snapped", kappa <= 1.5, kappa, 1.5, "cond(V_pert), M = 16, n = 12"),
        SuiteResult("perturbation-norm", gap <= bound, gap, bound, "|V - V_pert|_2 vs 10 M^2.5 / 2^n"),
    ]


def verify(cfg: ExtractionConfig = ExtractionConfig(), tamper: float = 1.0) -> list[SuiteResult]:
    """Run the invariant suites; ``tamper`` rescales the basis to prove the checks can fail."""
    f = prepare_function(cfg)
    results = [
        _suite_orthonormality(tamper),
        _suite_segmentation(f),
        _suite_grover(f, min(cfg.n, 10)),
        _suite_derivative(f, cfg.seed),
    ]
    results.extend(_suite_conditioning(tamper))
    return results


def format_results(results) -> str:
    lines = [f"{'suite':<20} {'result':<6} {'measured':>12} {'threshold':>12}  detail"]
    for r in results:
        lines.append(
            f"{r.name:<20} {'PASS' if r.passed else 'FAIL':<6} {r.measured:>12.3e} {r.threshold:>12.3e}  {r.detail}"
        )
    return "\n".join(lines)
