"""Dense statevector model of the amplitude-encoded memory.

The full register is one ancilla qubit (most significant) over ``n`` data
qubits. The ancilla-0 branch carries ``a_psi * psi(x_j) / sqrt(N)``; the
ancilla-1 branch carries the leftover weight as a uniform junk state.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .functions import MAX_QUBITS, GridFunction


@dataclass(frozen=True)
class QuantumMemory:
    n: int
    a_psi: float
    amplitudes_good: np.ndarray = field(repr=False)
    amplitudes_bad: np.ndarray = field(repr=False)
    shift_offset: int = 0

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.amplitudes_good, self.amplitudes_bad])

    def norm_sq(self) -> float:
        return math.fsum(np.abs(self.state) ** 2)

    def with_state(self, state: np.ndarray) -> "QuantumMemory":
        n = self.size
        return dataclasses.replace(self, amplitudes_good=state[:n].copy(), amplitudes_bad=state[n:].copy())


@dataclass(frozen=True)
class GoodSet:
    """Index window ``[window_start, window_start + 2**window_log2)`` on the ancilla-0 branch."""

    window_start: int
    window_log2: int

    @property
    def length(self) -> int:
        return 1 << self.window_log2

    @property
    def stop(self) -> int:
        return self.window_start + self.length

    def check(self, n: int) -> None:
        if self.window_start < 0 or self.window_log2 < 0 or self.stop > (1 << n):
            raise ValueError(f"window [{self.window_start}, {self.stop}) outside [0, {1 << n})")


def prepare(grid: GridFunction, a_psi: float = 1.0) -> QuantumMemory:
    if not 0.0 < a_psi <= 1.0:
        raise ValueError(f"a_psi must lie in (0, 1], got {a_psi}")
    if grid.n > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} data qubits")
    size = grid.size
    good = (a_psi / math.sqrt(grid.norm_sq)) * grid.values.astype(complex)
    residual = max(1.0 - a_psi * a_psi, 0.0)
    bad = np.full(size, math.sqrt(residual / size), dtype=complex)
    return QuantumMemory(grid.n, float(a_psi), good, bad, 0)


def shift(mem: QuantumMemory, W: int) -> QuantumMemory:
    """Cyclic shift: new amplitude at k is the old one at (k + W) mod 2^n, on both branches."""
    if not 0 <= W < mem.size:
        raise ValueError(f"shift {W} outside [0, {mem.size})")
    return dataclasses.replace(
        mem,
        amplitudes_good=np.roll(mem.amplitudes_good, -W),
        amplitudes_bad=np.roll(mem.amplitudes_bad, -W),
        shift_offset=(mem.shift_offset + W) % mem.size,
    )


def good_positions(mem: QuantumMemory, good: GoodSet) -> np.ndarray:
    """Register positions (ancilla-0 branch) holding the window, which is given in unshifted indexing."""
    good.check(mem.n)
    return (good.window_start + np.arange(good.length) - mem.shift_offset) % mem.size


def good_mask(mem: QuantumMemory, good: GoodSet) -> np.ndarray:
    """Boolean mask over the full ``2 * 2^n`` register."""
    mask = np.zeros(2 * mem.size, dtype=bool)
    mask[good_positions(mem, good)] = True
    return mask


def register_probability(mem: QuantumMemory, start: int, stop: int) -> float:
    """Probability of ancilla 0 and data index in ``[start, stop)`` as the register currently stands."""
    if not 0 <= start <= stop <= mem.size:
        raise ValueError("register range out of bounds")
    seg = mem.amplitudes_good[start:stop]
    return math.fsum((seg.real * seg.real + seg.imag * seg.imag).tolist())


def prefix_probability(mem: QuantumMemory, good: GoodSet) -> float:
    """Exact probability of the good window (unshifted indexing)."""
    seg = mem.amplitudes_good[good_positions(mem, good)]
    return math.fsum((seg.real * seg.real + seg.imag * seg.imag).tolist())
