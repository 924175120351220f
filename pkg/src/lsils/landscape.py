"""Exhaustive landscape analysis for small instances.

Solutions are indexed little-endian: bit i of index s is x_i. Local-optima
enumeration walks all 2^n solutions in reflected-binary Gray-code order
(one flip per step, O(n) incremental gain update), stores every objective
value, then compares each solution against its n neighbors. Histograms use
a bilinear block split of the matrix instead, which computes the same 2^n
values in a handful of dense operations.

Everything here is guarded to n <= ENUMERATION_GUARD since work and memory
grow as 2^n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubo import GainCache, UbqpInstance
from .smoothing import SmoothedObjective, ToyKind, ToyMatrix, construct_toy

ENUMERATION_GUARD = 25
HISTOGRAM_QUANTUM_DECIMALS = 9


def _check_guard(n: int) -> None:
    if n > ENUMERATION_GUARD:
        raise ValueError(
            f"n={n} exceeds the exhaustive-enumeration guard of "
            f"{ENUMERATION_GUARD} (2^{n} solutions); sample or reduce n")
    if n < 1:
        raise ValueError("n must be >= 1")


def solution_from_index(s: int, n: int) -> np.ndarray:
    """Little-endian decode: bit i of s becomes x_i."""
    return np.array([(s >> i) & 1 for i in range(n)], dtype=np.int8)


def _component_forms(objective) -> tuple[list, np.ndarray | None]:
    """(integer quadratic forms, combination weights or None)."""
    if isinstance(objective, SmoothedObjective):
        weights = np.array([1.0 - objective.lam, objective.lam * objective.alpha])
        return [objective.instance, objective.toy], weights
    return [objective], None


def gray_flip_sequence(n: int) -> np.ndarray:
    """Flipped-bit index per Gray-code step: trailing zeros of t for t=1..2^n-1."""
    total = (1 << n) - 1
    out = np.empty(total, dtype=np.uint8)
    chunk = 1 << 20
    for start in range(0, total, chunk):
        t = np.arange(start + 1, min(start + chunk, total) + 1, dtype=np.int64)
        out[start:start + t.size] = np.bitwise_count((t & -t) - 1).astype(np.uint8)
    return out


def enumerate_values(objective) -> list[np.ndarray]:
    """Exact objective values of every solution, indexed by solution integer.

    Returns one int64 array per component form (one for a plain objective,
    original plus toy for a smoothed one), each filled by a Gray-code walk
    with O(n) incremental evaluation per step.
    """
    forms, _ = _component_forms(objective)
    n = forms[0].n
    _check_guard(n)
    flips = gray_flip_sequence(n)
    start = np.zeros(n, dtype=np.int8)
    caches = [GainCache.build(form, start) for form in forms]
    outs = [np.zeros(1 << n, dtype=np.int64) for _ in forms]
    values = [0 for _ in forms]
    index = 0
    for step in range(flips.size):
        k = int(flips[step])
        index ^= 1 << k
        for f, cache in enumerate(caches):
            values[f] += int(cache.gains[k])
            cache.apply_flip(k)
            outs[f][index] = values[f]
    return outs


def _combine(component_values: list[np.ndarray], weights) -> np.ndarray:
    if weights is None:
        return component_values[0]
    return weights[0] * component_values[0] + weights[1] * component_values[1]


def _local_optima_mask(values: np.ndarray, n: int) -> np.ndarray:
    """Boolean mask over solution indices: no strictly improving one-bit flip."""
    cube = values.reshape((2,) * n)
    mask = np.ones_like(cube, dtype=bool)
    for axis in range(n):
        # Flipping one axis of the value hypercube toggles one solution bit.
        mask &= np.flip(cube, axis=axis) <= cube
    return mask.reshape(values.size)


def enumerate_local_optima(objective, cap: int = 1000):
    """(count, solutions) of all one-bit-flip local optima of the objective.

    The solution list is retained only when count <= cap. Works for plain
    instances, toys, and smoothed objectives (n <= ENUMERATION_GUARD).
    """
    forms, weights = _component_forms(objective)
    n = forms[0].n
    _check_guard(n)
    values = _combine(enumerate_values(objective), weights)
    mask = _local_optima_mask(values, n)
    count = int(mask.sum())
    if count > cap:
        return count, []
    indices = np.flatnonzero(mask)
    return count, [solution_from_index(int(s), n) for s in indices]


def _bit_table(bits: int) -> np.ndarray:
    """All binary vectors of the given length, row r = little-endian bits of r."""
    rows = np.arange(1 << bits, dtype=np.int64)
    return ((rows[:, None] >> np.arange(bits)) & 1).astype(np.int64)


def all_values_blocked(dense: np.ndarray) -> np.ndarray:
    """Exact values of x^T Q x for all solutions via a bilinear block split.

    With x = (u, w) split at h = n // 2, f(x) = u^T A u + w^T B w + 2 u^T C w;
    the three terms come from small dense products instead of 2^n walks.
    Output index s has low bits u, high bits w (same order as enumerate_values).
    """
    n = dense.shape[0]
    _check_guard(n)
    h = n // 2
    lows = _bit_table(h)
    highs = _bit_table(n - h)
    a, b, c = dense[:h, :h], dense[h:, h:], dense[:h, h:]
    fa = ((lows @ a) * lows).sum(axis=1)
    fb = ((highs @ b) * highs).sum(axis=1)
    cross = (lows @ c) @ highs.T
    return (fb[None, :] + fa[:, None] + 2 * cross).T.reshape(-1)


def _dense_of(form) -> np.ndarray:
    return form.q if isinstance(form, UbqpInstance) else form.materialize()


def value_histogram(objective) -> dict:
    """Exact count of every objective value over all 2^n solutions.

    Integer keys for plain objectives; smoothed values are quantized to
    1e-9 absolute before counting.
    """
    forms, weights = _component_forms(objective)
    n = forms[0].n
    _check_guard(n)
    values = _combine([all_values_blocked(_dense_of(f)) for f in forms], weights)
    if weights is not None:
        values = np.round(values, HISTOGRAM_QUANTUM_DECIMALS)
        keys, counts = np.unique(values, return_counts=True)
        return {float(k): int(c) for k, c in zip(keys, counts)}
    keys, counts = np.unique(values, return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, counts)}


def collision_probability(histogram: dict) -> float:
    """Probability two independent uniform solutions share an objective value.

    Sum over values of (count / 2^n)^2; larger means a flatter landscape.
    """
    counts = np.fromiter(histogram.values(), dtype=np.float64)
    if counts.size == 0:
        raise ValueError("empty histogram")
    p = counts / counts.sum()
    return float(p @ p)


@dataclass
class LandscapeReport:
    """Exhaustive census of one objective's landscape."""

    n: int
    objective: str
    local_optima_count: int
    local_optima: list
    histogram: dict
    collision_probability: float


def describe_objective(objective) -> str:
    if isinstance(objective, SmoothedObjective):
        return (f"smoothed(toy={objective.toy.kind.value}, "
                f"lam={objective.lam:g}, alpha={objective.alpha:g})")
    if isinstance(objective, ToyMatrix):
        return f"toy({objective.kind.value})"
    return "original"


def analyze(objective, cap: int = 1000) -> LandscapeReport:
    """Full landscape report: optima census, histogram, collision probability."""
    count, optima = enumerate_local_optima(objective, cap=cap)
    histogram = value_histogram(objective)
    n = objective.n
    return LandscapeReport(
        n=n,
        objective=describe_objective(objective),
        local_optima_count=count,
        local_optima=optima,
        histogram=histogram,
        collision_probability=collision_probability(histogram),
    )


def lambda_sweep(inst: UbqpInstance, toy_kind: ToyKind, anchor, alpha: float,
                 lambda_grid, toy_seed: int = 0) -> list[tuple[float, int]]:
    """Local-optima count of the smoothed objective for each grid value."""
    toy = construct_toy(toy_kind, anchor, seed=toy_seed)
    curve = []
    for lam in lambda_grid:
        g = SmoothedObjective(instance=inst, toy=toy, lam=float(lam), alpha=alpha)
        count, _ = enumerate_local_optima(g)
        curve.append((float(lam), count))
    return curve


def report_text(report: LandscapeReport) -> str:
    """Line-oriented rendering of a report."""
    lines = [
        f"n {report.n}",
        f"objective {report.objective}",
        f"local_optima_count {report.local_optima_count}",
        f"distinct_values {len(report.histogram)}",
        f"collision_probability {report.collision_probability:.9f}",
    ]
    lo = min(report.histogram)
    hi = max(report.histogram)
    lines.append(f"value_range {lo:g} {hi:g}")
    for x in report.local_optima:
        lines.append("local_optimum " + "".join(str(int(b)) for b in x))
    return "\n".join(lines) + "\n"


def histogram_csv(histogram: dict) -> str:
    """`value,count` rows sorted by value."""
    lines = ["value,count"]
    for v in sorted(histogram):
        lines.append(f"{v:g},{histogram[v]}" if isinstance(v, float)
                     else f"{v},{histogram[v]}")
    return "\n".join(lines) + "\n"


def sweep_csv(curve) -> str:
    """`lambda,count` rows in grid order."""
    lines = ["lambda,count"]
    for lam, count in curve:
        lines.append(f"{lam:g},{count}")
    return "\n".join(lines) + "\n"
