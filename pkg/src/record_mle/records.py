"""Lower record values: extraction, direct simulation and densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .family import FamilyMember, check_support, check_theta

__all__ = [
    "RecordSequence",
    "extract_lower_records",
    "simulate_lower_records",
    "simulate_record_statistics",
    "record_joint_logdensity",
    "last_record_logdensity",
]


@dataclass(frozen=True)
class RecordSequence:
    """Lower records ``R'_1 > R'_2 > ... > R'_m`` and their 1-based record times.

    ``source_n`` is the length of the sequence the records came from.  It is
    ``None`` for directly simulated records, whose times ``1..m`` are
    placeholders rather than observed record times.
    """

    values: tuple[float, ...]
    times: tuple[int, ...]
    source_n: int | None = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        times = tuple(int(t) for t in self.times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)
        if not values:
            raise ValueError("a record sequence needs at least one record")
        if len(values) != len(times):
            raise ValueError("values and times must have equal length")
        if any(not math.isfinite(v) for v in values):
            raise ValueError("record values must be finite")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValueError("lower record values must be strictly decreasing")
        if times[0] != 1 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("record times must start at 1 and strictly increase")
        if self.source_n is not None and (self.source_n < len(values) or self.source_n < times[-1]):
            raise ValueError("source_n is smaller than the record count or last record time")

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def last(self) -> float:
        return self.values[-1]

    @property
    def synthetic_times(self) -> bool:
        return self.source_n is None

    def observed_times(self) -> tuple[int, ...]:
        """Record times, refusing the placeholders of simulated sequences."""
        if self.synthetic_times:
            raise ValueError("record times of a directly simulated sequence are not observed")
        return self.times


def extract_lower_records(sequence: Sequence[float]) -> RecordSequence:
    """Return the elements strictly smaller than everything before them.

    Ties do not create a new record.

    >>> extract_lower_records([5, 3, 4, 2, 2, 1]).times
    (1, 2, 4, 6)
    """
    data = [float(v) for v in sequence]
    if not data:
        raise ValueError("cannot extract records from an empty sequence")
    values = [data[0]]
    times = [1]
    current = data[0]
    for idx, v in enumerate(data[1:], start=2):
        if v < current:
            current = v
            values.append(v)
            times.append(idx)
    return RecordSequence(tuple(values), tuple(times), source_n=len(data))


def simulate_record_statistics(
    member: FamilyMember, theta: float, m: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``size`` independent vectors ``A(R'_1), ..., A(R'_m)``.

    Row ``k`` holds partial sums of ``m`` i.i.d. exponentials with rate ``B(theta)``.
    """
    rate = float(member.B(check_theta(member, theta)))
    gaps = rng.standard_exponential(size=(size, m)) / rate
    return np.cumsum(gaps, axis=1)


def simulate_lower_records(member: FamilyMember, theta: float, m: int, seed=None) -> RecordSequence:
    """Simulate the first ``m`` lower records directly, in O(m).

    ``A(R'_i)`` is built as the i-th partial sum of exponential gaps with rate
    ``B(theta)`` and mapped back through ``A_inv``.  Times are placeholders.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"record count must be a positive integer, got {m}")
    rng = np.random.default_rng(seed)
    stats = simulate_record_statistics(member, theta, int(m), 1, rng)[0]
    values = np.asarray(member.A_inv(stats), dtype=float)
    return RecordSequence(tuple(values), tuple(range(1, int(m) + 1)), source_n=None)


def _record_values(rec) -> np.ndarray:
    if isinstance(rec, RecordSequence):
        return np.asarray(rec.values, dtype=float)
    values = np.asarray(rec, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("record values must be a non-empty 1-d sequence")
    if np.any(np.diff(values) >= 0):
        raise ValueError("lower record values must be strictly decreasing")
    return values


def record_joint_logdensity(member: FamilyMember, theta: float, rec) -> float:
    """Log joint density of the first m lower records.

    ``m ln B(theta) + sum ln(-A'(r_i)) - B(theta) A(r_m)``
    """
    theta = check_theta(member, theta)
    values = check_support(member, _record_values(rec))
    b = float(member.B(theta))
    m = values.size
    return float(m * math.log(b) + np.sum(np.log(-member.A_prime(values))) - b * member.A(values[-1]))


def last_record_logdensity(member: FamilyMember, theta: float, m: int, r) -> float | np.ndarray:
    """Log density of the m-th lower record at ``r``.

    ``A(R'_m)`` is Gamma(m, rate B(theta)); this is that law pushed through
    ``A_inv`` with Jacobian ``-A'(r)``.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"record index must be a positive integer, got {m}")
    theta = check_theta(member, theta)
    arr = check_support(member, r)
    b = float(member.B(theta))
    a = member.A(arr)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.log(-member.A_prime(arr)) + m * math.log(b) - b * a - gammaln(m)
        if m > 1:
            out = out + (m - 1) * np.log(a)
    out = np.where(np.isinf(a), -np.inf, out)
    return float(out) if np.ndim(r) == 0 else out
