"""Maximum-likelihood estimation of theta, F and f from samples or lower records.

Both estimators solve ``B(theta) * T = size``: for an i.i.d. sample ``T`` is
``sum A(x_i)`` and ``size = n``; for records ``T = A(r'_m)`` and ``size = m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InversionError
from .family import FamilyMember, check_support, check_theta
from .records import RecordSequence

__all__ = [
    "EstimateResult",
    "EstimandTransform",
    "IDENTITY",
    "EXP",
    "transform_by_name",
    "invert_B",
    "theta_hat_from_statistic",
    "mle_theta_sample",
    "mle_theta_records",
    "plugin_cdf",
    "plugin_pdf",
    "sample_loglikelihood",
]


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: float
    statistic_T: float
    size: int
    kind: str  # "sample" or "records"
    member_name: str

    def as_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat,
            "statistic_T": self.statistic_T,
            "size": self.size,
            "kind": self.kind,
            "member_name": self.member_name,
        }


@dataclass(frozen=True)
class EstimandTransform:
    """A real function applied to theta before comparing estimates."""

    name: str
    apply: Callable[[np.ndarray], np.ndarray]


IDENTITY = EstimandTransform("identity", lambda t: np.asarray(t, dtype=float))
EXP = EstimandTransform("exp", lambda t: np.exp(np.asarray(t, dtype=float)))


def transform_by_name(name: str) -> EstimandTransform:
    if name == "identity":
        return IDENTITY
    if name == "exp":
        return EXP
    raise ValueError(f"unknown transform {name!r}; expected identity or exp")


def invert_B(member: FamilyMember, y: float) -> float:
    """Solve ``B(theta) = y`` for theta, raising :class:`InversionError` on failure."""
    if not (math.isfinite(y) and y > 0):
        raise InversionError(f"n/T = {y} is not a positive finite value")
    with np.errstate(all="ignore"):
        theta = float(member.B_inv(y))
    lo, hi = member.theta_domain
    if not (math.isfinite(theta) and lo < theta < hi):
        raise InversionError(f"n/T = {y} is outside the range of B for {member.label}")
    return theta


def theta_hat_from_statistic(member: FamilyMember, size: int, T: np.ndarray) -> np.ndarray:
    """Vectorised ``B_inv(size / T)``; entries that cannot be inverted become NaN."""
    T = np.asarray(T, dtype=float)
    with np.errstate(all="ignore"):
        y = size / T
        theta = np.asarray(member.B_inv(np.where((y > 0) & np.isfinite(y), y, np.nan)), dtype=float)
    lo, hi = member.theta_domain
    ok = np.isfinite(theta) & (theta > lo) & (theta < hi)
    return np.where(ok, theta, np.nan)


def mle_theta_sample(member: FamilyMember, xs: Sequence[float]) -> EstimateResult:
    """MLE of theta from an i.i.d. sample, ``B_inv(n / sum A(x_i))``."""
    arr = np.asarray(xs, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("cannot estimate from an empty sample")
    check_support(member, arr)
    T = math.fsum(np.asarray(member.A(arr), dtype=float))
    n = int(arr.size)
    theta = invert_B(member, n / T if T > 0 else math.inf)
    return EstimateResult(theta, T, n, "sample", member.label)


def mle_theta_records(member: FamilyMember, rec: RecordSequence | Sequence[float]) -> EstimateResult:
    """MLE of theta from the first m lower records, ``B_inv(m / A(r'_m))``.

    Only ``m`` and the last record enter the estimate.  A plain sequence is
    taken to be record values already and must be strictly decreasing.
    """
    if not isinstance(rec, RecordSequence):
        values = [float(v) for v in rec]
        rec = RecordSequence(tuple(values), tuple(range(1, len(values) + 1)))
    last = check_support(member, rec.last)
    T = float(member.A(last))
    theta = invert_B(member, rec.m / T if T > 0 else math.inf)
    return EstimateResult(theta, T, rec.m, "records", member.label)


def plugin_cdf(member: FamilyMember, est: EstimateResult, x):
    """``exp(-size * A(x) / T)``, i.e. the CDF evaluated at theta_hat."""
    arr = check_support(member, x)
    out = np.exp(-est.size * member.A(arr) / est.statistic_T)
    return float(out) if np.ndim(x) == 0 else out


def plugin_pdf(member: FamilyMember, est: EstimateResult, x):
    """``(-size * A'(x) / T) * exp(-size * A(x) / T)``."""
    arr = check_support(member, x)
    k = est.size / est.statistic_T
    out = -k * member.A_prime(arr) * np.exp(-k * member.A(arr))
    return float(out) if np.ndim(x) == 0 else out


def sample_loglikelihood(member: FamilyMember, theta: float, xs: Sequence[float]) -> float:
    """``n ln B(theta) + sum ln(-A'(x_i)) - B(theta) sum A(x_i)``."""
    theta = check_theta(member, theta)
    arr = check_support(member, np.asarray(xs, dtype=float).ravel())
    b = float(member.B(theta))
    return float(
        arr.size * math.log(b) + np.sum(np.log(-member.A_prime(arr))) - b * np.sum(member.A(arr))
    )

