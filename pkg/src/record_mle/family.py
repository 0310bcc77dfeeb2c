"""Distributions with CDF ``F(x; theta) = exp(-B(theta) * A(x))``.

A member is fixed by a decreasing function ``A`` on an open support ``(a, b)``
with ``A(a+) = +inf`` and ``A(b-) = 0``, and a positive one-to-one ``B`` on an
open parameter interval.  Three members ship with the package:

=============  ============  =============  ===============
member         support       A(x)           B(theta)
=============  ============  =============  ===============
power          (0, 1)        -ln x          theta
gumbel         (-inf, inf)   exp(-x)        exp(theta)
frechet(a)     (0, inf)      x**(-a)        theta**a
=============  ============  =============  ===============

Custom members go through :func:`custom_member`, which validates them before
handing them out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import optimize

from .errors import DomainError, ParameterError, ValidationError

__all__ = [
    "FamilyMember",
    "ValidationReport",
    "power_function",
    "gumbel",
    "frechet",
    "get_member",
    "custom_member",
    "monotone_inverse",
    "cdf",
    "pdf",
    "quantile",
    "sample_iid",
    "validate_member",
    "check_support",
    "check_theta",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]

INVERSE_XTOL = 1e-12
INVERSE_MAXITER = 200


@dataclass(frozen=True)
class FamilyMember:
    """Immutable bundle of the functions defining one member of the family.

    ``A``, ``A_prime``, ``A_inv``, ``B`` and ``B_inv`` must accept numpy arrays.
    """

    name: str
    support: tuple[float, float]
    theta_domain: tuple[float, float]
    A: ArrayFn
    A_prime: ArrayFn
    A_inv: ArrayFn
    B: ArrayFn
    B_inv: ArrayFn
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"

    def __repr__(self) -> str:
        return f"FamilyMember({self.label})"


@dataclass
class ValidationReport:
    member: str
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


# ---------------------------------------------------------------------------
# built-in members
# ---------------------------------------------------------------------------

def _power_A(x):
    return -np.log(x)


def _power_A_prime(x):
    return -1.0 / np.asarray(x, dtype=float)


def _power_A_inv(s):
    return np.exp(-np.asarray(s, dtype=float))


def _identity(v):
    return np.asarray(v, dtype=float)


def power_function() -> FamilyMember:
    """Power-function distribution, ``F(x) = x**theta`` on (0, 1)."""
    return FamilyMember(
        name="power",
        support=(0.0, 1.0),
        theta_domain=(0.0, math.inf),
        A=_power_A,
        A_prime=_power_A_prime,
        A_inv=_power_A_inv,
        B=_identity,
        B_inv=_identity,
    )


def _gumbel_A(x):
    # overflow to inf far in the left tail is the correct limit
    with np.errstate(over="ignore"):
        return np.exp(-np.asarray(x, dtype=float))


def _gumbel_A_prime(x):
    with np.errstate(over="ignore"):
        return -np.exp(-np.asarray(x, dtype=float))


def _gumbel_A_inv(s):
    return -np.log(s)


def gumbel() -> FamilyMember:
    """Gumbel (maximum) distribution with location parameter theta."""
    return FamilyMember(
        name="gumbel",
        support=(-math.inf, math.inf),
        theta_domain=(-math.inf, math.inf),
        A=_gumbel_A,
        A_prime=_gumbel_A_prime,
        A_inv=_gumbel_A_inv,
        B=np.exp,
        B_inv=np.log,
    )


def frechet(alpha: float) -> FamilyMember:
    """Frechet distribution with fixed shape ``alpha`` and scale theta.

    ``F(x) = exp(-(theta / x)**alpha)`` for ``x > 0``.
    """
    alpha = float(alpha)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ParameterError(f"frechet shape alpha must be positive, got {alpha}")

    def A(x):
        return np.power(np.asarray(x, dtype=float), -alpha)

    def A_prime(x):
        return -alpha * np.power(np.asarray(x, dtype=float), -alpha - 1.0)

    def A_inv(s):
        return np.power(np.asarray(s, dtype=float), -1.0 / alpha)

    def B(theta):
        return np.power(np.asarray(theta, dtype=float), alpha)

    def B_inv(y):
        return np.power(np.asarray(y, dtype=float), 1.0 / alpha)

    return FamilyMember(
        name="frechet",
        support=(0.0, math.inf),
        theta_domain=(0.0, math.inf),
        A=A,
        A_prime=A_prime,
        A_inv=A_inv,
        B=B,
        B_inv=B_inv,
        params={"alpha": alpha},
    )


def get_member(name: str, alpha: float | None = None) -> FamilyMember:
    """Look up a built-in member by name (``power``, ``gumbel``, ``frechet``)."""
    key = name.strip().lower()
    if key in ("power", "power_function", "powerfunction"):
        member = power_function()
    elif key == "gumbel":
        member = gumbel()
    elif key == "frechet":
        if alpha is None:
            raise ParameterError("frechet requires a shape alpha")
        return frechet(alpha)
    else:
        raise ValueError(f"unknown family {name!r}; expected power, gumbel or frechet")
    if alpha is not None:
        raise ParameterError(f"alpha only applies to frechet, not {key}")
    return member


# ---------------------------------------------------------------------------
# numeric inverse for custom members
# ---------------------------------------------------------------------------

def _interior_point(lo: float, hi: float) -> float:
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


def _toward(x0: float, end: float, k: int) -> float:
    """k-th point of a sequence running from x0 to ``end`` (exclusive)."""
    if math.isinf(end):
        return x0 + math.copysign(2.0**k - 1.0, end)
    return end - (end - x0) * 2.0**-k


def monotone_inverse(func: ArrayFn, domain: tuple[float, float]) -> ArrayFn:
    """Invert a strictly monotone scalar function on an open interval.

    Brackets the root by walking toward the domain ends, then runs Brent's
    method with ``xtol=1e-12`` and at most 200 iterations.
    """
    lo, hi = domain
    x0 = _interior_point(lo, hi)

    def f(x: float) -> float:
        return float(func(np.asarray(x, dtype=float)))

    increasing = f(_toward(x0, hi, 1)) > f(x0)

    def solve(y: float) -> float:
        if not math.isfinite(y):
            raise DomainError(f"cannot invert non-finite value {y}")
        g = (lambda x: f(x) - y) if increasing else (lambda x: y - f(x))
        left = right = x0
        k = 0
        while g(left) > 0:
            k += 1
            if k > 1100:
                raise DomainError(f"value {y} is outside the range of the function")
            left = _toward(x0, lo, k)
        k = 0
        while g(right) < 0:
            k += 1
            if k > 1100:
                raise DomainError(f"value {y} is outside the range of the function")
            right = _toward(x0, hi, k)
        if left == right:
            return left
        return optimize.brentq(g, left, right, xtol=INVERSE_XTOL, maxiter=INVERSE_MAXITER)

    vsolve = np.vectorize(solve, otypes=[float])

    def inverse(y):
        out = vsolve(np.asarray(y, dtype=float))
        return out if out.ndim else float(out)

    return inverse


def custom_member(
    name: str,
    support: tuple[float, float],
    theta_domain: tuple[float, float],
    A: ArrayFn,
    A_prime: ArrayFn,
    B: ArrayFn,
    A_inv: ArrayFn | None = None,
    B_inv: ArrayFn | None = None,
    params: Mapping[str, float] | None = None,
    grid_size: int = 25,
) -> FamilyMember:
    """Build a user-defined member and validate it.

    Missing inverses are filled in with :func:`monotone_inverse`.

    Raises
    ------
    ValidationError
        If any numerical check in :func:`validate_member` fails.
    """
    member = FamilyMember(
        name=name,
        support=(float(support[0]), float(support[1])),
        theta_domain=(float(theta_domain[0]), float(theta_domain[1])),
        A=A,
        A_prime=A_prime,
        A_inv=A_inv if A_inv is not None else monotone_inverse(A, support),
        B=B,
        B_inv=B_inv if B_inv is not None else monotone_inverse(B, theta_domain),
        params=dict(params or {}),
    )
    report = validate_member(member, grid_size)
    if not report.ok:
        raise ValidationError(f"member {name!r} failed checks: {', '.join(report.failed())}")
    return member


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _scalar_or_array(values: np.ndarray, like) -> float | np.ndarray:
    return float(values) if np.ndim(like) == 0 else values


def check_support(member: FamilyMember, x) -> np.ndarray:
    """Return ``x`` as an array, raising :class:`DomainError` unless a < x < b."""
    arr = np.asarray(x, dtype=float)
    lo, hi = member.support
    bad = ~((arr > lo) & (arr < hi))
    if np.any(bad):
        first = arr[bad].flat[0] if arr.ndim else float(arr)
        raise DomainError(f"x={first} is outside the open support ({lo}, {hi}) of {member.label}")
    return arr


def check_theta(member: FamilyMember, theta: float) -> float:
    lo, hi = member.theta_domain
    theta = float(theta)
    if not (lo < theta < hi):
        raise ParameterError(f"theta={theta} is outside ({lo}, {hi}) for {member.label}")
    return theta


def cdf(member: FamilyMember, theta: float, x):
    """``exp(-B(theta) * A(x))``."""
    theta = check_theta(member, theta)
    arr = check_support(member, x)
    out = np.exp(-member.B(theta) * member.A(arr))
    return _scalar_or_array(out, x)


def pdf(member: FamilyMember, theta: float, x):
    """``-B(theta) * A'(x) * exp(-B(theta) * A(x))``."""
    theta = check_theta(member, theta)
    arr = check_support(member, x)
    b = member.B(theta)
    a = member.A(arr)
    with np.errstate(over="ignore", invalid="ignore"):
        out = -b * member.A_prime(arr) * np.exp(-b * a)
    # exp(-B A) wins over -A' as A -> inf
    out = np.where(np.isinf(b * a), 0.0, out)
    return _scalar_or_array(out, x)


def quantile(member: FamilyMember, theta: float, p):
    """Inverse CDF, ``A_inv(-ln(p) / B(theta))``."""
    theta = check_theta(member, theta)
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError(f"probabilities must lie in (0, 1), got {p}")
    out = member.A_inv(-np.log(arr) / member.B(theta))
    return _scalar_or_array(np.asarray(out, dtype=float), p)


def sample_iid(member: FamilyMember, theta: float, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` i.i.d. values by inverse-transform sampling.

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`,
    including an existing Generator.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n}")
    rng = np.random.default_rng(seed)
    # lower bound keeps p strictly inside (0, 1)
    u = rng.uniform(np.finfo(float).tiny, 1.0, size=int(n))
    return np.asarray(quantile(member, theta, u), dtype=float)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def _interior_grid(lo: float, hi: float, k: int) -> np.ndarray:
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * np.linspace(0.02, 0.98, k)
    if math.isfinite(lo):
        return lo + np.geomspace(1e-2, 1e2, k)
    if math.isfinite(hi):
        return hi - np.geomspace(1e2, 1e-2, k)
    return np.linspace(-5.0, 5.0, k)


def _approach(end: float, other: float) -> np.ndarray:
    """Interior points marching toward ``end``."""
    if math.isinf(end):
        return math.copysign(1.0, end) * 10.0 ** np.arange(0, 301, 10, dtype=float)
    width = min(1.0, abs(other - end) / 2.0) if math.isfinite(other) else 1.0
    direction = 1.0 if other > end else -1.0
    top = 300 if end == 0.0 else 15
    pts = end + direction * width * 10.0 ** -np.arange(1, top + 1, dtype=float)
    return pts[pts != end]


def _rel_close(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    scale = np.maximum(np.abs(a), np.abs(b))
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(scale, 1e-300)))


def validate_member(member: FamilyMember, grid_size: int = 25) -> ValidationReport:
    """Numerically check the structural requirements on ``A`` and ``B``.

    Failures are reported, never raised.  Checks: ``A`` strictly decreasing,
    ``A'`` negative and consistent with a central difference, boundary limits
    of ``A``, ``A_inv`` round trip, ``B`` positive and strictly monotone, and
    ``B_inv`` round trip.
    """
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    report = ValidationReport(member=member.label)
    lo, hi = member.support
    xs = _interior_grid(lo, hi, grid_size)
    tlo, thi = member.theta_domain
    thetas = _interior_grid(tlo, thi, grid_size)

    def run(name: str, check: Callable[[], bool]) -> None:
        try:
            with np.errstate(all="ignore"):
                report.checks[name] = bool(check())
        except Exception as exc:  # a crashing check is a failing check
            report.checks[name] = False
            report.details[name] = f"{type(exc).__name__}: {exc}"

    def a_values():
        return np.asarray(member.A(xs), dtype=float)

    run("A_decreasing", lambda: np.all(np.diff(a_values()) < 0))
    run("A_nonnegative", lambda: np.all(a_values() >= 0))

    def a_prime_check():
        return np.all(np.asarray(member.A_prime(xs), dtype=float) < 0)

    run("A_prime_negative", a_prime_check)

    def fd_check():
        h = 1e-6 * np.maximum(1.0, np.abs(xs))
        fd = (member.A(xs + h) - member.A(xs - h)) / (2 * h)
        return _rel_close(np.asarray(member.A_prime(xs), dtype=float), fd, 1e-6)

    run("A_prime_matches_difference", fd_check)

    def lower_limit():
        vals = np.asarray(member.A(_approach(lo, hi)), dtype=float)
        return np.all(vals[1:] >= vals[:-1]) and vals[-1] >= 30.0

    def upper_limit():
        vals = np.asarray(member.A(_approach(hi, lo)), dtype=float)
        return np.all(vals[1:] <= vals[:-1]) and vals[-1] <= 1e-6

    run("A_infinite_at_lower_end", lower_limit)
    run("A_zero_at_upper_end", upper_limit)
    run(
        "A_inverse_roundtrip",
        lambda: _rel_close(np.asarray(member.A_inv(member.A(xs)), dtype=float), xs, 1e-10),
    )

    def b_values():
        return np.asarray(member.B(thetas), dtype=float)

    run("B_positive", lambda: np.all(b_values() > 0))

    def b_monotone():
        d = np.diff(b_values())
        return np.all(d > 0) or np.all(d < 0)

    run("B_monotone", b_monotone)
    run(
        "B_inverse_roundtrip",
        lambda: _rel_close(np.asarray(member.B_inv(member.B(thetas)), dtype=float), thetas, 1e-10),
    )
    return report
