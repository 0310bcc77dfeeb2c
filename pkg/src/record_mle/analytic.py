"""Closed forms and truncated series for the bias and MSE of the estimators.

Every expectation here is an expectation over ``T ~ Gamma(m, rate=B(theta))``,
the common law of ``sum A(X_i)`` (sample of size m) and ``A(R'_m)`` (m-th
lower record).  Expanding ``exp(-c / T)`` in powers of ``1/T`` and integrating
term by term gives series whose i-th term contains ``Gamma(m - i - k)``; the
terms stop existing at the Gamma pole, so the sums are truncated at the last
finite term.  The truncated sums are asymptotic in m, not convergent
expansions: they are accurate when ``m * A(x) * B(theta)`` is small relative
to ``m**2`` and can be badly off (even negative MSEs) for small m.

Term magnitudes are computed as ``exp`` of log-gamma sums with the sign
tracked separately, and summed with :func:`math.fsum`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError, MomentNonexistenceError, SeriesUndefinedError
from .family import FamilyMember, check_support, check_theta

__all__ = [
    "SeriesEvaluation",
    "negative_gamma_moment",
    "gamma_expectation_quadrature",
    "gamma_ratio_terms",
    "expectation_cdf_plugin_series",
    "expectation_pdf_plugin_series",
    "second_moment_pdf_plugin_series",
    "mse_cdf_plugin_series",
    "mse_pdf_plugin",
    "plugin_moment_quadrature",
    "mse_theta_power_exact",
    "mse_theta_quadrature",
    "mse_exp_theta_series",
    "lemma1_ratio",
    "records_vs_sample_findings",
]

QUAD_RTOL = 1e-10


@dataclass
class SeriesEvaluation:
    """A truncated series value with its truncation diagnostics."""

    value: float
    truncation_index: int
    last_term_magnitude: float
    formal_only: bool = False
    warnings: list[str] = field(default_factory=list)

    def __float__(self) -> float:
        return self.value

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "truncation_index": self.truncation_index,
            "last_term_magnitude": self.last_term_magnitude,
            "formal_only": self.formal_only,
            "warnings": list(self.warnings),
        }


def _check_count(name: str, value: int, minimum: int) -> int:
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def negative_gamma_moment(m: int, k: int, rate: float) -> float:
    """``E[T**-k]`` for ``T ~ Gamma(m, rate)``: ``rate**k * Gamma(m-k) / Gamma(m)``.

    Raises
    ------
    MomentNonexistenceError
        If ``k >= m``; the integral diverges at the origin.
    """
    m = _check_count("m", m, 1)
    k = _check_count("k", k, 0)
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if k >= m:
        raise MomentNonexistenceError(f"E[T^-{k}] does not exist for gamma shape {m}")
    if k <= 16:
        # Gamma(m-k)/Gamma(m) = 1/prod_{j=1}^{k}(m-j); exact up to k roundings
        return math.prod(rate / (m - j) for j in range(1, k + 1))
    return math.exp(k * math.log(rate) + math.lgamma(m - k) - math.lgamma(m))


def _gamma_logpdf(t: float, m: int, rate: float, log_norm: float) -> float:
    return log_norm + (m - 1) * math.log(t) - rate * t


def _probe_divergence(w: Callable[[float], float], points: Iterable[float], where: str) -> None:
    vals = []
    for t in points:
        with np.errstate(all="ignore"):
            try:
                v = abs(float(w(t)))
            except (OverflowError, ZeroDivisionError):
                v = math.inf
        if not math.isfinite(v):
            raise DivergenceError(f"integrand is not finite near the {where} end (t={t:g})")
        vals.append(v)
    tail = vals[-4:]
    if tail[-1] > 0 and all(b >= a for a, b in zip(tail, tail[1:])):
        raise DivergenceError(f"integrand does not decay toward the {where} end")


def gamma_expectation_quadrature(g: Callable[[float], float], m: int, rate: float) -> float:
    """``E[g(T)]`` for ``T ~ Gamma(m, rate)`` by adaptive quadrature.

    The range is split at the gamma mode (``1/rate`` when m = 1).  The left
    piece is integrated in ``u = ln t`` so the behaviour at the origin is
    resolved; the right piece is integrated directly to infinity.  Before
    integrating, the integrand is probed toward both ends and a
    :class:`DivergenceError` is raised if it fails to decay, as for
    ``g(t) = exp(c / t)`` with ``c > 0``.
    """
    m = _check_count("m", m, 1)
    rate = float(rate)
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    log_norm = m * math.log(rate) - math.lgamma(m)
    split = (m - 1) / rate if m > 1 else 1.0 / rate

    def left(u: float) -> float:
        t = math.exp(u)
        if t == 0.0:
            return 0.0
        lp = _gamma_logpdf(t, m, rate, log_norm) + u
        return float(g(t)) * math.exp(lp) if lp > -745 else 0.0

    def right(t: float) -> float:
        lp = _gamma_logpdf(t, m, rate, log_norm)
        return float(g(t)) * math.exp(lp) if lp > -745 else 0.0

    def w_left(t: float) -> float:
        return float(g(t)) * math.exp(_gamma_logpdf(t, m, rate, log_norm)) * t

    _probe_divergence(w_left, [split * 10.0**-k for k in range(1, 13)], "lower")
    _probe_divergence(w_left, [split * 2.0**k + 2.0**k / rate for k in range(2, 14)], "upper")

    opts = dict(epsabs=0.0, epsrel=QUAD_RTOL, limit=400)
    lo_val, _ = integrate.quad(left, -math.inf, math.log(split), **opts)
    hi_val, _ = integrate.quad(right, split, math.inf, **opts)
    total = lo_val + hi_val
    if not math.isfinite(total):
        raise DivergenceError("quadrature produced a non-finite value")
    return total


def gamma_ratio_terms(m: int, offset: int, z: float, upper: int) -> list[float]:
    """``Gamma(m-i-offset) / (Gamma(m) Gamma(i+1)) * z**i`` for ``i = 0..upper``."""
    if upper < 0:
        return []
    if m - upper - offset < 1:
        raise MomentNonexistenceError(f"term {upper} hits the Gamma pole for m={m}")
    log_gm = math.lgamma(m)
    terms = []
    if z == 0.0:
        terms.append(math.exp(math.lgamma(m - offset) - log_gm))
        terms.extend(0.0 for _ in range(upper))
        return terms
    log_z = math.log(abs(z))
    negative = z < 0
    for i in range(upper + 1):
        mag = math.exp(math.lgamma(m - i - offset) - log_gm - math.lgamma(i + 1) + i * log_z)
        terms.append(-mag if negative and i % 2 else mag)
    return terms


def _finish(terms: list[float], extra: Iterable[float] = (), **kw) -> SeriesEvaluation:
    value = math.fsum(list(terms) + list(extra))
    last = abs(terms[-1]) if terms else 0.0
    return SeriesEvaluation(value=value, truncation_index=len(terms) - 1, last_term_magnitude=last, **kw)


def _setup(member: FamilyMember, theta: float, x: float):
    theta = check_theta(member, theta)
    x = float(check_support(member, x))
    return float(member.B(theta)), float(member.A(x)), float(member.A_prime(x))


def expectation_cdf_plugin_series(member: FamilyMember, theta: float, x: float, m: int) -> SeriesEvaluation:
    """Truncated series for ``E[exp(-m A(x) / T)]``, the mean of the plug-in CDF.

    ``sum_{i=0}^{m-1} Gamma(m-i) / (Gamma(m) i!) * (-m B A(x))**i``
    """
    m = _check_count("m", m, 1)
    b, a, _ = _setup(member, theta, x)
    return _finish(gamma_ratio_terms(m, 0, -m * b * a, m - 1))


def expectation_pdf_plugin_series(member: FamilyMember, theta: float, x: float, m: int) -> SeriesEvaluation:
    """Truncated series for the mean of the plug-in density, ``i = 0..m-2``.

    ``m B (-A'(x)) sum Gamma(m-i-1) / (Gamma(m) i!) * (-m B A(x))**i``
    """
    m = _check_count("m", m, 1)
    if m < 2:
        raise SeriesUndefinedError("the plug-in density series has no finite terms for m = 1")
    b, a, ap = _setup(member, theta, x)
    scale = m * b * (-ap)
    terms = [scale * t for t in gamma_ratio_terms(m, 1, -m * b * a, m - 2)]
    return _finish(terms)


def second_moment_pdf_plugin_series(member: FamilyMember, theta: float, x: float, m: int) -> SeriesEvaluation:
    """Truncated series for ``E[fhat**2]``, ``i = 0..m-3``.

    ``(m B A'(x))**2 sum Gamma(m-i-2) / (Gamma(m) i!) * (-2 m B A(x))**i``
    """
    m = _check_count("m", m, 1)
    if m < 3:
        raise MomentNonexistenceError("E[fhat^2] needs m >= 3")
    b, a, ap = _setup(member, theta, x)
    scale = (m * b * ap) ** 2
    terms = [scale * t for t in gamma_ratio_terms(m, 2, -2.0 * m * b * a, m - 3)]
    return _finish(terms)


def _negative_warning(ev: SeriesEvaluation, what: str) -> None:
    if ev.value < 0:
        ev.warnings.append(
            f"{what} series is negative ({ev.value:.6g}); truncation has broken down at this m"
        )


def mse_cdf_plugin_series(member: FamilyMember, theta: float, x: float, m: int) -> SeriesEvaluation:
    """Truncated series for the MSE of the record-based plug-in CDF.

    ``sum_{i=0}^{m-1} Gamma(m-i)/(Gamma(m) i!) (-m A B)**i (2**i - 2F) + F**2``
    with ``F = exp(-A(x) B(theta))``; this is ``E[Fhat^2] - 2F E[Fhat] + F^2``
    with both moments truncated at the same index.
    """
    m = _check_count("m", m, 1)
    b, a, _ = _setup(member, theta, x)
    F = math.exp(-a * b)
    base = gamma_ratio_terms(m, 0, -m * b * a, m - 1)
    terms = [t * (2.0**i - 2.0 * F) for i, t in enumerate(base)]
    ev = _finish(terms, [F * F])
    _negative_warning(ev, "MSE")
    return ev


def mse_pdf_plugin(member: FamilyMember, theta: float, x: float, m: int) -> SeriesEvaluation:
    """MSE of the record-based plug-in density from its moment series.

    ``E[fhat^2] - 2 f E[fhat] + f^2`` with ``E[fhat^2]`` truncated at
    ``i = m-3`` and ``E[fhat]`` at ``i = m-2``.
    """
    m = _check_count("m", m, 1)
    if m < 3:
        raise MomentNonexistenceError("the MSE of the plug-in density needs m >= 3")
    b, a, ap = _setup(member, theta, x)
    f = -b * ap * math.exp(-b * a)
    second = second_moment_pdf_plugin_series(member, theta, x, m)
    first = expectation_pdf_plugin_series(member, theta, x, m)
    value = math.fsum([second.value, -2.0 * f * first.value, f * f])
    ev = SeriesEvaluation(
        value=value,
        truncation_index=second.truncation_index,
        last_term_magnitude=second.last_term_magnitude,
        warnings=["built from the exact moment series E[fhat^2] and E[fhat]"],
    )
    _negative_warning(ev, "MSE")
    return ev


def plugin_moment_quadrature(
    member: FamilyMember, theta: float, x: float, m: int, which: str, power: int = 1
) -> float:
    """Exact ``E[Fhat**power]`` or ``E[fhat**power]`` by quadrature over T."""
    m = _check_count("m", m, 1)
    b, a, ap = _setup(member, theta, x)
    if which == "cdf":
        def g(t):
            return math.exp(-power * m * a / t)
    elif which == "pdf":
        def g(t):
            return (-m * ap / t) ** power * math.exp(-power * m * a / t)
    else:
        raise ValueError(f"which must be 'cdf' or 'pdf', got {which!r}")
    return gamma_expectation_quadrature(g, m, b)


def mse_theta_power_exact(n: int, theta: float, printed_form: bool = False) -> float:
    """Exact MSE of theta_hat for the power-function member.

    Built from negative gamma moments,
    ``E[(n/T)^2] - 2 theta E[n/T] + theta^2 = theta^2 (n+2) / ((n-1)(n-2))``.

    ``printed_form=True`` instead returns the frequently reproduced closed form
    ``(n^2/((n-2)(n-1)) - 2n/(n-2) + 1) theta^2``, whose middle coefficient is
    wrong (it is negative at n = 3); it exists only for comparison.
    """
    n = _check_count("n", n, 1)
    if n <= 2:
        raise MomentNonexistenceError("E[(n/T)^2] needs n >= 3")
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")
    if printed_form:
        return (n * n / ((n - 2) * (n - 1)) - 2.0 * n / (n - 2) + 1.0) * theta * theta
    second = n * n * negative_gamma_moment(n, 2, theta)
    first = n * negative_gamma_moment(n, 1, theta)
    return second - 2.0 * theta * first + theta * theta


def mse_theta_quadrature(member: FamilyMember, theta: float, n: int, transform=None) -> float:
    """Exact ``E[(gamma(theta_hat) - gamma(theta))^2]`` by quadrature over T.

    Works for any member; raises :class:`DivergenceError` when the MSE is infinite.
    """
    theta = check_theta(member, theta)
    n = _check_count("n", n, 1)
    apply = (lambda v: v) if transform is None else (lambda v: float(transform.apply(v)))
    target = apply(theta)

    def g(t):
        with np.errstate(all="ignore"):
            est = apply(float(member.B_inv(n / t)))
        return (est - target) ** 2

    return gamma_expectation_quadrature(g, n, float(member.B(theta)))


def _truncated_exp_gap(n: int, x: float) -> float:
    """``sum_{i<n} x^i/i! * r_i - exp(x)`` with ``r_i = n^i Gamma(n-i) / Gamma(n)``.

    Each term is ``x^i/i! * (r_i - 1)`` with ``r_i - 1`` from ``expm1`` of a
    running ``log1p`` sum, and the exponential tail beyond ``n-1`` is
    subtracted separately.
    """
    log_x = math.log(x)
    parts = []
    log_r = 0.0
    for i in range(1, n):
        log_r -= math.log1p(-i / n)
        parts.append(math.exp(i * log_x - math.lgamma(i + 1) + math.log(math.expm1(log_r))))
    i = n
    term = math.exp(n * log_x - math.lgamma(n + 1))
    scale = max([abs(p) for p in parts] + [term])
    while term > 1e-20 * scale or i < x:
        parts.append(-term)
        i += 1
        term *= x / i
    return math.fsum(parts)


def mse_exp_theta_series(n: int, theta: float) -> SeriesEvaluation:
    """Formal series for the MSE of ``exp(theta_hat)`` under the power-function member.

    ``sum_{i=0}^{n-1} (n theta)^i Gamma(n-i)/(i! Gamma(n)) (2^i - 2 e^theta) + e^(2 theta)``

    The represented quantity is infinite (``E[exp(2n/T)]`` diverges at the
    origin), so the result is flagged ``formal_only`` and may be negative.
    """
    n = _check_count("n", n, 1)
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")
    e = math.exp(theta)
    base = gamma_ratio_terms(n, 0, n * theta, n - 1)
    # S2 - 2e S1 + e^2 == (S2 - e^2) - 2e (S1 - e); the gaps avoid the cancellation
    value = math.fsum([_truncated_exp_gap(n, 2.0 * theta), -2.0 * e * _truncated_exp_gap(n, theta)])
    last = abs(base[-1] * (2.0 ** (n - 1) - 2.0 * e))
    ev = SeriesEvaluation(value=value, truncation_index=n - 1, last_term_magnitude=last, formal_only=True)
    ev.warnings.append("formal series: the true MSE of exp(theta_hat) is infinite")
    if ev.value < 0:
        ev.warnings.append(f"formal series value is negative ({ev.value:.6g})")
    return ev


def lemma1_ratio(n: int, i: int) -> float:
    """``Gamma(n-i-1) n^(i+1) / Gamma(n) = prod_{j=1}^{i+1} n / (n-j)``.

    Evaluated as ``exp(-sum log1p(-j/n))``, which stays accurate for huge n
    where differencing log-gamma values loses digits.
    """
    n = _check_count("n", n, 1)
    i = _check_count("i", i, 0)
    if i + 2 > n:
        raise DomainError(f"ratio needs i + 2 <= n, got n={n}, i={i}")
    return math.exp(-math.fsum(math.log1p(-j / n) for j in range(1, i + 2)))


def records_vs_sample_findings(
    theta_grid: Iterable[float],
    record_m: int = 2,
    sample_sizes: Iterable[int] = (5, 6, 7, 8),
    large_pair: tuple[int, int] = (15, 500),
) -> dict:
    """Compare formal exp(theta) MSE series between record and sample sizes.

    For each theta and each sample size n, reports whether the series at
    ``record_m`` records is below the series at n.  Also reports the values
    for ``large_pair = (m, n)``.  These are comparisons of formal series, not
    of finite MSEs.
    """
    rows = []
    sizes = [int(s) for s in sample_sizes]
    for theta in theta_grid:
        rec = mse_exp_theta_series(record_m, theta).value
        for n in sizes:
            samp = mse_exp_theta_series(n, theta).value
            rows.append({
                "theta": float(theta),
                "record_m": record_m,
                "sample_n": n,
                "records_series": rec,
                "sample_series": samp,
                "records_lower": rec < samp,
            })
    m_big, n_big = large_pair
    thetas = sorted({r["theta"] for r in rows})
    large = [
        {
            "theta": t,
            "record_m": m_big,
            "sample_n": n_big,
            "records_series": mse_exp_theta_series(m_big, t).value,
            "sample_series": mse_exp_theta_series(n_big, t).value,
        }
        for t in thetas
    ]
    wins = sum(r["records_lower"] for r in rows)
    return {
        "comparisons": rows,
        "records_lower_count": wins,
        "total": len(rows),
        "large_sample_comparison": large,
        "warnings": ["formal series: the true MSE of exp(theta_hat) is infinite"],
    }
