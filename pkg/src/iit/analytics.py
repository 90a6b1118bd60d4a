"""Closed-form signal expressions, an independent quadrature oracle, and
the inverse maps a receiver would use.

The oracle rebuilds the far-particle effective states for an idealized
all-Gaussian scenario by direct numerical quadrature of their defining
integral, sharing no code with the grid pipeline, and returns the normalized
branch overlap. It is the reference the grid results and the verbatim closed
form are both judged against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadCoefficients,
    DegenerateChannel,
    NoConvergence,
    NonPositiveVariance,
    OutOfRange,
)

# Hard per-axis point cap for the oracle quadrature; scenarios whose scales
# demand more than this at the base level cannot be refined to convergence.
_ORACLE_AXIS_CAP = 1 << 21
_ORACLE_MAX_LEVELS = 6


@dataclass(frozen=True)
class SignalInputs:
    """Everything the measurement formulas consume.

    gamma2 and gamma3 are branch overlaps (normalized ones keep modulus
    at most 1; the raw and closed-form variants may not, and are accepted
    as-is for the discrepancy study). alpha, a_pp, a_mm are the observable's
    matrix elements in the branch basis.
    """

    a: complex
    b: complex
    gamma2: complex
    gamma3: complex
    alpha: complex
    a_pp: float
    a_mm: float

    def __post_init__(self):
        weight = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(weight - 1.0) > 1e-9:
            raise BadCoefficients(f"|a|^2 + |b|^2 = {weight} is not 1 within 1e-9")


@dataclass(frozen=True)
class GaussianScenario:
    """All-Gaussian idealization of one run: branch means m+-, shared branch
    variance sigma2, receiver carrier variance beta2, coupling g23 over
    duration T. `convention` fixes what "variance" means for the amplitudes
    (see gaussian_wf)."""

    m_plus: float
    m_minus: float
    sigma2: float
    beta2: float
    g23: float
    T: float
    convention: str = "density"

    def __post_init__(self):
        if self.sigma2 <= 0 or self.beta2 <= 0:
            raise NonPositiveVariance(
                f"sigma2={self.sigma2}, beta2={self.beta2} must be positive"
            )
        if self.g23 < 0 or self.T < 0:
            raise ValueError("g23 and T must be nonnegative")
        if self.convention not in ("density", "amplitude"):
            raise ValueError(f"unknown convention {self.convention!r}")

    @property
    def coupling(self) -> float:
        """Accumulated shift strength c = g23 * T."""
        return self.g23 * self.T

    @property
    def big_g(self) -> float:
        """Strength-duration invariant G = g23^2 T^2 / 2."""
        return 0.5 * self.g23**2 * self.T**2

    @property
    def delta_m(self) -> float:
        return self.m_plus - self.m_minus


def expectation_with_interaction(si: SignalInputs) -> float:
    """|a|^2 A++ + |b|^2 A-- + 2 Re(conj(a) b gamma2 gamma3 alpha)."""
    cross = (np.conj(si.a) * si.b * si.gamma2 * si.gamma3 * si.alpha).real
    return float(
        abs(si.a) ** 2 * si.a_pp + abs(si.b) ** 2 * si.a_mm + 2.0 * cross
    )


def expectation_without_interaction(si: SignalInputs) -> float:
    """Same expression with the far-particle overlap replaced by 1."""
    cross = (np.conj(si.a) * si.b * si.gamma2 * si.alpha).real
    return float(
        abs(si.a) ** 2 * si.a_pp + abs(si.b) ** 2 * si.a_mm + 2.0 * cross
    )


def delta(si: SignalInputs) -> float:
    """Literal difference (without) - (with); the detectable signal."""
    return expectation_without_interaction(si) - expectation_with_interaction(si)


def gamma3_closed_form(scenario: GaussianScenario, big_g: float | None = None) -> float:
    """Verbatim closed form (1/beta) exp(-M G), M = dm^2 / (2 (beta2 + G sigma2)).

    Reproduced exactly as stated by the source material, including the 1/beta
    prefactor that exceeds 1 for beta < 1; callers flag (never clamp) values
    outside [0, 1].
    """
    g = scenario.big_g if big_g is None else float(big_g)
    if g < 0:
        raise ValueError(f"G must be nonnegative, got {g}")
    k = scenario.beta2 + g * scenario.sigma2
    m = scenario.delta_m**2 / (2.0 * k)
    beta = math.sqrt(scenario.beta2)
    return float(math.exp(-m * g) / beta)


def _oracle_once(scenario: GaussianScenario, c: float, level: int) -> float:
    """One quadrature pass at the given refinement level."""
    if scenario.convention == "density":
        w_var = scenario.sigma2
        chi_exp_den = 4.0 * scenario.beta2
        s3 = math.sqrt(scenario.beta2)
    else:
        w_var = scenario.sigma2 / 2.0
        chi_exp_den = 2.0 * scenario.beta2
        s3 = math.sqrt(scenario.beta2 / 2.0)
    su = math.sqrt(w_var)

    ulo = min(scenario.m_plus, scenario.m_minus) - 10.0 * su
    uhi = max(scenario.m_plus, scenario.m_minus) + 10.0 * su
    scale_u = min(su, s3 / c) if c > 0 else su
    mult = 6 * (1 << level)
    n_u = int(math.ceil((uhi - ulo) / (scale_u / mult))) + 1
    if n_u > _ORACLE_AXIS_CAP:
        raise NoConvergence(
            f"scenario needs {n_u} source points at refinement level {level},"
            f" beyond the {_ORACLE_AXIS_CAP} cap"
        )
    u = np.linspace(ulo, uhi, n_u)
    du = (uhi - ulo) / (n_u - 1)

    xlo = min(c * ulo, c * uhi, 0.0) - 10.0 * s3
    xhi = max(c * ulo, c * uhi, 0.0) + 10.0 * s3
    n_x = int(math.ceil((xhi - xlo) / (s3 / mult))) + 1
    if n_x > _ORACLE_AXIS_CAP:
        raise NoConvergence(
            f"scenario needs {n_x} target points at refinement level {level},"
            f" beyond the {_ORACLE_AXIS_CAP} cap"
        )
    x = np.linspace(xlo, xhi, n_x)
    dx = (xhi - xlo) / (n_x - 1)

    w_plus = np.exp(-((u - scenario.m_plus) ** 2) / (2.0 * w_var))
    w_plus /= w_plus.sum() * du
    w_minus = np.exp(-((u - scenario.m_minus) ** 2) / (2.0 * w_var))
    w_minus /= w_minus.sum() * du

    chi_p = np.empty(n_x)
    chi_m = np.empty(n_x)
    # carrier normalization cancels in the normalized overlap; chunk the
    # kernel rows to bound memory
    block = max(1, (1 << 22) // n_u)
    wp_du = w_plus * du
    wm_du = w_minus * du
    for start in range(0, n_x, block):
        stop = min(start + block, n_x)
        kern = np.exp(-((x[start:stop, None] - c * u[None, :]) ** 2) / chi_exp_den)
        chi_p[start:stop] = kern @ wp_du
        chi_m[start:stop] = kern @ wm_du
    num = float(np.sum(chi_p * chi_m) * dx)
    den_p = float(np.sum(chi_p * chi_p) * dx)
    den_m = float(np.sum(chi_m * chi_m) * dx)
    if den_p <= 0 or den_m <= 0:
        raise NoConvergence("quadrature lost all carrier mass")
    return num / math.sqrt(den_p * den_m)


def gamma3_oracle(
    scenario: GaussianScenario,
    big_g: float | None = None,
    tol: float = 1e-6,
) -> float:
    """Normalized far-branch overlap by direct quadrature, refined until a
    resolution doubling moves the value by less than `tol`.

    Raises NoConvergence when the scenario's scales cannot be resolved within
    the refinement caps (e.g. vanishing variances against a finite mean split).
    """
    g = scenario.big_g if big_g is None else float(big_g)
    if g < 0:
        raise ValueError(f"G must be nonnegative, got {g}")
    c = math.sqrt(2.0 * g)
    prev = _oracle_once(scenario, c, 0)
    for level in range(1, _ORACLE_MAX_LEVELS + 1):
        cur = _oracle_once(scenario, c, level)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise NoConvergence(
        f"oracle did not converge to {tol} within {_ORACLE_MAX_LEVELS} doublings"
    )


def invert_delta_to_gamma3(
    delta_value: float, a: float, b: float, gamma2: float, alpha: float
) -> float:
    """Recover gamma3 from a measured signal: gamma3 = 1 - delta / (2 a b gamma2 alpha).

    All inputs must be real (the well-posed regime); a channel factor
    |2 a b gamma2 alpha| <= 1e-12 carries no signal and raises
    DegenerateChannel.
    """
    vals = []
    for name, v in (
        ("delta", delta_value),
        ("a", a),
        ("b", b),
        ("gamma2", gamma2),
        ("alpha", alpha),
    ):
        v = complex(v)
        if abs(v.imag) > 1e-12:
            raise ValueError(f"inversion requires real inputs; {name} has imag {v.imag}")
        vals.append(v.real)
    delta_value, a, b, gamma2, alpha = vals
    channel = 2.0 * a * b * gamma2 * alpha
    if abs(channel) <= 1e-12:
        raise DegenerateChannel(
            f"channel factor 2 a b gamma2 alpha = {channel:.3e} carries no signal"
        )
    return 1.0 - delta_value / channel


def invert_gamma3_to_G(
    gamma3_target: float,
    scenario: GaussianScenario,
    mode: str = "closed_form",
    tol: float = 1e-8,
    max_iter: int = 200,
) -> float:
    """Bisection inverse of the strictly decreasing map G -> gamma3.

    mode "closed_form" inverts the verbatim formula; mode "oracle" inverts the
    quadrature oracle. Targets outside (asymptote, value-at-0] raise
    OutOfRange. Each mode's large-G asymptote is evaluated in closed form: for
    the oracle it is the delta-kernel limit of the defining integral, the
    normalized overlap of the two weight densities, exp(-dm^2 / (4 w_var)).
    Targets barely above the asymptote need very large brackets and may hit
    the oracle's refinement caps; the intended regime is moderate G.
    """
    if mode == "closed_form":
        forward = lambda g: gamma3_closed_form(scenario, big_g=g)
        beta = math.sqrt(scenario.beta2)
        asymptote = math.exp(
            -scenario.delta_m**2 / (2.0 * scenario.sigma2)
        ) / beta
    elif mode == "oracle":
        forward = lambda g: gamma3_oracle(scenario, big_g=g)
        w_var = (
            scenario.sigma2
            if scenario.convention == "density"
            else scenario.sigma2 / 2.0
        )
        asymptote = math.exp(-scenario.delta_m**2 / (4.0 * w_var))
    else:
        raise ValueError(f"unknown inversion mode {mode!r}")
    if scenario.delta_m == 0.0:
        raise DegenerateChannel("m_plus == m_minus: gamma3 is constant in G")

    top = forward(0.0)
    if gamma3_target > top + tol:
        raise OutOfRange(f"target {gamma3_target} above the G=0 value {top}")
    if gamma3_target <= asymptote:
        raise OutOfRange(
            f"target {gamma3_target} at or below the large-G asymptote"
            f" {asymptote:.6e}; no finite G reaches it"
        )
    if abs(top - gamma3_target) <= tol:
        return 0.0

    lo, hi = 0.0, 1.0
    while forward(hi) > gamma3_target:
        hi *= 4.0
        if hi > 1e12:
            raise OutOfRange(
                f"target {gamma3_target} not bracketed below G = 1e12"
            )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = forward(mid)
        if abs(val - gamma3_target) <= tol:
            return mid
        if val > gamma3_target:
            lo = mid
        else:
            hi = mid
        # the oracle forward map carries refinement noise of order its own
        # tolerance; a collapsed bracket pins G even when the residual stalls
        if hi - lo <= 1e-12 * max(1.0, hi):
            return 0.5 * (lo + hi)
    raise NoConvergence(
        f"bisection residual above {tol} after {max_iter} iterations"
    )


def fit_suppression_form(
    g_values: np.ndarray, gamma_values: np.ndarray, delta_m: float
) -> tuple[float, float, float]:
    """Least-squares fit of -log(gamma) to dm^2 G / (2 (b' + s' G)).

    The form linearizes exactly: z = dm^2 G / (2 (-log gamma)) = b' + s' G.
    Returns (b', s', max relative residual of -log gamma over the points).
    """
    g = np.asarray(g_values, dtype=float)
    y = -np.log(np.asarray(gamma_values, dtype=float))
    if np.any(y <= 0):
        raise ValueError("fit needs gamma values strictly inside (0, 1)")
    z = delta_m**2 * g / (2.0 * y)
    coeffs, *_ = np.linalg.lstsq(np.stack([np.ones_like(g), g], axis=1), z, rcond=None)
    b_eff, s_eff = float(coeffs[0]), float(coeffs[1])
    y_fit = delta_m**2 * g / (2.0 * (b_eff + s_eff * g))
    resid = float(np.max(np.abs(y_fit / y - 1.0)))
    return b_eff, s_eff, resid
