"""Solution families with constant modulus ``rho = |z| = rho0``.

With ``rho`` frozen, the polar system collapses to a first-order flow for
``W`` (zero gap) or for ``(P, W)`` (positive gap ``delta0``), and ``r`` is
read off algebraically from the stationarity of ``rho``.  This module holds
the critical constants, the explicit families, the reduced flows with their
separatrices, and the search for parameters giving periodic fields.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .dynamics import FamilySample, xi0_delta0, xi0_deltapos
from .errors import (AccuracyError, DegenerateInputError, InvalidInputError, NotFoundError,
                     SingularStateError)
from .integrate import EventSpec, IntegratorConfig, Trajectory, integrate, integrate_two_sided
from .quadrature import cumulative_integral

TWO_PI = 2 * math.pi
SQRT2 = math.sqrt(2.0)

#: tight settings used for period and closure measurements
TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-14)

ORBIT_TAGS = ("singular", "constant-fixed-point", "separatrix-stable", "separatrix-unstable",
              "global-oscillatory", "global-bounded", "periodic", "drift-periodic")


def _check_lam(lam: float) -> None:
    if not lam > 0:
        raise InvalidInputError("lambda must be positive")


def rho_crit(lam: float) -> float:
    _check_lam(lam)
    return 1.0 / math.sqrt(1.0 + 8.0 * lam * lam)


def beta_of(lam: float, rho0: float) -> float:
    """``(1/lam) sqrt(1/rho0^2 - 1)`` for ``0 < rho0 <= 1``."""
    if not 0 < rho0 <= 1:
        raise InvalidInputError("beta needs 0 < rho0 <= 1")
    return math.sqrt(max(1.0 / (rho0 * rho0) - 1.0, 0.0)) / lam


def alpha_branch_of(lam: float, rho0: float) -> float:
    """``(1/lam) sqrt(1 - 1/rho0^2)`` for ``rho0 > 1``."""
    if not rho0 > 1:
        raise InvalidInputError("alpha branch needs rho0 > 1")
    return math.sqrt(1.0 - 1.0 / (rho0 * rho0)) / lam


def w_infinity(lam: float, rho0: float) -> float:
    """Fixed point of the zero-gap ``W`` flow in ``(pi/2, pi]``."""
    rc = rho_crit(lam)
    if not rc * (1 - 1e-13) <= rho0 <= 1:
        raise InvalidInputError(f"W_inf needs rho_crit <= rho0 <= 1 (rho_crit = {rc:.17g})")
    x = -beta_of(lam, rho0) / (2 * SQRT2)
    return math.acos(max(-1.0, x))


def p_infinity(lam: float, rho0: float) -> float:
    """Fixed point ``(P_inf, pi)`` of the positive-gap flow, ``rho0 < rho_crit``."""
    rc = rho_crit(lam)
    if not 0 < rho0 < rc:
        raise InvalidInputError(f"P_inf needs 0 < rho0 < rho_crit = {rc:.17g}")
    x = math.sqrt(1.0 + (1.0 / rho0 ** 2 - 1.0 / rc ** 2) / (4 * lam * lam))
    return math.atanh(1.0 / x)


@dataclass(frozen=True)
class CriticalConstants:
    lam: float
    rho0: float
    rho_crit: float
    beta: float | None
    alpha_branch: float | None
    W_inf: float | None
    P_inf: float | None
    P_crit: float | None = None


def critical_constants(lam: float, rho0: float, with_p_crit: bool = False) -> CriticalConstants:
    """All constants of the constant-``rho`` portraits; absent ones are ``None``."""
    _check_lam(lam)
    if not rho0 > 0:
        raise InvalidInputError("rho0 must be positive")
    rc = rho_crit(lam)
    beta = beta_of(lam, rho0) if rho0 <= 1 else None
    alpha = alpha_branch_of(lam, rho0) if rho0 > 1 else None
    w_inf = w_infinity(lam, rho0) if rc * (1 - 1e-13) <= rho0 <= 1 else None
    p_inf = p_infinity(lam, rho0) if rho0 < rc else None
    pc = p_crit(lam, rho0).value if (with_p_crit and rho0 < rc) else None
    return CriticalConstants(lam, rho0, rc, beta, alpha, w_inf, p_inf, pc)


@dataclass
class OrbitClass:
    tag: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in ORBIT_TAGS:
            raise ValueError(f"unknown orbit tag {self.tag!r}")


# ----------------------------------------------------------------------
# zero gap


def w_ode_delta0_rhs(W, lam: float, rho0: float):
    """``W' = lam rho0 (3 cos W + sqrt(cos^2 W + beta^2))``, ``rho0 <= 1``."""
    b = beta_of(lam, rho0)
    cw = np.cos(W)
    return lam * rho0 * (3 * cw + np.sqrt(cw * cw + b * b))


def induced_rR2_delta0(W, lam: float, rho0: float):
    """``r R^2`` forced by ``rho' = 0``."""
    b = beta_of(lam, rho0)
    cw = np.cos(W)
    return 2 * lam * rho0 ** 3 * (cw + np.sqrt(cw * cw + b * b))


def delta0_flow(lam: float, rho0: float):
    """Field on ``(W, int cos W, int sin W)``."""
    b2 = beta_of(lam, rho0) ** 2
    k = lam * rho0

    def f(s, y):
        cw, sw = math.cos(y[0]), math.sin(y[0])
        return np.array([k * (3 * cw + math.sqrt(cw * cw + b2)), cw, sw])

    return f


def delta0_family(lam: float, rho0: float, W0: float, s, c0: complex = 1.0,
                  config: IntegratorConfig = TIGHT) -> FamilySample:
    """Constant-``rho`` zero-gap fields sampled on ``s`` (any order), ``s = 0`` at ``W0``."""
    s = np.asarray(s, dtype=float)
    lo, hi = min(float(s.min()), 0.0), max(float(s.max()), 0.0)
    traj = integrate_two_sided(delta0_flow(lam, rho0), [W0, 0.0, 0.0], 0.0,
                               (lo - 1e-9, hi + 1e-9), config)
    return delta0_fields_from_flow(lam, rho0, W0, s, traj(s), c0, traj.terminations)


def delta0_fields_from_flow(lam, rho0, W0, s, y, c0=1.0, terminations=()) -> FamilySample:
    y = np.atleast_2d(y)
    W, Ic, Is = y[:, 0], y[:, 1], y[:, 2]
    xi0 = xi0_delta0(c0, W0)
    R0 = abs(xi0.c)
    if R0 == 0:
        raise InvalidInputError("xi0 must be nonzero")
    scale = np.exp(lam * rho0 * Is)
    A = rho0 * Ic
    z = rho0 * np.exp(1j * (2 * lam * A - W + W0))
    ph = np.exp(1j * lam * A)
    c = xi0.c * scale * ph
    h = xi0.h * scale * ph
    r = induced_rR2_delta0(W, lam, rho0) / (R0 * scale) ** 2
    return FamilySample(np.asarray(s, dtype=float), z, c, h, r,
                        {"family": "constant-rho-delta0", "lam": lam, "rho0": rho0, "W0": W0,
                         "W": W, "terminations": list(terminations)})


def winfty_solution(lam: float, rho0: float, s, c0: complex = 1.0, sign: int = 1) -> FamilySample:
    """Constant solution ``W = sign * W_inf`` with its explicit fields."""
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    if not rho0 < 1:
        raise InvalidInputError("constant W_inf solution needs rho0 < 1")
    W = sign * w_infinity(lam, rho0)
    s = np.asarray(s, dtype=float)
    xi0 = xi0_delta0(c0, W)
    n2 = float(xi0.norm2())
    rate = 1j * lam * rho0 * np.exp(-1j * W)
    z = rho0 * np.exp(2j * lam * rho0 * math.cos(W) * s)
    g = np.exp(rate * s)
    r = 2 * SQRT2 * rho0 ** 2 * math.sqrt(1 - rho0 ** 2) / n2 * np.exp(-2 * lam * rho0 * math.sin(W) * s)
    return FamilySample(s, z + 0j, xi0.c * g, xi0.h * g, r,
                        {"family": "winfty", "lam": lam, "rho0": rho0, "W": W})


def closed_form_rho1_delta0(lam: float, W0: float, s, c0: complex = 1.0) -> FamilySample:
    """Explicit zero-gap family with ``rho = 1``; needs ``|W0| < pi/2``."""
    _check_lam(lam)
    if not abs(W0) < math.pi / 2:
        raise InvalidInputError("rho0 = 1 family needs cos W0 > 0")
    s = np.asarray(s, dtype=float)
    xi0 = xi0_delta0(c0, W0)
    n2 = float(xi0.norm2())
    if n2 == 0:
        raise InvalidInputError("xi0 must be nonzero")
    g0 = math.asinh(math.tan(W0))
    u = g0 + 4 * lam * s
    W = np.arctan(np.sinh(u))
    ratio = np.cosh(u) / math.cosh(g0)
    z = np.exp(-0.5j * (W - W0))
    g = ratio ** 0.25 * np.exp(0.25j * (W - W0))
    r = 8 * lam * math.sqrt(math.cosh(g0)) / (n2 * np.cosh(u) ** 1.5)
    return FamilySample(s, z, xi0.c * g, xi0.h * g, r,
                        {"family": "rho1-delta0", "lam": lam, "W0": W0, "W": W})


@dataclass
class S1xS2Solution:
    sample: FamilySample
    t: np.ndarray
    r: float
    radius_s1: float
    radius_s2: float


def s1xs2_solution_delta0(lam: float, xi_norm2: float = 8.0, s=None, c0: complex | None = None) -> S1xS2Solution:
    """The periodic constant solution at ``rho0 = rho_crit``.

    ``xi0 = a(1 - j)`` with ``2 a^2 = |xi0|^2`` unless ``c0`` is given.
    """
    rc = rho_crit(lam)
    if c0 is None:
        if not xi_norm2 > 0:
            raise InvalidInputError("|xi0|^2 must be positive")
        c0 = math.sqrt(xi_norm2 / 2)
    xi0 = xi0_delta0(c0, math.pi)
    n2 = float(xi0.norm2())
    if s is None:
        s = np.linspace(0.0, TWO_PI / (lam * rc), 401)
    s = np.asarray(s, dtype=float)
    t = lam * rc * s
    r = 8 * lam * rc ** 3 / n2
    z = rc * np.exp(-2j * t)
    g = np.exp(-1j * t)
    sample = FamilySample(s, z, xi0.c * g, xi0.h * g, np.full_like(s, r),
                          {"family": "s1xs2", "lam": lam, "rho0": rc, "W": math.pi})
    return S1xS2Solution(sample, t, r, 8 * rc ** 2 / n2, r)


# periods and rational values

@dataclass(frozen=True)
class PeriodData:
    rho0: float
    T: float
    f: float
    int_sin: float
    bracket: tuple[float, float]


def period_bracket_delta0(lam: float, rho0: float) -> tuple[float, float]:
    b = beta_of(lam, rho0)
    k = lam * rho0
    return TWO_PI / (k * (3 + math.sqrt(1 + b * b))), TWO_PI / (k * (math.sqrt(1 + b * b) - 3))


def period_and_f_delta0(lam: float, rho0: float, config: IntegratorConfig = TIGHT) -> PeriodData:
    """Period of ``W`` (``W(T) = 2 pi`` from ``W0 = 0``) and ``f = lam rho0 / 2pi int_0^T cos W``."""
    rc = rho_crit(lam)
    if not 0 < rho0 < rc:
        raise InvalidInputError(f"period needs 0 < rho0 < rho_crit = {rc:.17g}")
    lo, hi = period_bracket_delta0(lam, rho0)
    ev = EventSpec(lambda s, y: y[0] - TWO_PI, "rising", "stop", "W=2pi")
    tr = integrate(delta0_flow(lam, rho0), [0.0, 0.0, 0.0], (0.0, 1.5 * hi), config, [ev])
    if tr.termination != "event-stop":
        raise AccuracyError(f"W did not reach 2 pi: {tr.termination}")
    T = tr.s_final
    y = tr.y_final
    return PeriodData(rho0, T, lam * rho0 * y[1] / TWO_PI, float(y[2]), (lo, hi))


def f_delta0(lam: float, rho0: float) -> float:
    return period_and_f_delta0(lam, rho0).f


def find_periodic_delta0(lam: float, p: int, q: int, bracket: tuple[float, float]) -> float:
    """``rho0`` in ``bracket`` with ``f(rho0) = p/q``."""
    if q <= 0 or math.gcd(p, q) != 1:
        raise InvalidInputError("need q > 0 and gcd(p, q) = 1")
    target = p / q
    a, b = bracket
    fa, fb = f_delta0(lam, a) - target, f_delta0(lam, b) - target
    if fa * fb > 0:
        raise NotFoundError(f"f - {p}/{q} has no sign change on [{a}, {b}]")
    return brentq(lambda x: f_delta0(lam, x) - target, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)


def convergents(x: float, qmax: int) -> list[Fraction]:
    """Continued-fraction convergents of ``x`` with denominator ``<= qmax``."""
    out = []
    h1, h2, k1, k2 = 1, 0, 0, 1
    for _ in range(64):
        a = math.floor(x)
        h, k = a * h1 + h2, a * k1 + k2
        if k > qmax:
            break
        out.append(Fraction(h, k))
        h2, h1, k2, k1 = h1, h, k1, k
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return out


def delta0_closure_error(lam: float, rho0: float, q: int, T: float,
                         test_points: Sequence[float] = (0.0, 0.37, 1.21),
                         c0: complex = 1.0) -> float:
    """``max |x(s + qT) - x(s)|`` over ``x = (z, c, h, r)`` at the test points."""
    pts = np.asarray(test_points, dtype=float)
    span = q * T + pts.max() + 1e-6
    tr = integrate(delta0_flow(lam, rho0), [0.0, 0.0, 0.0], (0.0, span), TIGHT)
    if tr.termination != "reached-end":
        raise AccuracyError(tr.termination)
    both = np.concatenate([pts, pts + q * T])
    fs = delta0_fields_from_flow(lam, rho0, 0.0, both, tr(both), c0)
    n = len(pts)
    err = 0.0
    for arr in (fs.z, fs.c, fs.h, fs.r):
        err = max(err, float(np.max(np.abs(arr[n:] - arr[:n]))))
    return err


@dataclass
class PeriodicCandidate:
    rho0: float
    p: int
    q: int
    f: float
    T: float
    closure: float | None
    P0: float | None = None

    @property
    def minimal_period(self) -> float:
        return self.q * self.T


def _targets_between(fa: float, fb: float, observed: Sequence[float], qmax: int) -> list[Fraction]:
    lo, hi = min(fa, fb), max(fa, fb)
    found = set()
    for v in observed:
        for fr in convergents(v, qmax):
            if lo < fr < hi:
                found.add(fr)
    return sorted(found)


def scan_periodic_delta0(lam: float, rho_lo: float, rho_hi: float, qmax: int = 64,
                         n_grid: int = 12, max_candidates: int | None = 4,
                         check_closure: bool = True, workers: int = 1) -> list[PeriodicCandidate]:
    """Rational values of ``f`` attained on ``[rho_lo, rho_hi]``.

    ``f`` is sampled on a uniform grid; the continued-fraction convergents
    (denominator ``<= qmax``) of the sampled values that fall strictly
    between neighbouring samples are solved for with Brent's method.
    Candidates are returned by increasing ``q``, then ``rho0``.
    """
    rc = rho_crit(lam)
    if not 0 < rho_lo < rho_hi:
        raise InvalidInputError("empty scan range")
    rho_hi = min(rho_hi, rc * (1 - 1e-6))
    if not rho_lo < rho_hi:
        raise InvalidInputError("scan range lies above rho_crit")
    grid = np.linspace(rho_lo, rho_hi, n_grid)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            fv = list(pool.map(partial(f_delta0, lam), grid))
    else:
        fv = [f_delta0(lam, x) for x in grid]
    jobs = []
    for i in range(n_grid - 1):
        for fr in _targets_between(fv[i], fv[i + 1], fv, qmax):
            jobs.append((fr.denominator, float(grid[i]), fr, i))
    jobs.sort(key=lambda j: (j[0], j[1]))
    out = []
    for q, _, fr, i in jobs:
        if max_candidates is not None and len(out) >= max_candidates:
            break
        target = float(fr)
        x = brentq(lambda r: f_delta0(lam, r) - target, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
        pdat = period_and_f_delta0(lam, x)
        clo = delta0_closure_error(lam, x, fr.denominator, pdat.T) if check_closure else None
        out.append(PeriodicCandidate(x, fr.numerator, fr.denominator, pdat.f, pdat.T, clo))
    return out


def classify_delta0(lam: float, rho0: float, W0: float, tol: float = 1e-12) -> OrbitClass:
    rc = rho_crit(lam)
    if rho0 > 1:
        return OrbitClass("singular", {"alpha_branch": alpha_branch_of(lam, rho0)})
    if rho0 < rc:
        pd = period_and_f_delta0(lam, rho0)
        return OrbitClass("drift-periodic", {"T": pd.T, "f": pd.f})
    wi = w_infinity(lam, rho0)
    w = math.remainder(W0, TWO_PI)
    if min(abs(w - wi), abs(w + wi)) <= tol:
        return OrbitClass("constant-fixed-point", {"W": w})
    inc = float(w_ode_delta0_rhs(w, lam, rho0)) > 0
    lim = (-wi, wi) if inc else (TWO_PI - wi, wi)
    return OrbitClass("separatrix-stable", {"increasing": inc, "limits": lim})


@dataclass
class BranchCensus:
    fixed_points: list[float]
    increasing: int
    decreasing: int
    constant: int


def w_branch_census(lam: float, rho0: float, n: int = 20001) -> BranchCensus:
    """Branch types of the zero-gap ``W`` flow over one period ``[0, 2 pi)``.

    Fixed points are the zeros of ``W'`` (including double zeros); the
    open arcs between consecutive fixed points each carry one monotone
    branch.
    """
    wg = np.linspace(0.0, TWO_PI, n, endpoint=False)
    v = np.asarray(w_ode_delta0_rhs(wg, lam, rho0))
    try:
        wi = w_infinity(lam, rho0)
        fixed = sorted({wi % TWO_PI, (-wi) % TWO_PI})
    except InvalidInputError:
        fixed = []
    if not fixed:
        inc = 1 if np.all(v > 0) else 0
        return BranchCensus([], inc, 1 - inc, 0)
    inc = dec = 0
    edges = fixed + [fixed[0] + TWO_PI]
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        if float(w_ode_delta0_rhs(mid, lam, rho0)) > 0:
            inc += 1
        else:
            dec += 1
    return BranchCensus(fixed, inc, dec, len(fixed))


@dataclass
class SingularBranchReport:
    trajectory: Trajectory
    sign: int
    s_singular: float
    r_min: float
    min_W_rate: float
    sqrt_at_end: float


def singular_branch_rho_gt1(lam: float, rho0: float, sign: int, W0: float = 0.0,
                            xi_norm2: float = 2.0, s_max: float = 100.0) -> SingularBranchReport:
    """Zero-gap constant-``rho`` solution for ``rho0 > 1`` up to its singular point.

    ``W`` increases until ``cos W`` meets ``alpha`` where the square root
    in ``W'`` stops being differentiable.
    """
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    a = alpha_branch_of(lam, rho0)
    if a >= 1:
        raise InvalidInputError("alpha >= 1: no admissible W")
    if not a <= math.cos(W0) <= 1:
        raise InvalidInputError("need alpha <= cos W0")
    k = lam * rho0

    def f(s, y):
        cw = math.cos(y[0])
        return np.array([k * (3 * cw + sign * math.sqrt(max(cw * cw - a * a, 0.0))), math.sin(y[0])])

    ev = EventSpec(lambda s, y: math.cos(y[0]) - a, "falling", "stop", "cos W = alpha")
    tr = integrate(f, [W0, 0.0], (0.0, s_max), TIGHT, [ev])
    W = tr.y[:, 0]
    cw = np.cos(W)
    v = k * (cw + sign * np.sqrt(np.maximum(cw * cw - a * a, 0.0)))
    R2 = 0.5 * xi_norm2 * np.exp(2 * k * tr.y[:, 1])
    r = 2 * rho0 ** 2 * v / R2
    xs = np.linspace(a, 1.0, 2001)
    rate = k * np.min(3 * xs + sign * np.sqrt(np.maximum(xs * xs - a * a, 0.0)))
    c_end = math.cos(tr.y_final[0])
    return SingularBranchReport(tr, sign, tr.s_final if tr.termination == "event-stop" else math.inf,
                                float(r.min()), float(rate), math.sqrt(max(c_end * c_end - a * a, 0.0)))


# ----------------------------------------------------------------------
# positive gap


def pw_rhs_deltapos(P, W, lam: float, rho0: float):
    """``(P', W')`` of the positive-gap constant-``rho`` flow."""
    b = beta_of(lam, rho0)
    k = lam * rho0
    t = np.tanh(P)
    cw = np.cos(W)
    return (2 * k * np.sin(W),
            k * (2 / t + t) * cw + k * np.sqrt(t * t * cw * cw + b * b))


def desingularized_field(P, W, beta: float):
    """``tanh(P)/(lam rho0)`` times the flow; smooth across ``P = 0``."""
    t = np.tanh(P)
    cw = np.cos(W)
    return (2 * t * np.sin(W), (2 + t * t) * cw + t * np.sqrt(t * t * cw * cw + beta * beta))


def desingularized_jacobian(P: float, W: float, beta: float) -> np.ndarray:
    t = math.tanh(P)
    sech2 = 1 - t * t
    cw, sw = math.cos(W), math.sin(W)
    S = math.sqrt(t * t * cw * cw + beta * beta)
    return np.array([
        [2 * sech2 * sw, 2 * t * cw],
        [sech2 * (2 * t * cw + S + t * t * cw * cw / S), -(2 + t * t) * sw - t ** 3 * cw * sw / S],
    ])


def deltapos_flow(lam: float, rho0: float):
    """Field on ``(P, W, int tanh(P/2) cos W, int coth(P/2) cos W, int coth(P) cos W)``."""
    b2 = beta_of(lam, rho0) ** 2
    k = lam * rho0

    def f(s, y):
        P, W = y[0], y[1]
        if not P > 0:
            raise SingularStateError("P <= 0")
        t = math.tanh(P)
        cw, sw = math.cos(W), math.sin(W)
        t2 = math.tanh(0.5 * P)
        return np.array([2 * k * sw,
                         k * (2 / t + t) * cw + k * math.sqrt(t * t * cw * cw + b2),
                         t2 * cw, cw / t2, cw / t])

    return f


def pseudo_flow(lam: float, rho0: float):
    """Desingularized field on ``(P, W, s)`` in pseudo-time; ``ds/dtau = tanh(P)/(lam rho0)``."""
    b = beta_of(lam, rho0)
    k = lam * rho0

    def f(tau, y):
        X1, X2 = desingularized_field(y[0], y[1], b)
        return np.array([X1, X2, math.tanh(y[0]) / k])

    return f


def induced_r_deltapos(P, W, lam: float, rho0: float, delta0: float):
    b = beta_of(lam, rho0)
    t = np.tanh(P)
    cw = np.cos(W)
    return 4 * lam * rho0 ** 3 * (t * cw + np.sqrt(t * t * cw * cw + b * b)) / (delta0 ** 2 * np.cosh(P))


def deltapos_fields_from_flow(lam, rho0, delta0, W0, arg_c0, s, y, P0) -> FamilySample:
    y = np.atleast_2d(y)
    P, W = y[:, 0], y[:, 1]
    k = lam * rho0
    xi0 = xi0_deltapos(delta0, P0, W0, arg_c0)
    z = rho0 * np.exp(1j * (2 * k * y[:, 4] - W + W0))
    c = delta0 * np.cosh(P / 2) * np.exp(1j * (k * y[:, 2] + np.angle(xi0.c)))
    h = delta0 * np.sinh(P / 2) * np.exp(1j * (k * y[:, 3] + np.angle(xi0.h)))
    r = induced_r_deltapos(P, W, lam, rho0, delta0)
    return FamilySample(np.asarray(s, dtype=float), z, c, h, r,
                        {"family": "constant-rho-deltapos", "lam": lam, "rho0": rho0, "delta0": delta0,
                         "P": P, "W": W})


def deltapos_family(lam: float, rho0: float, P0: float, W0: float, s, delta0: float = 1.0,
                    arg_c0: float = 0.0, config: IntegratorConfig = TIGHT) -> FamilySample:
    if not P0 > 0 or not delta0 > 0:
        raise InvalidInputError("need P0 > 0 and delta0 > 0")
    s = np.asarray(s, dtype=float)
    lo, hi = min(float(s.min()), 0.0), max(float(s.max()), 0.0)
    tr = integrate_two_sided(deltapos_flow(lam, rho0), [P0, W0, 0.0, 0.0, 0.0], 0.0,
                             (lo - 1e-9, hi + 1e-9), config)
    out = deltapos_fields_from_flow(lam, rho0, delta0, W0, arg_c0, s, tr(s), P0)
    out.meta["terminations"] = list(tr.terminations)
    return out


def fixed_point_residual_deltapos(lam: float, rho0: float) -> float:
    dP, dW = pw_rhs_deltapos(p_infinity(lam, rho0), math.pi, lam, rho0)
    return float(max(abs(dP), abs(dW)))


def linearized_period(lam: float, rho0: float) -> float:
    """Small-oscillation period about ``(P_inf, pi)``."""
    P = p_infinity(lam, rho0)
    b = beta_of(lam, rho0)
    t = math.tanh(P)
    sech2 = 1 - t * t
    S = math.sqrt(t * t + b * b)
    a = lam * rho0 * (2 / math.sinh(P) ** 2 - sech2 + t * sech2 / S)
    return TWO_PI / math.sqrt(2 * lam * rho0 * a)


@dataclass
class SeparatrixCrossing:
    value: float
    value_half: float
    eps: float
    s_physical: float
    tau: float
    pseudo_time: bool = True


def _launch_unstable(lam, rho0, eps, tau_max=200.0):
    b = beta_of(lam, rho0)
    y0 = [eps, math.pi / 2 + eps * b / 4, 0.0]
    ev = EventSpec(lambda t, y: y[1] - math.pi, "rising", "stop", "W=pi")
    return integrate(pseudo_flow(lam, rho0), y0, (0.0, tau_max), TIGHT, [ev])


def _launch_stable(lam, rho0, eps, tau_max=200.0):
    b = beta_of(lam, rho0)
    y0 = [eps, 1.5 * math.pi - eps * b / 4, 0.0]
    ev = EventSpec(lambda t, y: y[1] - math.pi, "falling", "stop", "W=pi")
    return integrate(pseudo_flow(lam, rho0), y0, (0.0, -tau_max), TIGHT, [ev])


def p_crit(lam: float, rho0: float, eps: float = 1e-6, tol: float = 1e-4) -> SeparatrixCrossing:
    """``P`` where the unstable separatrix leaving ``(0, pi/2)`` meets ``W = pi``.

    The separatrix is traced in pseudo-time with the desingularized field;
    the launch offsets ``eps`` and ``eps/2`` must agree to ``tol``.
    """
    rc = rho_crit(lam)
    if not 0 < rho0 < rc:
        raise InvalidInputError(f"P_crit needs 0 < rho0 < rho_crit = {rc:.17g}")
    vals = []
    for e in (eps, eps / 2):
        tr = _launch_unstable(lam, rho0, e)
        if tr.termination != "event-stop":
            raise AccuracyError(f"separatrix did not reach W = pi ({tr.termination})")
        vals.append(tr)
    a, b = vals[0].y_final[0], vals[1].y_final[0]
    if abs(a - b) > tol:
        raise AccuracyError(f"P_crit launch offsets disagree: {a} vs {b}")
    return SeparatrixCrossing(float(b), float(a), eps, float(vals[1].y_final[2]), vals[1].s_final)


@dataclass
class SeparatrixTopology:
    rho0: float
    unstable_crosses_pi: bool
    stable_crosses_pi: bool
    P_unstable: float | None
    P_stable: float | None
    reflection_error: float
    unstable_W_range: tuple[float, float]


def separatrix_topology(lam: float, rho0: float, eps: float = 1e-6, tau_max: float = 60.0,
                        n: int = 200) -> SeparatrixTopology:
    """Trace ``U+`` forward and ``S+`` backward and compare ``S+`` with the
    reflection ``(P, W) -> (P, 2 pi - W)`` of ``U+``."""
    tu = _launch_unstable(lam, rho0, eps, tau_max)
    ts = _launch_stable(lam, rho0, eps, tau_max)
    tau_u = tu.s_final
    tau_s = -ts.s_final
    m = min(tau_u, tau_s)
    grid = np.linspace(0.0, m, n)
    yu = tu(grid)
    ys = ts(-grid)
    err = float(np.max(np.hypot(yu[:, 0] - ys[:, 0], (TWO_PI - yu[:, 1]) - ys[:, 1])))
    return SeparatrixTopology(
        rho0,
        tu.termination == "event-stop",
        ts.termination == "event-stop",
        float(tu.y_final[0]) if tu.termination == "event-stop" else None,
        float(ts.y_final[0]) if ts.termination == "event-stop" else None,
        err,
        (float(tu.y[:, 1].min()), float(tu.y[:, 1].max())),
    )


@dataclass
class F1F2:
    P0: float
    T: float
    f1: float
    f2: float
    kind: str
    closure: float
    winding: int | None
    trajectory: Trajectory


def _winding(P, W, center) -> int:
    ang = np.unwrap(np.arctan2(W - center[1], P - center[0]))
    return int(round((ang[-1] - ang[0]) / TWO_PI))


def f1_f2_deltapos(lam: float, rho0: float, P0: float, P_crit: float | None = None,
                   guard: float = 1e-9) -> F1F2:
    """Period and phase integrals of the orbit through ``(P0, pi)``.

    Bounded orbits (``P0 < P_crit``) stop at the second crossing of
    ``W = pi``; drift orbits stop at ``W = 3 pi``.
    """
    Pinf = p_infinity(lam, rho0)
    Pc = p_crit(lam, rho0).value if P_crit is None else P_crit
    if not P0 > 0:
        raise InvalidInputError("P0 must be positive")
    if abs(P0 - Pinf) <= guard or abs(P0 - Pc) <= guard:
        raise DegenerateInputError("P0 sits on P_inf or P_crit")
    k = lam * rho0
    fl = deltapos_flow(lam, rho0)
    y0 = np.array([P0, math.pi, 0.0, 0.0, 0.0])
    w_rate = fl(0.0, y0)[1]
    if P0 < Pc:
        kind = "bounded"
        direction = "rising" if w_rate > 0 else "falling"
        ev = EventSpec(lambda s, y: y[1] - math.pi, direction, "stop", "W=pi")
    else:
        kind = "drift"
        ev = EventSpec(lambda s, y: y[1] - 3 * math.pi, "rising", "stop", "W=3pi")
    s_max = 50 * linearized_period(lam, rho0) + 500.0
    tr = integrate(fl, y0, (0.0, s_max), TIGHT, [ev])
    if tr.termination != "event-stop":
        raise AccuracyError(f"no period detected ({tr.termination})")
    T = tr.s_final
    yT = tr.y_final
    if kind == "bounded":
        closure = float(max(abs(yT[0] - P0), abs(yT[1] - math.pi)))
        wind = _winding(tr.y[:, 0], tr.y[:, 1], (Pinf, math.pi))
    else:
        closure = float(max(abs(yT[0] - P0), abs(yT[1] - 3 * math.pi)))
        wind = None
    return F1F2(P0, T, k * yT[2] / TWO_PI, k * yT[3] / TWO_PI, kind, closure, wind, tr)


def drift_periodicity_error(lam: float, rho0: float, P0: float, T: float,
                            sample_s: Sequence[float] = (0.3, 1.7, 4.1)) -> float:
    pts = np.asarray(sample_s, dtype=float)
    tr = integrate(deltapos_flow(lam, rho0), [P0, math.pi, 0.0, 0.0, 0.0],
                   (0.0, T + pts.max() + 1e-6), TIGHT)
    a, b = tr(pts), tr(pts + T)
    return float(max(np.max(np.abs(b[:, 0] - a[:, 0])), np.max(np.abs(b[:, 1] - a[:, 1] - TWO_PI))))


def classify_deltapos(lam: float, rho0: float, P0: float, W0: float = math.pi,
                      tol: float = 1e-9) -> OrbitClass:
    """Class of the orbit through ``(P0, W0)``; only ``W0 = pi`` is classified fully."""
    rc = rho_crit(lam)
    if rho0 > 1:
        return OrbitClass("singular", {})
    if rho0 >= rc or abs(math.remainder(W0 - math.pi, TWO_PI)) > 1e-12:
        return OrbitClass("global-oscillatory", {"note": "not a W0 = pi orbit below rho_crit"})
    Pinf = p_infinity(lam, rho0)
    Pc = p_crit(lam, rho0).value
    if abs(P0 - Pinf) <= tol:
        return OrbitClass("constant-fixed-point", {"P_inf": Pinf, "T_lin": linearized_period(lam, rho0)})
    if abs(P0 - Pc) <= tol:
        return OrbitClass("separatrix-unstable", {"P_crit": Pc})
    res = f1_f2_deltapos(lam, rho0, P0, Pc)
    tag = "periodic" if res.kind == "bounded" else "drift-periodic"
    return OrbitClass(tag, {"T": res.T, "f1": res.f1, "f2": res.f2, "P_crit": Pc})


# rational fixed points

@dataclass
class RationalFixedPoint:
    lam: float
    p: int
    q: int
    rho0: float
    P0: float
    delta0: float
    r: float
    radius_s1: float
    radius_s2: float
    stationarity_residual: float
    reference_rho0: tuple[float, ...]
    reference_radii: tuple[float, float]
    arg_c0: float = 0.0

    @property
    def t_scale(self) -> float:
        """``t = t_scale * s``."""
        return self.lam * self.rho0 / math.sqrt(self.p * self.q)

    def fields_t(self, t) -> FamilySample:
        t = np.asarray(t, dtype=float)
        p, q, d = self.p, self.q, self.delta0
        z = self.rho0 * np.exp(-1j * (p + q) * t)
        c = d * math.sqrt(q / (q - p)) * np.exp(-1j * p * t + 1j * self.arg_c0)
        h = -d * math.sqrt(p / (q - p)) * np.exp(-1j * q * t - 1j * self.arg_c0)
        return FamilySample(t / self.t_scale, z, c, h, np.full_like(t, self.r),
                            {"family": "rational-fp", "p": p, "q": q, "t": t})

    def fields(self, s) -> FamilySample:
        return self.fields_t(self.t_scale * np.asarray(s, dtype=float))

    def report(self) -> dict:
        rc = rho_crit(self.lam)
        return {
            "p": self.p, "q": self.q, "lam": self.lam,
            "rho0": self.rho0, "inv_rho0_sq": 1 / self.rho0 ** 2,
            "reference_rho0": list(self.reference_rho0),
            "reference_inv_rho0_sq": [1 / x ** 2 for x in self.reference_rho0],
            "reference_matches": any(abs(x - self.rho0) <= 1e-12 for x in self.reference_rho0),
            "reference_gap_values": [1 / x ** 2 - 1 / rc ** 2 for x in self.reference_rho0],
            "radius_s1": self.radius_s1, "radius_s2": self.radius_s2,
            "reference_radii": list(self.reference_radii),
            "reference_radii_ratio": [self.radius_s1 / self.reference_radii[0],
                                      self.radius_s2 / self.reference_radii[1]],
            "stationarity_residual": self.stationarity_residual,
        }


def reference_rho0_display(lam: float, p: int, q: int) -> tuple[float, ...]:
    """Both roots of the reference closed form for ``rho0(lam, p/q)`` (empty if ``q/p < 2 sqrt 3``)."""
    disc = (q / p) ** 2 - 12
    if disc < 0:
        return ()
    out = []
    for sgn in (1, -1):
        out.append((1 + (2 * lam * lam / 3) * (q / p + 9 + sgn * 0.5 * math.sqrt(disc))) ** -0.5)
    return tuple(out)


def rational_fixed_point(lam: float, p: int, q: int, delta0: float = 1.0, arg_c0: float = 0.0,
                         tol: float = 1e-12) -> RationalFixedPoint:
    """Stationary positive-gap solution with ``tanh^2(P0/2) = p/q``.

    ``rho0`` follows from ``coth P_inf(rho0) = coth P0``; the result is
    refused unless ``(P0, pi)`` is a zero of the flow to ``tol``.
    """
    _check_lam(lam)
    if not (0 < p < q) or math.gcd(p, q) != 1:
        raise InvalidInputError("need coprime 0 < p < q")
    if not delta0 > 0:
        raise InvalidInputError("delta0 must be positive")
    P0 = 2 * math.atanh(math.sqrt(p / q))
    inv = 1 / rho_crit(lam) ** 2 + lam * lam * (q - p) ** 2 / (p * q)
    rho0 = 1 / math.sqrt(inv)
    dP, dW = pw_rhs_deltapos(P0, math.pi, lam, rho0)
    res = float(max(abs(dP), abs(dW)))
    if not res <= tol:
        raise AccuracyError(f"stationarity check failed: residual {res:.3e}")
    r = float(induced_r_deltapos(P0, math.pi, lam, rho0, delta0))
    rc = rho_crit(lam)
    gap = math.sqrt(1 - rho0 ** 2 / rc ** 2)
    ref = (2 * math.sqrt(p * q) / (lam * delta0) * gap, 2 * rho0 / delta0 * gap)
    return RationalFixedPoint(lam, p, q, rho0, P0, delta0, r, r * math.sqrt(p * q) / (lam * rho0), r,
                              res, reference_rho0_display(lam, p, q), ref, arg_c0)


# rho0 = 1, positive gap

@dataclass
class Rho1DeltaPos:
    s: np.ndarray
    P: np.ndarray
    W: np.ndarray
    r: np.ndarray
    sample: FamilySample | None


def closed_form_rho1_deltapos(lam: float, P0: float, W0: float, s, delta0: float = 1.0,
                              arg_c0: float = 0.0, fields: bool = True) -> Rho1DeltaPos:
    """Explicit positive-gap family with ``rho = 1`` (needs ``cos W0 > 0``)."""
    _check_lam(lam)
    if not (P0 > 0 and delta0 > 0):
        raise InvalidInputError("need P0 > 0 and delta0 > 0")
    if not math.tanh(P0) * math.cos(W0) > 0 or not abs(W0) < math.pi / 2:
        raise InvalidInputError("rho0 = 1 family needs tanh(P0) cos(W0) > 0 with |W0| < pi/2")
    s = np.asarray(s, dtype=float)
    g0 = math.atanh(math.sin(W0) * math.tanh(2 * P0))
    K = math.sqrt(1 + (math.cos(W0) * math.sinh(2 * P0)) ** 2)

    def PW(x):
        g = g0 + 4 * lam * x
        P = 0.5 * np.arccosh(K * np.cosh(g))
        W = np.arcsin(np.sinh(g) / np.sqrt(np.cosh(g) ** 2 - 1 / K ** 2))
        return P, W

    P, W = PW(s)
    r = 8 * lam * np.tanh(P) * np.cos(W) / (delta0 ** 2 * np.cosh(P))
    sample = None
    if fields:
        def integrand(kind):
            def fn(x):
                Pp, Wp = PW(x)
                cw = np.cos(Wp)
                if kind == "t":
                    return np.tanh(Pp / 2) * cw
                if kind == "ct":
                    return cw / np.tanh(Pp / 2)
                return cw / np.tanh(Pp)
            return fn
        At = cumulative_integral(integrand("t"), s)
        Act = cumulative_integral(integrand("ct"), s)
        Ac = cumulative_integral(integrand("c"), s)
        xi0 = xi0_deltapos(delta0, P0, W0, arg_c0)
        z = np.exp(1j * (2 * lam * Ac - W + W0))
        c = delta0 * np.cosh(P / 2) * np.exp(1j * (lam * At + np.angle(xi0.c)))
        h = delta0 * np.sinh(P / 2) * np.exp(1j * (lam * Act + np.angle(xi0.h)))
        sample = FamilySample(s, z, c, h, r, {"family": "rho1-deltapos", "lam": lam, "P0": P0, "W0": W0,
                                              "delta0": delta0, "P": P, "W": W})
    return Rho1DeltaPos(s, P, W, r, sample)


# rational (f1, f2) search

def deltapos_closure_error(lam: float, rho0: float, P0: float, q: int, T: float,
                           test_points: Sequence[float] = (0.0, 0.37, 1.21), delta0: float = 1.0) -> float:
    """``max |x(s + qT) - x(s)|`` for ``x = (z, c, h, r)`` on the orbit through ``(P0, pi)``.

    The orbit is integrated over one period; later periods repeat ``(P, W)``
    and add ``q`` times the one-period phase integrals.
    """
    pts = np.asarray(test_points, dtype=float)
    tr = integrate(deltapos_flow(lam, rho0), [P0, math.pi, 0.0, 0.0, 0.0],
                   (0.0, T + pts.max() + 1e-6), TIGHT)
    if tr.termination != "reached-end":
        raise AccuracyError(tr.termination)
    ya = tr(pts)
    yT = tr(np.array([T]))[0]
    yb = tr(pts + T)
    shift = (q - 1) * (yT - np.array([P0, math.pi, 0.0, 0.0, 0.0]))
    yb = yb + shift
    both = np.concatenate([ya, yb])
    fs = deltapos_fields_from_flow(lam, rho0, delta0, math.pi, 0.0, np.concatenate([pts, pts + q * T]),
                                   both, P0)
    n = len(pts)
    return max(float(np.max(np.abs(arr[n:] - arr[:n]))) for arr in (fs.z, fs.c, fs.h, fs.r))


@dataclass
class PeriodicPair:
    rho0: float
    P0: float
    f1: Fraction
    f2: Fraction
    T: float
    closure: float | None

    @property
    def q(self) -> int:
        return math.lcm(self.f1.denominator, self.f2.denominator)

    @property
    def minimal_period(self) -> float:
        return self.q * self.T


def find_periodic_deltapos(lam: float, branch: str, rho_range: tuple[float, float],
                           P_range: tuple[float, float], qmax: int = 64, n_P: int = 6,
                           check_closure: bool = True, max_candidates: int = 1) -> list[PeriodicPair]:
    """Pairs ``(rho0, P0)`` with ``f1 = p1/q1`` and ``f2 = p2/q2``.

    A target ``p1/q1`` is taken from the convergents of ``f1`` sampled at
    the two ends of the ``rho0`` range; for each ``P0`` on a grid the
    ``rho0`` with ``f1 = p1/q1`` is solved for, and ``f2`` along that curve
    is then solved for its own convergent targets.
    """
    if branch not in ("deltapos-drift", "deltapos-bounded"):
        raise InvalidInputError(f"unknown branch {branch!r}")
    rc = rho_crit(lam)
    a, b = rho_range
    if not 0 < a < b:
        raise InvalidInputError("empty scan range")
    b = min(b, rc * (1 - 1e-3))
    lo, hi = P_range
    if branch == "deltapos-drift":
        lo = max(lo, p_crit(lam, b).value * 1.01)
        sentinel = 0.0
    else:
        hi = min(hi, p_infinity(lam, a) * 0.99)
        sentinel = math.inf
    if not lo < hi:
        raise InvalidInputError("empty P0 window for this branch")

    def f12(rho0, P0):
        res = f1_f2_deltapos(lam, rho0, P0, sentinel)
        return res.f1, res.f2, res.T

    Pmid = 0.5 * (lo + hi)
    fa, fb = f12(a, Pmid)[0], f12(b, Pmid)[0]
    t1s = _targets_between(fa, fb, [fa, fb, 0.5 * (fa + fb)], qmax)
    if not t1s:
        return []
    t1 = min(t1s, key=lambda fr: (fr.denominator, abs(float(fr) - 0.5 * (fa + fb))))

    def rho_star(P0):
        g = lambda r: f12(r, P0)[0] - float(t1)
        ga, gb = g(a), g(b)
        if ga * gb > 0:
            return None
        return brentq(g, a, b, xtol=1e-13)

    grid = np.linspace(lo, hi, n_P)
    curve = []
    for P in grid:
        r = rho_star(P)
        if r is not None:
            curve.append((P, r, f12(r, P)[1]))
    f2s = [c[2] for c in curve]
    jobs = []
    for (Pa, _, fa2), (Pb, _, fb2) in zip(curve[:-1], curve[1:]):
        for t2 in _targets_between(fa2, fb2, f2s, qmax):
            jobs.append((t2.denominator, Pa, Pb, t2))
    jobs.sort(key=lambda j: (j[0], j[1]))
    out = []
    for _, Pa, Pb, t2 in jobs[:max_candidates]:
        def g2(P):
            r = rho_star(P)
            if r is None:
                raise NotFoundError("f1 target left the rho0 range")
            return f12(r, P)[1] - float(t2)
        P = brentq(g2, Pa, Pb, xtol=1e-12)
        r = rho_star(P)
        f1, f2, T = f12(r, P)
        pair = PeriodicPair(r, P, t1, t2, T, None)
        if check_closure:
            pair.closure = deltapos_closure_error(lam, r, P, pair.q, T)
        out.append(pair)
    return out
