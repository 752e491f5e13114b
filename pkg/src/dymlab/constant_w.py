"""Solution families with constant phase ``W = W0``.

Writing ``x = rho^{-2}`` turns the Yang-Mills equation into an autonomous
second-order equation.  With zero gap it is planar, with a saddle at
``(alpha, 0)``; with positive gap ``P`` joins as a third variable.  The
constant ``alpha`` here is unrelated to the metric coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .constant_rho import OrbitClass, rho_crit
from .dynamics import FamilySample, xi0_delta0, xi0_deltapos
from .errors import InvalidInputError, SingularStateError
from .integrate import EventSpec, IntegratorConfig, Trajectory, integrate
from .quadrature import cumulative_integral

SQRT2 = math.sqrt(2.0)

#: settings for the x-chart; x grows exponentially on global orbits
XCONFIG = IntegratorConfig(rtol=1e-11, atol=1e-13, blowup_norm=math.inf)

#: x below this is treated as the rho -> infinity singularity
X_SINGULAR = 1e-8


@dataclass(frozen=True)
class ConstantWParams:
    lam: float
    W0: float
    gap: bool
    beta: float
    alpha: float
    mu: float | None
    kappa: float | None

    @classmethod
    def make(cls, lam: float, W0: float, gap: bool = False) -> "ConstantWParams":
        if not lam > 0:
            raise InvalidInputError("lambda must be positive")
        if not math.pi / 2 < W0 <= math.pi:
            raise InvalidInputError("constant W needs pi/2 < W0 <= pi")
        beta = lam * math.sin(W0)
        cw2 = math.cos(W0) ** 2
        if gap:
            alpha = 1 + 4 * lam * lam * cw2
            mu = -math.tan(W0)
            return cls(lam, W0, True, beta, alpha, mu, math.sqrt(mu * mu + 8))
        return cls(lam, W0, False, beta, 1 + 8 * lam * lam * cw2, None, None)


# ----------------------------------------------------------------------
# zero gap


def x_rhs_delta0(x: float, y: float, beta: float, alpha: float) -> tuple[float, float]:
    if not x > 0:
        raise SingularStateError("x <= 0")
    return y, -2 * beta * y / math.sqrt(x) + 2 * (x - alpha)


def x_field_delta0(beta: float, alpha: float):
    """Field on ``(x, y, int rho)``."""

    def f(s, u):
        x, y = u[0], u[1]
        if not x > 0:
            raise SingularStateError("x <= 0")
        rho = 1 / math.sqrt(x)
        return np.array([y, -2 * beta * rho * y + 2 * (x - alpha), rho])

    return f


def normal_flux(x, nu: float, beta: float, alpha: float):
    """``<F, (nu, -1)>`` on the ray ``y = nu (x - alpha)``, in closed form."""
    x = np.asarray(x, dtype=float)
    return (nu * nu + 2 * beta * nu / np.sqrt(x) - 2) * (x - alpha)


@dataclass(frozen=True)
class SaddleData:
    point: tuple[float, float]
    mu_plus: float
    mu_minus: float
    v_plus: tuple[float, float]
    v_minus: tuple[float, float]
    nu_plus: float
    nu_minus: float


def saddle_data(beta: float, alpha: float) -> SaddleData:
    if not alpha >= 1:
        raise InvalidInputError("need alpha >= 1")
    a = beta / math.sqrt(alpha)
    root = math.sqrt(a * a + 2)
    mp, mm = -a + root, -a - root
    return SaddleData((alpha, 0.0), mp, mm, (1.0, mp), (1.0, mm), SQRT2, mm - 1.0)


def fd_jacobian_delta0(beta: float, alpha: float, x: float, y: float, h: float = 1e-6) -> np.ndarray:
    J = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((h, 0.0), (0.0, h))):
        a = np.array(x_rhs_delta0(x + dx, y + dy, beta, alpha))
        b = np.array(x_rhs_delta0(x - dx, y - dy, beta, alpha))
        J[:, j] = (a - b) / (2 * h)
    return J


def in_D_plus(x, y, alpha: float, nu_plus: float = SQRT2) -> bool:
    return bool(x >= alpha and 0 <= y <= nu_plus * (x - alpha))


def in_D_minus(x, y, alpha: float, nu_minus: float) -> bool:
    return bool(x >= alpha and nu_minus * (x - alpha) <= y <= 0)


def _x_events(x_big: float):
    return [EventSpec(lambda s, u: u[0] - X_SINGULAR, "falling", "stop", "x->0"),
            EventSpec(lambda s, u: u[0] - x_big, "rising", "stop", "x->inf")]


def run_x_delta0(beta: float, alpha: float, x0: float, y0: float, s_end: float,
                 x_big: float = math.inf, config: IntegratorConfig = XCONFIG) -> Trajectory:
    evs = _x_events(x_big) if math.isfinite(x_big) else _x_events(1e300)[:1]
    return integrate(x_field_delta0(beta, alpha), [x0, y0, 0.0], (0.0, s_end), config, evs)


def _end_state(tr: Trajectory) -> str:
    if tr.termination == "event-stop":
        return "singular" if tr.message == "x->0" else "escape"
    if tr.termination == "reached-end":
        return "reached-end"
    return "singular"


def classify_orbit_delta0(x0: float, y0: float, beta: float, alpha: float, s_max: float = 40.0,
                          x_big: float = 1e10, tol: float = 1e-9, sep_tol: float = 1e-6) -> OrbitClass:
    """Orbit type of the planar flow through ``(x0, y0)``.

    Orbits escaping to ``x = inf`` in both directions are global; orbits
    converging to the saddle forward (backward) lie on its stable
    (unstable) manifold; orbits reaching ``x = 0`` are singular.
    """
    if not x0 > 0:
        raise InvalidInputError("x0 must be positive")
    if math.hypot(x0 - alpha, y0) <= tol:
        return OrbitClass("constant-fixed-point", {"point": (alpha, 0.0)})
    fw = run_x_delta0(beta, alpha, x0, y0, s_max, x_big)
    bw = run_x_delta0(beta, alpha, x0, y0, -s_max, x_big)
    ends = (_end_state(bw), _end_state(fw))
    diag = {"ends": ends, "s_range": (bw.s_final, fw.s_final)}
    dist_f = math.hypot(fw.y_final[0] - alpha, fw.y_final[1])
    dist_b = math.hypot(bw.y_final[0] - alpha, bw.y_final[1])
    if ends[1] == "reached-end" and dist_f <= sep_tol:
        return OrbitClass("separatrix-stable", diag)
    if ends[0] == "reached-end" and dist_b <= sep_tol:
        return OrbitClass("separatrix-unstable", diag)
    if "singular" in ends:
        diag["s_singular"] = [tr.s_final for tr, e in zip((bw, fw), ends) if e == "singular"]
        return OrbitClass("singular", diag)
    return OrbitClass("global-bounded", diag)


def _r_delta0(rho, I, p: ConstantWParams, xi_norm2: float):
    return -8 * p.lam * math.cos(p.W0) * rho ** 3 * np.exp(-2 * p.beta * I) / xi_norm2


def _fields_delta0(p: ConstantWParams, s, rho, I, c0) -> FamilySample:
    xi0 = xi0_delta0(c0, p.W0)
    n2 = float(xi0.norm2())
    z = rho * np.exp(2j * p.lam * math.cos(p.W0) * I)
    g = np.exp(1j * p.lam * np.exp(-1j * p.W0) * I)
    return FamilySample(np.asarray(s, dtype=float), z, xi0.c * g, xi0.h * g, _r_delta0(rho, I, p, n2),
                        {"family": "constant-w-delta0", "lam": p.lam, "W0": p.W0})


def x0_prime_delta0(p: ConstantWParams, U0: float, xi_norm2: float) -> float:
    """``x'(0) = -2 r0 U0 / rho0^3`` with ``r0`` forced by ``W' = 0``."""
    return 16 * p.lam * math.cos(p.W0) * U0 / xi_norm2


def constant_w_delta0_family(lam: float, W0: float, rho0: float, U0: float, s,
                             c0: complex = 1.0) -> FamilySample:
    """Numerically integrated zero-gap constant-``W`` fields sampled on ``s``."""
    p = ConstantWParams.make(lam, W0)
    n2 = float(xi0_delta0(c0, W0).norm2())
    s = np.asarray(s, dtype=float)
    u0 = [rho0 ** -2, x0_prime_delta0(p, U0, n2), 0.0]
    f = x_field_delta0(p.beta, p.alpha)
    out = np.empty((len(s), 3))
    terms = []
    for side in (s >= 0, s < 0):
        if not side.any():
            continue
        end = float(s[side].max() if s[side].max() > 0 else s[side].min())
        if end == 0.0:
            out[side] = u0
            continue
        tr = integrate(f, u0, (0.0, end + math.copysign(1e-9, end)), XCONFIG, _x_events(1e300)[:1])
        terms.append(tr.termination)
        if tr.termination != "reached-end":
            raise SingularStateError(f"orbit is singular at s = {tr.s_final:.6g}")
        out[side] = tr(s[side])
    fs = _fields_delta0(p, s, out[:, 0] ** -0.5, out[:, 2], c0)
    fs.meta["terminations"] = terms
    return fs


@dataclass
class ClosedFormW0Pi:
    s: np.ndarray
    rho: np.ndarray
    x: np.ndarray
    global_: bool
    blowup_s: tuple[float | None, float | None]
    sample: FamilySample | None
    params: dict = field(default_factory=dict)


def _cosh_sinh_roots(A: float, B: float, C: float, s_max: float = 60.0) -> tuple[float | None, float | None]:
    """First negative and positive zero of ``A cosh(sqrt2 s) + B sinh(sqrt2 s) + C``."""
    ep, em = 0.5 * (A + B), 0.5 * (A - B)
    g = lambda s: ep * math.exp(SQRT2 * s) + em * math.exp(-SQRT2 * s) + C
    out = []
    for sign in (-1, 1):
        grid = np.linspace(0.0, sign * s_max, 6001)
        vals = ep * np.exp(SQRT2 * grid) + em * np.exp(-SQRT2 * grid) + C
        idx = np.nonzero(vals <= 0)[0]
        if len(idx) == 0:
            out.append(None)
            continue
        k = idx[0]
        out.append(brentq(g, grid[k - 1], grid[k], xtol=1e-14) if k > 0 else 0.0)
    return out[0], out[1]


def _w0pi_profile(x0, dx0, a_eq, s):
    A = x0 - a_eq
    B = dx0 / SQRT2

    ep, em = 0.5 * (A + B), 0.5 * (A - B)

    def xf(t):
        return a_eq + ep * np.exp(SQRT2 * t) + em * np.exp(-SQRT2 * t)

    lo, hi = _cosh_sinh_roots(A, B, a_eq)
    return xf, (lo, hi), lo is None and hi is None


def globality_delta0_w0pi(lam: float, rho0: float, U0: float, xi_norm2: float) -> dict:
    """Globality of the zero-gap ``W0 = pi`` orbit by the derivative-consistent bound.

    ``r0 |U0| <= rho0 (1 - rho0^2/rho_crit^2) / sqrt 2``; the reference
    form with ``sqrt 2`` in the numerator is reported alongside.
    """
    rc = rho_crit(lam)
    r0 = 8 * lam * rho0 ** 3 / xi_norm2
    gap = 1 - rho0 ** 2 / rc ** 2
    lhs = r0 * abs(U0)
    return {"r0": r0, "lhs": lhs, "bound": rho0 * gap / SQRT2, "reference_bound": SQRT2 * rho0 * gap,
            "global": gap >= 0 and lhs <= rho0 * gap / SQRT2,
            "reference_global": gap >= 0 and lhs <= SQRT2 * rho0 * gap}


def closed_form_W0pi_delta0(lam: float, rho0: float, U0: float, s, c0: complex = 1.0,
                            fields: bool = True) -> ClosedFormW0Pi:
    """Explicit zero-gap solution with ``W = pi``.

    ``x = alpha + (x0 - alpha) cosh(sqrt2 s) + x0'/sqrt2 sinh(sqrt2 s)`` with
    ``x0' = -2 r0 U0 / rho0^3``.  When ``x`` has a zero the blow-up points
    are reported and fields are only produced if ``s`` avoids them.
    """
    p = ConstantWParams.make(lam, math.pi)
    xi0 = xi0_delta0(c0, math.pi)
    n2 = float(xi0.norm2())
    if not (rho0 > 0 and n2 > 0):
        raise InvalidInputError("need rho0 > 0 and xi0 != 0")
    s = np.asarray(s, dtype=float)
    dx0 = x0_prime_delta0(p, U0, n2)
    xf, blow, glob = _w0pi_profile(rho0 ** -2, dx0, p.alpha, s)
    x = xf(s)
    inside = np.all(x > 0)
    for b in blow:
        if b is not None and s.min() <= b <= s.max():
            inside = False
    rho = np.where(x > 0, np.abs(x) ** -0.5, np.nan)
    sample = None
    if fields and inside:
        I = cumulative_integral(lambda t: xf(t) ** -0.5, s)
        sample = _fields_delta0(p, s, rho, I, c0)
        sample.meta["family"] = "w0pi-delta0"
    return ClosedFormW0Pi(s, rho, x, glob, blow, sample,
                          {"lam": lam, "rho0": rho0, "U0": U0, "x0_prime": dx0, "alpha": p.alpha,
                           **globality_delta0_w0pi(lam, rho0, U0, n2)})


# ----------------------------------------------------------------------
# positive gap


def x_rhs_deltapos(x: float, y: float, P: float, beta: float, alpha: float) -> tuple[float, float, float]:
    if not x > 0:
        raise SingularStateError("x <= 0")
    if not P > 0:
        raise SingularStateError("P <= 0")
    cth = 1 / math.tanh(P)
    rho = 1 / math.sqrt(x)
    return (y,
            -2 * beta * rho * y * cth - (2 * alpha - 2) * cth * cth + 2 * x - 2 * alpha,
            2 * beta * rho)


def x_field_deltapos(beta: float, alpha: float):
    """Field on ``(x, y, P, int rho tanh(P/2), int rho coth(P/2), int rho coth P)``."""

    def f(s, u):
        x, y, P = u[0], u[1], u[2]
        if not x > 0:
            raise SingularStateError("x <= 0")
        if not P > 0:
            raise SingularStateError("P <= 0")
        cth = 1 / math.tanh(P)
        rho = 1 / math.sqrt(x)
        t2 = math.tanh(0.5 * P)
        return np.array([y,
                         -2 * beta * rho * y * cth - (2 * alpha - 2) * cth * cth + 2 * x - 2 * alpha,
                         2 * beta * rho,
                         rho * t2, rho / t2, rho * cth])

    return f


def induced_r_constant_w_deltapos(rho, P, lam: float, W0: float, delta0: float):
    return -8 * lam * math.cos(W0) * np.asarray(rho) ** 3 / (delta0 ** 2 * np.sinh(P))


def x0_prime_deltapos(p: ConstantWParams, U0: float, P0: float, delta0: float) -> float:
    return 16 * p.lam * math.cos(p.W0) * U0 / (delta0 ** 2 * math.sinh(P0))


def x_crit(P, alpha: float):
    return 2 * alpha - 1 + (alpha - 1) / np.sinh(P) ** 2


def q_zeta(x, y, P, alpha: float):
    """Chart ``Q = x' sinh(P)/2``, ``zeta = (x - x_crit(P)) sinh P``."""
    sh = np.sinh(P)
    return 0.5 * y * sh, (x - x_crit(P, alpha)) * sh


def q_zeta_rhs(Q, zeta, P, beta: float, alpha: float):
    """``(Q', zeta', P')`` in the ``(Q, zeta)`` chart."""
    sh = math.sinh(P)
    x = zeta / sh + x_crit(P, alpha)
    rho = 1 / math.sqrt(x)
    cth = 1 / math.tanh(P)
    return (zeta,
            2 * Q + 2 * beta * rho * cth * (zeta + 2 * (alpha - 1) / sh),
            2 * beta * rho)


def L_value(x, y, P, beta: float, alpha: float):
    """``x - (2 alpha - 1) + x'/sqrt2 + 2 sqrt2 beta sqrt(x) coth P``."""
    return x - (2 * alpha - 1) + y / SQRT2 + 2 * SQRT2 * beta * np.sqrt(x) / np.tanh(P)


def blowup_bound_deltapos(lam: float, W0: float, P0: float) -> float:
    """``rho0`` above which the ``U0 = 0`` orbit reaches ``rho = inf`` forward."""
    p = ConstantWParams.make(lam, W0, gap=True)
    if not P0 > 0:
        raise InvalidInputError("P0 must be positive")
    cth = 1 / math.tanh(P0)
    b = p.beta
    return 1 / (math.sqrt(2 * p.alpha - 1 + 2 * b * b * cth * cth) - SQRT2 * b * cth)


def global_bound_deltapos(lam: float, W0: float, P0: float) -> float:
    """``rho0`` at or below which the ``U0 = 0`` orbit is global (needs ``mu < 1``)."""
    p = ConstantWParams.make(lam, W0, gap=True)
    mu, ka = p.mu, p.kappa
    if not 0 < mu < 1:
        raise InvalidInputError("global bound needs 0 < mu = -tan W0 < 1")
    if not P0 > 0:
        raise InvalidInputError("P0 must be positive")
    extra = (mu * mu + mu * ka + 2) * (p.alpha - 1) / (2 * (1 - mu * mu) * math.sinh(P0) ** 2)
    return (2 * p.alpha - 1 + extra) ** -0.5


@dataclass(frozen=True)
class ComparisonSolution:
    mu: float
    alpha: float
    P0: float
    Q0: float
    zeta0: float
    c1: float
    c2: float

    @property
    def kappa(self) -> float:
        return math.sqrt(self.mu ** 2 + 8)

    def zeta(self, s):
        s = np.asarray(s, dtype=float)
        mu, a, sh = self.mu, self.alpha, math.sinh(self.P0)
        if mu == 1.0:
            return (2 * self.c1 * np.exp(2 * s) - self.c2 * np.exp(-s)
                    - 2 * (a - 1) / (3 * sh) * (1 - s) * np.exp(-s))
        kp, km = (self.kappa + mu) / 2, (self.kappa - mu) / 2
        return (kp * self.c1 * np.exp(kp * s) - km * self.c2 * np.exp(-km * s)
                - mu * mu * (a - 1) / ((mu * mu - 1) * sh) * np.exp(-mu * s))

    def Q(self, s):
        s = np.asarray(s, dtype=float)
        mu, a, sh = self.mu, self.alpha, math.sinh(self.P0)
        if mu == 1.0:
            return (self.c1 * np.exp(2 * s) + self.c2 * np.exp(-s)
                    - 2 * (a - 1) / (3 * sh) * s * np.exp(-s))
        kp, km = (self.kappa + mu) / 2, (self.kappa - mu) / 2
        return (self.c1 * np.exp(kp * s) + self.c2 * np.exp(-km * s)
                + mu * (a - 1) / ((mu * mu - 1) * sh) * np.exp(-mu * s))


def comparison_coefficients(Q0: float, zeta0: float, mu: float, alpha: float, P0: float) -> tuple[float, float]:
    """``(c1, c2)`` from the explicit formulas (``mu != 1``) or a linear solve (``mu = 1``)."""
    sh = math.sinh(P0)
    if mu == 1.0:
        A = -2 * (alpha - 1) / (3 * sh)
        # Q0 = c1 + c2, zeta0 = 2 c1 - c2 + A
        c1 = (Q0 + zeta0 - A) / 3
        return c1, Q0 - c1
    ka = math.sqrt(mu * mu + 8)
    den = 2 * ka * (mu * mu - 1) * sh
    c1 = (ka - mu) / (2 * ka) * Q0 + zeta0 / ka - mu * (ka - 3 * mu) * (alpha - 1) / den
    c2 = (ka + mu) / (2 * ka) * Q0 - zeta0 / ka - mu * (ka + 3 * mu) * (alpha - 1) / den
    return c1, c2


def comparison_solution(Q0: float, zeta0: float, mu: float, alpha: float, P0: float) -> ComparisonSolution:
    if not mu > 0:
        raise InvalidInputError("mu must be positive")
    c1, c2 = comparison_coefficients(Q0, zeta0, mu, alpha, P0)
    return ComparisonSolution(mu, alpha, P0, Q0, zeta0, c1, c2)


def run_x_deltapos(lam: float, W0: float, rho0: float, P0: float, s_end: float, U0: float = 0.0,
                   delta0: float = 1.0, config: IntegratorConfig = XCONFIG,
                   x_big: float = 1e300) -> Trajectory:
    p = ConstantWParams.make(lam, W0, gap=True)
    if not (rho0 > 0 and P0 > 0):
        raise InvalidInputError("need rho0 > 0 and P0 > 0")
    u0 = [rho0 ** -2, x0_prime_deltapos(p, U0, P0, delta0), P0, 0.0, 0.0, 0.0]
    return integrate(x_field_deltapos(p.beta, p.alpha), u0, (0.0, s_end), config, _x_events(x_big))


def _fields_deltapos(p: ConstantWParams, s, rho, P, It, Ict, Ic, delta0, P0, arg_c0) -> FamilySample:
    xi0 = xi0_deltapos(delta0, P0, p.W0, arg_c0)
    cw = math.cos(p.W0)
    z = rho * np.exp(2j * p.lam * cw * Ic)
    c = delta0 * np.cosh(P / 2) * np.exp(1j * (p.lam * cw * It + np.angle(xi0.c)))
    h = delta0 * np.sinh(P / 2) * np.exp(1j * (p.lam * cw * Ict + np.angle(xi0.h)))
    r = induced_r_constant_w_deltapos(rho, P, p.lam, p.W0, delta0)
    return FamilySample(np.asarray(s, dtype=float), z, c, h, r,
                        {"family": "constant-w-deltapos", "lam": p.lam, "W0": p.W0, "delta0": delta0})


def constant_w_deltapos_family(lam: float, W0: float, rho0: float, P0: float, s, U0: float = 0.0,
                               delta0: float = 1.0, arg_c0: float = 0.0) -> FamilySample:
    p = ConstantWParams.make(lam, W0, gap=True)
    s = np.asarray(s, dtype=float)
    out = np.empty((len(s), 6))
    for side in (s >= 0, s < 0):
        if not side.any():
            continue
        end = float(s[side].max() if s[side].max() > 0 else s[side].min())
        if end == 0.0:
            out[side] = [rho0 ** -2, x0_prime_deltapos(p, U0, P0, delta0), P0, 0, 0, 0]
            continue
        tr = run_x_deltapos(lam, W0, rho0, P0, end + math.copysign(1e-9, end), U0, delta0)
        if tr.termination != "reached-end":
            raise SingularStateError(f"orbit ends with {tr.termination} at s = {tr.s_final:.6g}")
        out[side] = tr(s[side])
    rho = out[:, 0] ** -0.5
    return _fields_deltapos(p, s, rho, out[:, 2], out[:, 3], out[:, 4], out[:, 5], delta0, P0, arg_c0)


def closed_form_W0pi_deltapos(lam: float, rho0: float, U0: float, P0: float, s, delta0: float = 1.0,
                              arg_c0: float = 0.0, fields: bool = True) -> ClosedFormW0Pi:
    """Explicit positive-gap solution with ``W = pi`` and ``P = P0``."""
    p = ConstantWParams.make(lam, math.pi, gap=True)
    if not (rho0 > 0 and P0 > 0 and delta0 > 0):
        raise InvalidInputError("need rho0, P0, delta0 > 0")
    s = np.asarray(s, dtype=float)
    cth = 1 / math.tanh(P0)
    a_eq = 1 + 4 * lam * lam * (1 + cth * cth)
    r0 = 8 * lam * rho0 ** 3 / (delta0 ** 2 * math.sinh(P0))
    dx0 = x0_prime_deltapos(p, U0, P0, delta0)
    xf, blow, glob = _w0pi_profile(rho0 ** -2, dx0, a_eq, s)
    x = xf(s)
    inside = np.all(x > 0) and not any(b is not None and s.min() <= b <= s.max() for b in blow)
    rho = np.where(x > 0, np.abs(x) ** -0.5, np.nan)
    sample = None
    if fields and inside:
        I = cumulative_integral(lambda t: xf(t) ** -0.5, s)
        P = np.full_like(s, P0)
        sample = _fields_deltapos(p, s, rho, P, I * math.tanh(P0 / 2), I / math.tanh(P0 / 2), I * cth,
                                  delta0, P0, arg_c0)
        sample.meta["family"] = "w0pi-deltapos"
    gap = 1 - rho0 ** 2 * a_eq
    lhs = r0 * abs(U0)
    return ClosedFormW0Pi(s, rho, x, glob, blow, sample,
                          {"lam": lam, "rho0": rho0, "U0": U0, "P0": P0, "x0_prime": dx0, "alpha_P": a_eq,
                           "r0": r0, "lhs": lhs, "bound": rho0 * gap / SQRT2,
                           "reference_bound": SQRT2 * rho0 * gap,
                           "global": gap >= 0 and lhs <= rho0 * gap / SQRT2})


def growth_ratio_check(tr: Trajectory, s_big: float, n: int = 20, eps: float = 0.1) -> float:
    """Smallest ``log(x(s2)/x(s1)) - sqrt(2(1-eps))(s2-s1)`` over samples beyond ``s_big``."""
    s = np.linspace(s_big, tr.s_final, n)
    x = tr(s)[:, 0]
    lx = np.log(x)
    rate = math.sqrt(2 * (1 - eps))
    worst = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            worst = min(worst, (lx[j] - lx[i]) - rate * (s[j] - s[i]))
    return worst


def sample_D_plus(alpha: float, n: int, rng: np.random.Generator, x_span: float = 5.0) -> np.ndarray:
    x = alpha + rng.uniform(1e-3, x_span, n)
    y = rng.uniform(0.0, 1.0, n) * SQRT2 * (x - alpha)
    return np.column_stack([x, y])


def region_invariance_D_plus(beta: float, alpha: float, starts: Sequence[Sequence[float]],
                             x_stop: float = 1e4, slack: float = 1e-9) -> list[bool]:
    """Whether each forward orbit stays in ``D+`` until ``x > x_stop``."""
    out = []
    for x0, y0 in starts:
        tr = integrate(x_field_delta0(beta, alpha), [x0, y0, 0.0], (0.0, 60.0), XCONFIG,
                       [EventSpec(lambda s, u: u[0] - x_stop, "rising", "stop", "x_stop")])
        x, y = tr.y[:, 0], tr.y[:, 1]
        ok = bool(np.all(x >= alpha - slack) and np.all(y >= -slack * (1 + np.abs(y)))
                  and np.all(y <= SQRT2 * (x - alpha) + slack * (1 + np.abs(y))))
        out.append(ok and tr.termination == "event-stop")
    return out
