"""Independent check of solutions against the original coupled equations.

Samples of ``(z, xi, r)`` are turned back into the connection coefficients
``w + i v = z``, the spinor components ``psi1 = c/r``, ``psi2 = conj(h)/r``
and the metric coefficient, and the five field equations are evaluated in
their general ``(alpha, r)`` form with fourth-order central differences.
Only interior points are used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

MIN_POINTS = 9
EQUATIONS = ("constraint", "ym_w", "ym_v", "dirac_1", "dirac_2")


@dataclass
class FieldSample:
    s: np.ndarray
    w: np.ndarray
    v: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    alpha: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        n = len(self.s)
        for name in ("w", "v", "psi1", "psi2", "alpha", "r"):
            if len(getattr(self, name)) != n:
                raise InvalidInputError(f"field {name!r} has the wrong length")
        if np.any(self.r <= 0) or np.any(self.alpha <= 0):
            raise InvalidInputError("r and alpha must be positive")

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    def to_solution(self):
        """Back to ``(z, c, h, r)``."""
        return self.w + 1j * self.v, self.r * self.psi1, self.r * np.conj(self.psi2), self.r


def fields_from_solution(s, z, c, h, r) -> FieldSample:
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=complex)
    r = np.asarray(r, dtype=float)
    return FieldSample(s, z.real.copy(), z.imag.copy(), np.asarray(c, dtype=complex) / r,
                       np.conj(np.asarray(h, dtype=complex)) / r, r.copy(), r)


def fields_from_family(sample) -> FieldSample:
    return fields_from_solution(sample.s, sample.z, sample.c, sample.h, sample.r)


def _check_grid(s: np.ndarray) -> float:
    if len(s) < MIN_POINTS:
        raise InvalidInputError(f"grid needs at least {MIN_POINTS} points")
    d = np.diff(s)
    h = float(d[0])
    if not h > 0 or np.max(np.abs(d - h)) > 1e-9 * h:
        raise InvalidInputError("grid must be uniform and increasing")
    return h


def d1(f, h):
    """Fourth-order first derivative on the interior ``[2:-2]``."""
    return (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)


def d2(f, h):
    return (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)


@dataclass
class Residuals:
    constraint: float
    ym_w: float
    ym_v: float
    dirac_1: float
    dirac_2: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in EQUATIONS}

    @property
    def max(self) -> float:
        return max(self.as_dict().values())


def residual_arrays(f: FieldSample, lam: float) -> dict:
    h = _check_grid(f.s)
    w, v, p1, p2, a, r = f.w, f.v, f.psi1, f.psi2, f.alpha, f.r
    I = slice(2, -2)
    wi, vi, p1i, p2i, ai, ri = w[I], v[I], p1[I], p2[I], a[I], r[I]
    dw, dv, da, dr = d1(w, h), d1(v, h), d1(a, h), d1(r, h)
    dp1, dp2 = d1(p1, h), d1(p2, h)
    ddw, ddv = d2(w, h), d2(v, h)
    dens = np.abs(p1i) ** 2 + np.abs(p2i) ** 2
    mix = p1i * np.conj(p2i)
    pot = 1 - vi * vi - wi * wi
    k = ai * ai / (ri * ri)
    return {
        "constraint": dv * wi - vi * dw + ai * ri * ri / 4 * dens,
        "ym_w": ddw - da / ai * dw + k * wi * pot + lam * ai * ai * ri * mix.real,
        "ym_v": ddv - da / ai * dv + k * vi * pot + lam * ai * ai * ri * mix.imag,
        "dirac_1": dp1 + dr / ri * p1i + ai / ri * lam * (vi - 1j * wi) * p2i,
        "dirac_2": dp2 + dr / ri * p2i + ai / ri * lam * (vi + 1j * wi) * p1i,
    }


def residual_full(f: FieldSample, lam: float) -> Residuals:
    """Sup-norms of the five equations over interior grid points."""
    arr = residual_arrays(f, lam)
    return Residuals(**{k: float(np.max(np.abs(arr[k]))) for k in EQUATIONS})


def energy_density(f: FieldSample) -> np.ndarray:
    """``|F|^2 = (2(w'^2 + v'^2) + (1 - v^2 - w^2)^2) / r^2`` on interior points."""
    h = _check_grid(f.s)
    I = slice(2, -2)
    dw, dv = d1(f.w, h), d1(f.v, h)
    pot = 1 - f.v[I] ** 2 - f.w[I] ** 2
    return (2 * (dw * dw + dv * dv) + pot * pot) / f.r[I] ** 2


@dataclass
class Current:
    j_s: np.ndarray
    j_1: np.ndarray
    j_2: np.ndarray
    coupled: bool


def current_components(f: FieldSample, lam: float, scale: float = 1.0) -> Current:
    """Coefficients of the Dirac current; ``coupled`` when any exceeds ``1e-10 * scale``."""
    mix = f.psi1 * np.conj(f.psi2)
    js = -0.5 * f.alpha * (np.abs(f.psi1) ** 2 + np.abs(f.psi2) ** 2)
    j1 = lam * f.r * mix.real
    j2 = lam * f.r * mix.imag
    sup = max(float(np.max(np.abs(js))), float(np.max(np.abs(j1))), float(np.max(np.abs(j2))))
    return Current(js, j1, j2, sup > 1e-10 * scale)


@dataclass
class VerifyReport:
    residuals: Residuals
    energy_min: float
    energy_max: float
    energy_mean: float
    coupled: bool
    j_s_max: float
    n: int
    h: float

    def passed(self, tol: float) -> bool:
        return self.residuals.max <= tol

    def as_dict(self) -> dict:
        return {"residuals": self.residuals.as_dict(), "residual_max": self.residuals.max,
                "energy_min": self.energy_min, "energy_max": self.energy_max,
                "energy_mean": self.energy_mean, "coupled": self.coupled, "j_s_max": self.j_s_max,
                "n": self.n, "h": self.h}


def verify(f: FieldSample, lam: float) -> VerifyReport:
    res = residual_full(f, lam)
    e = energy_density(f)
    cur = current_components(f, lam)
    return VerifyReport(res, float(e.min()), float(e.max()), float(e.mean()), cur.coupled,
                        float(cur.j_s.max()), len(f.s), f.h)
