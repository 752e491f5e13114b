"""Radius coefficient ``r(s) > 0`` supplied from outside the dynamics."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError


def _sine(a, b, omega=1.0):
    return (lambda s: a + b * np.sin(omega * s),
            lambda s: b * omega * np.cos(omega * s))


def _exp(a, k):
    return (lambda s: a * np.exp(k * s),
            lambda s: a * k * np.exp(k * s))


def _sech_power(a, k, p):
    return (lambda s: a / np.cosh(k * s) ** p,
            lambda s: -a * p * k * np.tanh(k * s) / np.cosh(k * s) ** p)


CLOSED_FORMS: dict[str, Callable] = {
    "sine": _sine,
    "exp": _exp,
    "sech-power": _sech_power,
}


class MetricProfile:
    """A positive radius profile with value and first derivative.

    Use the constructors :meth:`constant`, :meth:`closed_form`,
    :meth:`from_callables` and :meth:`tabulated`.
    """

    def __init__(self, kind: str, func, dfunc, params: dict, domain=(-np.inf, np.inf)):
        self.kind = kind
        self._f = func
        self._df = dfunc
        self.params = params
        self.domain = domain

    @classmethod
    def constant(cls, r0: float) -> "MetricProfile":
        r0 = float(r0)
        if not r0 > 0:
            raise InvalidInputError("constant metric needs r0 > 0")
        return cls("constant", lambda s: r0 + 0.0 * np.asarray(s, dtype=float),
                   lambda s: 0.0 * np.asarray(s, dtype=float), {"r0": r0})

    @classmethod
    def closed_form(cls, name: str, *params: float) -> "MetricProfile":
        if name not in CLOSED_FORMS:
            raise InvalidInputError(f"unknown closed-form metric {name!r}; known: {sorted(CLOSED_FORMS)}")
        f, df = CLOSED_FORMS[name](*params)
        return cls("closed_form", f, df, {"name": name, "params": list(map(float, params))})

    @classmethod
    def from_callables(cls, func, dfunc, name: str = "custom", domain=(-np.inf, np.inf)) -> "MetricProfile":
        return cls("closed_form", func, dfunc, {"name": name}, domain)

    @classmethod
    def tabulated(cls, s, r) -> "MetricProfile":
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        if s.ndim != 1 or s.shape != r.shape or len(s) < 4:
            raise InvalidInputError("tabulated metric needs matching 1-d grids of length >= 4")
        if np.any(np.diff(s) <= 0):
            raise InvalidInputError("tabulated grid must be strictly increasing")
        if np.any(r <= 0):
            raise InvalidInputError("tabulated radius values must be positive")
        spline = CubicSpline(s, r, bc_type="natural")
        dspline = spline.derivative()
        return cls("tabulated", spline, dspline, {"n": int(len(s)), "s_min": float(s[0]), "s_max": float(s[-1])},
                   (float(s[0]), float(s[-1])))

    def eval(self, s):
        return self._f(s)

    __call__ = eval

    def derivative(self, s):
        return self._df(s)

    def scaled(self, factor: float) -> "MetricProfile":
        """Profile ``factor * r``."""
        f, df = self._f, self._df
        params = dict(self.params)
        params["scale"] = params.get("scale", 1.0) * factor
        return MetricProfile(self.kind, lambda s: factor * f(s), lambda s: factor * df(s), params, self.domain)

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params}
