"""Explicit Runge-Kutta integration with dense output and event location.

Two methods are provided: the Dormand-Prince 5(4) pair with its free
quartic continuous extension (``"rk45"``) and classical fixed-step RK4
with cubic Hermite interpolation (``"rk4"``).  Both produce a
:class:`Trajectory` whose per-step polynomial coefficients share one
layout, so dense evaluation and event search do not care which method
produced them.

Quadrature accumulators are ordinary state components: the caller appends
entries whose derivative is the integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import SingularStateError

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "EventRecord",
    "Trajectory",
    "integrate",
    "integrate_two_sided",
    "refine_event",
    "TERMINATIONS",
]

TERMINATIONS = ("reached-end", "blow-up", "step-underflow", "singular-state", "event-stop")

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``h`` is the step for ``rk4`` and an optional first-step guess for
    ``rk45``.  ``min_step`` is relative to ``max(1, |s|)``.  Steps are
    accepted when the scaled error estimate is at most 1; new step sizes
    aim at ``err_target``.
    """

    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    blowup_norm: float = 1e8
    min_step: float = 1e-14
    h: float | None = None
    max_steps: int = 2_000_000
    err_target: float = 0.1

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "rk4" and not (self.h and self.h > 0):
            raise ValueError("rk4 needs a positive step h")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not (0 < self.min_step < self.max_step):
            raise ValueError("need 0 < min_step < max_step")


@dataclass(frozen=True)
class EventSpec:
    g: Callable[[float, np.ndarray], float]
    direction: str = "any"
    action: str = "record"
    name: str = ""
    scale: float = 1.0

    def __post_init__(self):
        if self.direction not in ("rising", "falling", "any"):
            raise ValueError(f"bad event direction {self.direction!r}")
        if self.action not in ("record", "stop"):
            raise ValueError(f"bad event action {self.action!r}")


@dataclass
class EventRecord:
    s: float
    y: np.ndarray
    name: str = ""
    direction: str = "any"
    degenerate: bool = False
    bracket: tuple[float, float] = (math.nan, math.nan)
    residual: float = math.nan


# ----------------------------------------------------------------------
# single steps


def _dopri_step(f, s, y, h, k1):
    k2 = f(s + C2 * h, y + h * (A21 * k1))
    k3 = f(s + C3 * h, y + h * (A31 * k1 + A32 * k2))
    k4 = f(s + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
    k5 = f(s + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
    k6 = f(s + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
    y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
    k7 = f(s + h, y1)
    err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
    return y1, k7, err, (k1, k3, k4, k5, k6, k7)


def _dopri_coef(y0, y1, h, ks):
    k1, k3, k4, k5, k6, k7 = ks
    dy = y1 - y0
    b = h * k1 - dy
    dense = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
    return np.stack([y0, dy, b, dy - h * k7 - b, dense])


def _rk4_step(f, s, y, h, k1):
    k2 = f(s + h / 2, y + (h / 2) * k1)
    k3 = f(s + h / 2, y + (h / 2) * k2)
    k4 = f(s + h, y + h * k3)
    y1 = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    k_end = f(s + h, y1)
    return y1, k_end, None, (k1, k_end)


def _hermite_coef(y0, y1, h, ks):
    k1, k_end = ks
    dy = y1 - y0
    b = h * k1 - dy
    return np.stack([y0, dy, b, dy - h * k_end - b, np.zeros_like(y0)])


def _eval_coef(coef, theta):
    t1 = 1.0 - theta
    return coef[0] + theta * (coef[1] + t1 * (coef[2] + theta * (coef[3] + t1 * coef[4])))


# ----------------------------------------------------------------------
# trajectory record


class Trajectory:
    """Samples, per-step dense coefficients and termination record.

    Segment ``k`` covers ``[seg_start[k], seg_start[k] + seg_h[k]]`` and is
    evaluated at ``theta = (s - seg_start[k]) / seg_h[k]``.
    """

    def __init__(self, s, y, seg_start, seg_h, coef, termination, events=None,
                 message="", rhs=None, method="rk45", stats=None, terminations=None):
        self.s = np.asarray(s, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.seg_start = np.asarray(seg_start, dtype=float)
        self.seg_h = np.asarray(seg_h, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        if self.coef.size == 0:
            self.coef = np.zeros((0, 5, self.y.shape[1]))
        self.termination = termination
        self.terminations = terminations or (termination,)
        self.events = list(events or [])
        self.message = message
        self.rhs = rhs
        self.method = method
        self.stats = dict(stats or {})
        lo = np.minimum(self.seg_start, self.seg_start + self.seg_h)
        self._order = np.argsort(lo, kind="stable")
        self._lo = lo[self._order]

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    @property
    def s_final(self) -> float:
        return float(self.s[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1].copy()

    @property
    def span(self) -> tuple[float, float]:
        return float(self.s.min()), float(self.s.max())

    def segment_index(self, q):
        q = np.asarray(q, dtype=float)
        if len(self._lo) == 0:
            raise ValueError("trajectory has no steps")
        pos = np.searchsorted(self._lo, q, side="right") - 1
        pos = np.clip(pos, 0, len(self._lo) - 1)
        return self._order[pos]

    def __call__(self, q):
        """Dense output at ``q`` (scalar or 1-d array)."""
        scalar = np.ndim(q) == 0
        qa = np.atleast_1d(np.asarray(q, dtype=float))
        idx = self.segment_index(qa)
        theta = (qa - self.seg_start[idx]) / self.seg_h[idx]
        c = self.coef[idx]
        th = theta[:, None]
        t1 = 1.0 - th
        out = c[:, 0] + th * (c[:, 1] + t1 * (c[:, 2] + th * (c[:, 3] + t1 * c[:, 4])))
        return out[0] if scalar else out

    def component(self, i: int) -> np.ndarray:
        return self.y[:, i]


def _empty_trajectory(s0, y0, termination, message, rhs, method):
    return Trajectory([s0], [y0], [], [], np.zeros((0, 5, len(y0))), termination,
                      message=message, rhs=rhs, method=method)


# ----------------------------------------------------------------------
# events


_FLIP = {"rising": "falling", "falling": "rising", "any": "any"}


def _dir_ok(direction: str, g_left: float) -> bool:
    if direction == "any":
        return True
    if direction == "rising":
        return g_left < 0
    return g_left > 0


def _scan_segment(g, coef, s0, h, y0, k1, stepper, f, direction, scale, first, name):
    """Roots and tangencies of ``g`` along one step, ordered by traversal."""
    thetas = np.linspace(0.0, 1.0, 5)
    svals = s0 + thetas * h
    ys = [_eval_coef(coef, t) for t in thetas]
    gv = np.array([float(g(si, yi)) for si, yi in zip(svals, ys)])
    found: list[EventRecord] = []
    tol_tan = 1e-9 * scale

    def dense_g(t):
        return float(g(s0 + t * h, _eval_coef(coef, t)))

    def polished(t):
        if t == 0.0:
            return y0.copy()
        if stepper is None:
            return _eval_coef(coef, t)
        try:
            return stepper(f, s0, y0, t * h, k1)[0]
        except SingularStateError:
            return _eval_coef(coef, t)

    def polished_g(t):
        return float(g(s0 + t * h, polished(t)))

    for i in range(4):
        ga, gb = gv[i], gv[i + 1]
        if i == 0 and ga == 0.0 and not first:
            continue
        if ga != 0.0 and gb != 0.0 and np.sign(ga) != np.sign(gb):
            if not _dir_ok(direction, ga):
                continue
            ta, tb = thetas[i], thetas[i + 1]
            t_star = brentq(dense_g, ta, tb, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
            pa, pb = polished_g(ta), polished_g(tb)
            if pa != 0.0 and pb != 0.0 and np.sign(pa) != np.sign(pb):
                t_star = brentq(polished_g, ta, tb, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
            ys_ = polished(t_star)
            s_star = s0 + t_star * h
            found.append(EventRecord(s_star, ys_, name, "rising" if ga < 0 else "falling",
                                     False, (svals[i], svals[i + 1]), float(g(s_star, ys_))))
        elif gb == 0.0:
            nxt = gv[i + 2] if i + 2 < 5 else np.nan
            touch = np.isfinite(nxt) and nxt != 0.0 and np.sign(nxt) == np.sign(ga)
            if not touch and not _dir_ok(direction, ga):
                continue
            found.append(EventRecord(svals[i + 1], ys[i + 1].copy(), name,
                                     "rising" if ga < 0 else "falling", bool(touch),
                                     (svals[i], svals[min(i + 2, 4)]), 0.0))
    # interior local minima of |g| without sign change
    signs = np.sign(gv)
    if np.all(signs == signs[0]) and signs[0] != 0:
        for i in range(1, 4):
            if abs(gv[i]) < abs(gv[i - 1]) and abs(gv[i]) <= abs(gv[i + 1]):
                res = minimize_scalar(lambda t: abs(dense_g(t)), bounds=(thetas[i - 1], thetas[i + 1]),
                                      method="bounded", options={"xatol": 1e-14})
                if abs(res.fun) <= tol_tan:
                    t_star = float(res.x)
                    found.append(EventRecord(s0 + t_star * h, _eval_coef(coef, t_star), name, "any", True,
                                             (svals[i - 1], svals[i + 1]), float(res.fun)))
    found.sort(key=lambda e: (e.s - s0) / h)
    return found


# ----------------------------------------------------------------------
# driver


def _initial_step(f, s0, y0, f0, direction, cfg):
    sc = cfg.atol + cfg.rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, cfg.max_step)
    try:
        f1 = f(s0 + direction * h0, y0 + direction * h0 * f0)
        d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    except SingularStateError:
        return h0 * 1e-3
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, cfg.max_step)


def _checked(rhs):
    def f(s, y):
        try:
            d = np.asarray(rhs(s, y), dtype=float)
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise SingularStateError(str(exc)) from exc
        if not np.all(np.isfinite(d)):
            raise SingularStateError("non-finite derivative")
        return d
    return f


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0, span: Sequence[float],
              config: IntegratorConfig | None = None,
              events: Sequence[EventSpec] = ()) -> Trajectory:
    """Integrate ``y' = rhs(s, y)`` from ``span[0]`` toward ``span[1]``.

    ``rhs`` may raise :class:`SingularStateError` outside its domain; the
    step is then shrunk, and the run ends as ``singular-state`` once the
    step would drop below ``min_step``.
    """
    cfg = config or IntegratorConfig()
    s_a, s_b = float(span[0]), float(span[1])
    if s_a == s_b:
        raise ValueError("degenerate span")
    direction = 1.0 if s_b > s_a else -1.0
    f = _checked(rhs)
    y = np.array(y0, dtype=float)
    adaptive = cfg.method == "rk45"
    stepper = _dopri_step if adaptive else _rk4_step
    make_coef = _dopri_coef if adaptive else _hermite_coef

    try:
        k1 = f(s_a, y)
    except SingularStateError as exc:
        return _empty_trajectory(s_a, y, "singular-state", str(exc), rhs, cfg.method)

    if adaptive:
        h_abs = cfg.h if cfg.h else _initial_step(f, s_a, y, k1, direction, cfg)
    else:
        h_abs = cfg.h
    s = s_a
    S, Y, SS, SH, CO = [s], [y.copy()], [], [], []
    records: list[EventRecord] = []
    termination, message = "reached-end", ""
    n_acc = n_rej = 0
    first = True
    length = abs(s_b - s_a)

    while True:
        remaining = abs(s_b - s)
        if remaining <= 1e-14 * max(1.0, abs(s_b)):
            break
        if n_acc >= cfg.max_steps:
            termination, message = "step-underflow", "max_steps exceeded"
            break
        h_abs = min(h_abs, cfg.max_step, remaining)
        if remaining - h_abs < 1e-12 * length:
            h_abs = remaining
        h = direction * h_abs
        hmin = cfg.min_step * max(1.0, abs(s))
        try:
            y1, k_end, err, ks = stepper(f, s, y, h, k1)
        except SingularStateError as exc:
            h_abs *= 0.25
            n_rej += 1
            if h_abs < hmin:
                termination, message = "singular-state", str(exc)
                break
            continue
        if not np.all(np.isfinite(y1)):
            h_abs *= 0.25
            n_rej += 1
            if h_abs < hmin:
                termination, message = "singular-state", "non-finite state"
                break
            continue
        if adaptive:
            sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y1))
            err_norm = float(np.sqrt(np.mean((err / sc) ** 2)))
            if err_norm > 1.0:
                n_rej += 1
                h_abs *= max(0.2, 0.9 * (cfg.err_target / err_norm) ** 0.2)
                if h_abs < hmin:
                    termination, message = "step-underflow", f"step below {hmin:g} at s={s:.17g}"
                    break
                continue
            fac = 10.0 if err_norm == 0 else min(10.0, max(0.2, 0.9 * (cfg.err_target / err_norm) ** 0.2))
        coef = make_coef(y, y1, h, ks)
        stop = None
        step_recs: list[EventRecord] = []
        for spec in events:
            recs = _scan_segment(spec.g, coef, s, h, y, k1, stepper, f, spec.direction,
                                 spec.scale, first, spec.name)
            for r in recs:
                if spec.action == "stop" and not r.degenerate:
                    if stop is None or (r.s - s) / h < (stop.s - s) / h:
                        stop = r
            step_recs.extend(recs)
        first = False
        if stop is not None:
            cut = (stop.s - s) / h
            records.extend(r for r in step_recs if (r.s - s) / h <= cut)
            h_cut = stop.s - s
            if h_cut != 0.0:
                y_cut, _, _, ks_cut = stepper(f, s, y, h_cut, k1)
                SS.append(s)
                SH.append(h_cut)
                CO.append(make_coef(y, y_cut, h_cut, ks_cut))
                S.append(stop.s)
                Y.append(y_cut)
                stop.y = y_cut
            termination, message = "event-stop", stop.name
            n_acc += 1
            break
        records.extend(sorted(step_recs, key=lambda e: (e.s - s) / h))
        SS.append(s)
        SH.append(h)
        CO.append(coef)
        s = s + h if h_abs != remaining else s_b
        y = y1
        k1 = k_end
        S.append(s)
        Y.append(y.copy())
        n_acc += 1
        if np.max(np.abs(y)) > cfg.blowup_norm:
            termination, message = "blow-up", f"|y| > {cfg.blowup_norm:g} at s={s:.17g}"
            break
        if adaptive:
            h_abs *= fac

    stats = {"accepted": n_acc, "rejected": n_rej}
    return Trajectory(S, Y, SS, SH, CO if CO else np.zeros((0, 5, len(y))), termination,
                      records, message, rhs, cfg.method, stats)


def integrate_two_sided(rhs, y0, s0: float, span: Sequence[float],
                        config: IntegratorConfig | None = None,
                        events: Sequence[EventSpec] = ()) -> Trajectory:
    """Integrate from ``s0`` backward to ``span[0]`` and forward to ``span[1]``.

    The result is one trajectory with increasing ``s``; its ``terminations``
    holds ``(backward, forward)``.
    """
    lo, hi = float(span[0]), float(span[1])
    parts = []
    if lo < s0:
        parts.append(integrate(rhs, y0, (s0, lo), config, events))
    if hi > s0:
        parts.append(integrate(rhs, y0, (s0, hi), config, events))
    if not parts:
        raise ValueError("degenerate span")
    if len(parts) == 1:
        return parts[0] if parts[0].s[-1] >= parts[0].s[0] else _reverse(parts[0])
    back, fwd = parts
    s = np.concatenate([back.s[::-1], fwd.s[1:]])
    y = np.concatenate([back.y[::-1], fwd.y[1:]])
    seg_start = np.concatenate([back.seg_start[::-1], fwd.seg_start])
    seg_h = np.concatenate([back.seg_h[::-1], fwd.seg_h])
    coef = np.concatenate([back.coef[::-1], fwd.coef])
    terms = (back.termination, fwd.termination)
    term = next((t for t in terms if t != "reached-end"), "reached-end")
    events_all = sorted(back.events + fwd.events, key=lambda e: e.s)
    stats = {k: back.stats.get(k, 0) + fwd.stats.get(k, 0) for k in ("accepted", "rejected")}
    return Trajectory(s, y, seg_start, seg_h, coef, term, events_all,
                      "; ".join(m for m in (back.message, fwd.message) if m), rhs,
                      fwd.method, stats, terms)


def _reverse(traj: Trajectory) -> Trajectory:
    return Trajectory(traj.s[::-1], traj.y[::-1], traj.seg_start[::-1], traj.seg_h[::-1],
                      traj.coef[::-1], traj.termination, traj.events, traj.message, traj.rhs,
                      traj.method, traj.stats, traj.terminations)


def refine_event(traj: Trajectory, g: Callable[[float, np.ndarray], float],
                 direction: str = "any", scale: float = 1.0) -> list[EventRecord]:
    """Locate every root of ``g`` along a finished trajectory.

    Roots are bracketed on the dense output and refined with Brent's
    method; states are polished with one step of the producing method
    from the left sample when the right-hand side is available.
    Tangential touches come back with ``degenerate=True``.
    """
    f = _checked(traj.rhs) if traj.rhs is not None else None
    stepper = None
    if f is not None:
        stepper = _dopri_step if traj.method == "rk45" else _rk4_step
    out: list[EventRecord] = []
    for k in range(len(traj.seg_h)):
        s0, h = float(traj.seg_start[k]), float(traj.seg_h[k])
        coef = traj.coef[k]
        y0 = coef[0]
        k1 = f(s0, y0) if f is not None else None
        d = direction if h > 0 else _FLIP[direction]
        recs = _scan_segment(g, coef, s0, h, y0, k1, stepper, f, d, scale, k == 0, "")
        if h < 0:
            for r in recs:
                r.direction = _FLIP[r.direction]
        out.extend(recs)
    out.sort(key=lambda e: e.s)
    deduped: list[EventRecord] = []
    for e in out:
        if deduped and abs(e.s - deduped[-1].s) <= 1e-13 * max(1.0, abs(e.s)):
            continue
        deduped.append(e)
    return deduped
