"""Reduced first-order system, its polar forms, and symmetry actions.

Cartesian variables are ``(z, Y, xi)`` with ``xi = c + j h``::

    z'  = r Y
    Y'  = -(1/r) z (1 - |z|^2) - lam c h
    xi' = -i lam xi conj(z) j      (c' = i lam z conj(h), h' = i lam z conj(c))

subject to ``Im(conj(z) Y) + |xi|^2 / 4 = 0``.

Polar variables write ``z = rho e^{iZ}``, ``c = R1 e^{iX1}``,
``conj(h) = R2 e^{iX2}`` and ``W = X1 - X2 - Z``.  The gap
``delta0^2 = R1^2 - R2^2`` is conserved and selects one of two systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .algebra import Quaternion, dirac_rhs_components
from .errors import InvalidInputError, SingularStateError
from .metric import MetricProfile

DELTA_TOL = 1e-12


@dataclass(frozen=True)
class CouplingParams:
    lam: float
    n: int | None = None

    def __post_init__(self):
        if not self.lam >= 1:
            raise InvalidInputError(f"coupling lam must be >= 1, got {self.lam}")
        if self.n is not None:
            if self.n < 1 or self.n % 2 != 1:
                raise InvalidInputError("representation label n must be a positive odd integer")
            if self.lam != (self.n + 1) / 2:
                raise InvalidInputError("lam must equal (n + 1) / 2")

    @classmethod
    def from_n(cls, n: int) -> "CouplingParams":
        if int(n) != n or n < 1 or n % 2 != 1:
            raise InvalidInputError("representation label n must be a positive odd integer")
        return cls((n + 1) / 2, int(n))


# ----------------------------------------------------------------------
# Cartesian state


@dataclass(frozen=True)
class CartesianState:
    z: complex
    Y: complex
    xi: Quaternion

    def to_array(self) -> np.ndarray:
        c, h = self.xi.c, self.xi.h
        return np.array([np.real(self.z), np.imag(self.z), np.real(self.Y), np.imag(self.Y),
                         np.real(c), np.imag(c), np.real(h), np.imag(h)], dtype=float)

    @classmethod
    def from_array(cls, y) -> "CartesianState":
        y = np.asarray(y, dtype=float)
        return cls(y[0] + 1j * y[1], y[2] + 1j * y[3], Quaternion(y[4] + 1j * y[5], y[6] + 1j * y[7]))


def constraint_value(state: CartesianState):
    return np.imag(np.conj(state.z) * state.Y) + 0.25 * (np.abs(state.xi.c) ** 2 + np.abs(state.xi.h) ** 2)


def constraint_from_array(y):
    """Constraint evaluated on packed arrays of shape ``(..., 8)``."""
    y = np.asarray(y, dtype=float)
    zr, zi, yr, yi = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return zr * yi - zi * yr + 0.25 * np.sum(y[..., 4:8] ** 2, axis=-1)


def cartesian_rhs(s: float, state: CartesianState, r: MetricProfile, lam: float) -> CartesianState:
    rs = r.eval(s)
    if not rs > 0:
        raise SingularStateError(f"metric not positive at s={s}")
    z, Y = state.z, state.Y
    c, h = state.xi.c, state.xi.h
    dz = rs * Y
    dY = -(1.0 / rs) * z * (1.0 - abs(z) ** 2) - lam * c * h
    dc, dh = dirac_rhs_components(c, h, z, lam)
    return CartesianState(dz, dY, Quaternion(dc, dh))


def cartesian_field(r: MetricProfile, lam: float):
    """Packed real vector field for the integrator."""
    reval = r.eval

    def f(s, y):
        rs = float(reval(s))
        if not rs > 0:
            raise SingularStateError(f"metric not positive at s={s}")
        z = complex(y[0], y[1])
        Y = complex(y[2], y[3])
        c = complex(y[4], y[5])
        h = complex(y[6], y[7])
        dz = rs * Y
        dY = -(z * (1.0 - (z.real * z.real + z.imag * z.imag))) / rs - lam * c * h
        dc = 1j * lam * z * h.conjugate()
        dh = 1j * lam * z * c.conjugate()
        return np.array([dz.real, dz.imag, dY.real, dY.imag, dc.real, dc.imag, dh.real, dh.imag])

    return f


# ----------------------------------------------------------------------
# symmetries


def apply_u1(state: CartesianState, T: float) -> CartesianState:
    e = np.exp(1j * T)
    e2 = np.exp(0.5j * T)
    return CartesianState(e * state.z, e * state.Y, Quaternion(state.xi.c * e2, state.xi.h * e2))


def apply_scale(state: CartesianState, metric: MetricProfile, a: float):
    if a == 0:
        raise InvalidInputError("scale factor must be non-zero")
    new = CartesianState(state.z, a * a * state.Y, Quaternion(a * state.xi.c, a * state.xi.h))
    return new, metric.scaled(1.0 / (a * a))


def swap_spinor(state: CartesianState) -> CartesianState:
    """Conjugate transposition ``(c, h) -> (h, c)``."""
    return CartesianState(state.z, state.Y, Quaternion(state.xi.h, state.xi.c))


def u1_array(y, T: float):
    """``apply_u1`` on packed arrays of shape ``(..., 8)``."""
    y = np.asarray(y, dtype=float)
    z = (y[..., 0] + 1j * y[..., 1]) * np.exp(1j * T)
    Y = (y[..., 2] + 1j * y[..., 3]) * np.exp(1j * T)
    c = (y[..., 4] + 1j * y[..., 5]) * np.exp(0.5j * T)
    h = (y[..., 6] + 1j * y[..., 7]) * np.exp(0.5j * T)
    return np.stack([z.real, z.imag, Y.real, Y.imag, c.real, c.imag, h.real, h.imag], axis=-1)


# ----------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialData:
    rho0: float
    U0: float
    xi0: Quaternion

    def __post_init__(self):
        if not self.rho0 > 0:
            raise InvalidInputError("rho0 must be positive")
        c, h = self.xi0.c, self.xi0.h
        if abs(c) < abs(h) * (1 - 1e-14):
            raise InvalidInputError("initial data need |c(xi0)| >= |h(xi0)|")
        if abs(h) > 0:
            ssum = np.angle(c) + np.angle(h)
            if not (-math.pi < ssum <= math.pi + 1e-15):
                raise InvalidInputError("initial data need arg c + arg h in (-pi, pi]")

    @property
    def xi_norm2(self) -> float:
        return float(abs(self.xi0.c) ** 2 + abs(self.xi0.h) ** 2)

    @property
    def delta0(self) -> float:
        return math.sqrt(max(abs(self.xi0.c) ** 2 - abs(self.xi0.h) ** 2, 0.0))

    @property
    def W0(self) -> float:
        return float(np.angle(self.xi0.c) + np.angle(self.xi0.h))

    @property
    def Y0(self) -> complex:
        return complex(self.U0, -self.xi_norm2 / (4 * self.rho0))

    def cartesian(self) -> CartesianState:
        return CartesianState(complex(self.rho0), self.Y0, self.xi0)


@dataclass(frozen=True)
class CanonicalTransform:
    """``canonical = swap^swapped( U(1)_rotation (input) )``."""

    rotation: float
    swapped: bool

    def apply(self, state: CartesianState) -> CartesianState:
        out = apply_u1(state, self.rotation)
        return swap_spinor(out) if self.swapped else out

    def invert(self, state: CartesianState) -> CartesianState:
        out = swap_spinor(state) if self.swapped else state
        return apply_u1(out, -self.rotation)

    @property
    def is_identity(self) -> bool:
        return self.rotation == 0.0 and not self.swapped


def canonicalize_initial_data(z0: complex, Y0: complex, xi0: Quaternion, tol: float = 1e-10):
    """Map constrained data to ``(rho0, U0, xi0')`` with a recorded transform."""
    z0 = complex(z0)
    if z0 == 0:
        raise InvalidInputError("z0 = 0 is excluded (pure Yang-Mills degeneration)")
    state = CartesianState(z0, complex(Y0), Quaternion(complex(xi0.c), complex(xi0.h)))
    cv = constraint_value(state)
    scale = 1.0 + abs(z0) * abs(Y0) + 0.25 * float(xi0.norm2())
    if abs(cv) > tol * scale:
        raise InvalidInputError(f"initial data violate the constraint (value {cv:.3e})")
    T = -math.atan2(z0.imag, z0.real)
    rotated = apply_u1(state, T)
    swapped = abs(rotated.xi.c) < abs(rotated.xi.h)
    if swapped:
        rotated = swap_spinor(rotated)
    c, h = rotated.xi.c, rotated.xi.h
    if abs(h) > 0:
        ssum = np.angle(c) + np.angle(h)
        if not (-math.pi < ssum <= math.pi):
            T += 2 * math.pi
            rotated = apply_u1(rotated, 2 * math.pi)
    tr = CanonicalTransform(T, swapped)
    if abs(T) < 1e-300 and not swapped:
        tr = CanonicalTransform(0.0, False)
    canonical = tr.apply(state)
    data = InitialData(abs(z0), float(canonical.Y.real), canonical.xi)
    return data, tr


def project_constraint(z0: complex, Y0: complex, xi0: Quaternion) -> complex:
    """Re-solve the part of ``Y0`` fixed by the constraint, keeping the free part."""
    z0 = complex(z0)
    if z0 == 0:
        raise InvalidInputError("z0 = 0 is excluded")
    u = z0 / abs(z0)
    along = (np.conj(u) * complex(Y0)).real
    across = -0.25 * float(xi0.norm2()) / abs(z0)
    return complex(u * complex(along, across))


# ----------------------------------------------------------------------
# polar forms


@dataclass(frozen=True)
class PolarStateDelta0:
    rho: float
    H: float
    R: float
    W: float

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.H, self.R, self.W], dtype=float)


@dataclass(frozen=True)
class PolarStateDeltaPos:
    rho: float
    H: float
    P: float
    W: float
    delta0: float

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.H, self.P, self.W], dtype=float)


PolarState = Union[PolarStateDelta0, PolarStateDeltaPos]


def branch_of(data: InitialData, tol: float = DELTA_TOL) -> str:
    c, h = data.xi0.c, data.xi0.h
    if abs(h) == 0:
        raise InvalidInputError("h(xi0) = 0 is outside the polar form")
    xi = math.sqrt(data.xi_norm2)
    d2 = abs(c) ** 2 - abs(h) ** 2
    return "delta0" if abs(d2) <= tol * xi * xi or math.sqrt(max(d2, 0.0)) <= tol * xi else "deltapos"


def polar_init(data: InitialData, tol: float = DELTA_TOL) -> PolarState:
    """Polar initial state; ``H(0) = U0`` since ``rho'(0) = r(0) U0``."""
    branch = branch_of(data, tol)
    if branch == "delta0":
        return PolarStateDelta0(data.rho0, data.U0, float(abs(data.xi0.c)), data.W0)
    d0 = data.delta0
    P0 = 2 * math.asinh(abs(data.xi0.h) / d0)
    return PolarStateDeltaPos(data.rho0, data.U0, P0, data.W0, d0)


def polar_rhs_delta0(s: float, state: PolarStateDelta0, r: MetricProfile, lam: float) -> PolarStateDelta0:
    rho, H, R, W = state.rho, state.H, state.R, state.W
    if not rho > 0:
        raise SingularStateError("rho <= 0")
    rs = float(r.eval(s))
    cw, sw = math.cos(W), math.sin(W)
    return PolarStateDelta0(
        rs * H,
        -rho * (1 - rho * rho) / rs + rs * R ** 4 / (4 * rho ** 3) - lam * R * R * cw,
        lam * rho * R * sw,
        2 * lam * rho * cw + rs * R * R / (2 * rho * rho),
    )


def polar_rhs_deltapos(s: float, state: PolarStateDeltaPos, r: MetricProfile, lam: float) -> PolarStateDeltaPos:
    rho, H, P, W, d0 = state.rho, state.H, state.P, state.W, state.delta0
    if not rho > 0:
        raise SingularStateError("rho <= 0")
    if not P > 0:
        raise SingularStateError("P <= 0")
    rs = float(r.eval(s))
    cw, sw = math.cos(W), math.sin(W)
    d2 = d0 * d0
    ch = math.cosh(P)
    return PolarStateDeltaPos(
        rs * H,
        -rho * (1 - rho * rho) / rs + d2 * d2 * rs * ch * ch / (16 * rho ** 3) - 0.5 * lam * d2 * math.sinh(P) * cw,
        2 * lam * rho * sw,
        2 * lam * rho * cw / math.tanh(P) + d2 * rs * ch / (4 * rho * rho),
        d0,
    )


def polar_delta0_field(r: MetricProfile, lam: float):
    """Packed field on ``(rho, H, R, W, int rho cos W, int rho sin W)``."""
    reval = r.eval

    def f(s, y):
        rho, H, R, W = y[0], y[1], y[2], y[3]
        if not rho > 0:
            raise SingularStateError("rho <= 0")
        rs = float(reval(s))
        cw, sw = math.cos(W), math.sin(W)
        return np.array([
            rs * H,
            -rho * (1 - rho * rho) / rs + rs * R ** 4 / (4 * rho ** 3) - lam * R * R * cw,
            lam * rho * R * sw,
            2 * lam * rho * cw + rs * R * R / (2 * rho * rho),
            rho * cw,
            rho * sw,
        ])

    return f


def polar_deltapos_field(r: MetricProfile, lam: float, delta0: float):
    """Packed field on ``(rho, H, P, W, A_t, A_ct, A_c)`` with accumulators
    ``int rho tanh(P/2) cos W``, ``int rho coth(P/2) cos W``, ``int rho coth(P) cos W``."""
    reval = r.eval
    d2 = delta0 * delta0

    def f(s, y):
        rho, H, P, W = y[0], y[1], y[2], y[3]
        if not rho > 0:
            raise SingularStateError("rho <= 0")
        if not P > 0:
            raise SingularStateError("P <= 0")
        rs = float(reval(s))
        cw, sw = math.cos(W), math.sin(W)
        ch = math.cosh(P)
        t2 = math.tanh(0.5 * P)
        return np.array([
            rs * H,
            -rho * (1 - rho * rho) / rs + d2 * d2 * rs * ch * ch / (16 * rho ** 3) - 0.5 * lam * d2 * math.sinh(P) * cw,
            2 * lam * rho * sw,
            2 * lam * rho * cw / math.tanh(P) + d2 * rs * ch / (4 * rho * rho),
            rho * t2 * cw,
            rho * cw / t2,
            rho * cw / math.tanh(P),
        ])

    return f


def polar_initial_vector(data: InitialData, tol: float = DELTA_TOL) -> tuple[str, np.ndarray]:
    """Branch name and packed initial vector with zeroed accumulators."""
    st = polar_init(data, tol)
    if isinstance(st, PolarStateDelta0):
        return "delta0", np.concatenate([st.to_array(), np.zeros(2)])
    return "deltapos", np.concatenate([st.to_array(), np.zeros(3)])


@dataclass
class FamilySample:
    """Sampled ``(z, xi, r)`` of an explicit or numerically built family."""

    s: np.ndarray
    z: np.ndarray
    c: np.ndarray
    h: np.ndarray
    r: np.ndarray
    meta: dict

    @property
    def xi(self) -> Quaternion:
        return Quaternion(self.c, self.h)


def xi0_delta0(c0: complex, W0: float) -> Quaternion:
    """Spinor datum with zero gap: ``h = conj(c) e^{i W0}``."""
    c0 = complex(c0)
    return Quaternion(c0, np.conj(c0) * np.exp(1j * W0))


def xi0_deltapos(delta0: float, P0: float, W0: float, arg_c0: float = 0.0) -> Quaternion:
    """Spinor datum with ``|c| = delta0 cosh(P0/2)``, ``|h| = delta0 sinh(P0/2)``."""
    c0 = delta0 * math.cosh(P0 / 2) * np.exp(1j * arg_c0)
    h0 = delta0 * math.sinh(P0 / 2) * np.exp(1j * (W0 - arg_c0))
    return Quaternion(complex(c0), complex(h0))


@dataclass
class ReconstructedFields:
    s: np.ndarray
    z: np.ndarray
    c: np.ndarray
    h: np.ndarray
    r: np.ndarray | None
    X1: np.ndarray
    X2: np.ndarray

    @property
    def xi(self) -> Quaternion:
        return Quaternion(self.c, self.h)


def reconstruct_fields(s, y, branch: str, data: InitialData, lam: float,
                       metric: MetricProfile | None = None, r_values=None) -> ReconstructedFields:
    """Recover ``(z, xi)`` from polar samples carrying quadrature accumulators.

    ``y`` has rows ``(rho, H, R|P, W, accumulators...)``.  The radius comes
    from ``r_values`` if given, else from ``metric``.
    """
    s = np.asarray(s, dtype=float)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    need = 6 if branch == "delta0" else 7
    if y.shape[1] < need:
        raise InvalidInputError(f"{branch} reconstruction needs {need} columns with accumulators")
    rho, W = y[:, 0], y[:, 3]
    W0 = data.W0
    c0, h0 = complex(data.xi0.c), complex(data.xi0.h)
    if branch == "delta0":
        R, A = y[:, 2], y[:, 4]
        z = rho * np.exp(1j * (2 * lam * A - W + W0))
        xin = math.sqrt(data.xi_norm2)
        ph = np.exp(1j * lam * A)
        c = math.sqrt(2) * (c0 / xin) * R * ph
        h = math.sqrt(2) * (h0 / xin) * R * ph
        X1 = np.angle(c0) + lam * A
        X2 = -np.angle(h0) - lam * A
    elif branch == "deltapos":
        P, At, Act, Ac = y[:, 2], y[:, 4], y[:, 5], y[:, 6]
        d0 = data.delta0
        z = rho * np.exp(1j * (2 * lam * Ac - W + W0))
        c = d0 * np.cosh(P / 2) * np.exp(1j * (lam * At + np.angle(c0)))
        h = d0 * np.sinh(P / 2) * np.exp(1j * (lam * Act + np.angle(h0)))
        X1 = np.angle(c0) + lam * At
        X2 = -np.angle(h0) - lam * Act
    else:
        raise InvalidInputError(f"unknown branch {branch!r}")
    if r_values is not None:
        r = np.asarray(r_values, dtype=float)
    elif metric is not None:
        r = np.asarray(metric.eval(s), dtype=float)
    else:
        r = None
    return ReconstructedFields(s, z, c, h, r, X1, X2)
