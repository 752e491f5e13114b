"""Quaternions stored as complex pairs ``q = c + j h``.

Both parts may be Python complex scalars or numpy complex arrays of a
common shape, so the same code serves pointwise evaluation and sampled
trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Quaternion:
    c: complex
    h: complex

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.c + other.c, self.h + other.h)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.c - other.c, self.h - other.h)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.c, -self.h)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return right_mul_complex(self, other)

    def conj(self) -> "Quaternion":
        return quat_conj(self)

    def norm2(self):
        return quat_norm2(self)

    def norm(self):
        return quat_norm(self)

    def to_tuple(self) -> tuple[complex, complex]:
        return complex(self.c), complex(self.h)


ONE = Quaternion(1.0 + 0j, 0j)
I = Quaternion(1j, 0j)
J = Quaternion(0j, 1.0 + 0j)
K = Quaternion(0j, -1j)  # i*j


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product in the complex-pair representation."""
    c = a.c * b.c - np.conj(a.h) * b.h
    h = a.h * b.c + np.conj(a.c) * b.h
    return Quaternion(c, h)


def quat_conj(a: Quaternion) -> Quaternion:
    return Quaternion(np.conj(a.c), -a.h)


def quat_norm2(a: Quaternion):
    return np.abs(a.c) ** 2 + np.abs(a.h) ** 2


def quat_norm(a: Quaternion):
    return np.sqrt(quat_norm2(a))


def right_mul_complex(a: Quaternion, w) -> Quaternion:
    """``a * w`` for a complex number ``w`` (embedded as ``w + j 0``)."""
    return Quaternion(a.c * w, a.h * w)


def left_mul_complex(w, a: Quaternion) -> Quaternion:
    """``w * a`` for complex ``w``; note ``w j = j conj(w)``."""
    return Quaternion(w * a.c, np.conj(w) * a.h)


def dirac_rhs_quaternion(xi: Quaternion, z, lam: float) -> Quaternion:
    """Evaluate ``-i lam xi conj(z) j`` with genuine quaternion products."""
    zbar = Quaternion(np.conj(z) + 0j, 0j * z)
    left = Quaternion(-1j * lam + 0j * z, 0j * z)
    return quat_mul(quat_mul(quat_mul(left, xi), zbar), J)


def dirac_rhs_components(c, h, z, lam: float):
    """Componentwise form: ``c' = i lam z conj(h)``, ``h' = i lam z conj(c)``."""
    dc = 1j * lam * z * np.conj(h)
    dh = 1j * lam * z * np.conj(c)
    return dc, dh
