"""Möbius transformations as normalized 2x2 complex matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .jets import Jet1

DET_TOL = 1e-14


@dataclass(frozen=True)
class Mobius:
    """``z -> (a z + b) / (c z + d)`` with ``a d - b c = 1`` after construction."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0 or abs(det) <= DET_TOL * scale * scale:
            raise DomainError("degenerate Möbius matrix (ad - bc = 0)")
        s = np.sqrt(det)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v / s)

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            den = self.c * z + self.d
            out = np.where(den == 0, complex("inf"), (self.a * z + self.b) / den)
        return out[()] if out.ndim == 0 else out

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 1.0 / (self.c * z + self.d) ** 2
        return out[()] if out.ndim == 0 else out

    def second_deriv(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -2.0 * self.c / (self.c * z + self.d) ** 3
        return out[()] if out.ndim == 0 else out

    def jet(self, z0, order):
        w = Jet1.variable(z0, order)
        if self.c == 0:
            return w * (self.a / self.d) + self.b / self.d
        return (w * self.a + self.b) / (w * self.c + self.d)

    def ratio_jet(self, z0, order):
        """``(a w + b, c w + d)`` as a pair of jets."""
        w = Jet1.variable(z0, order)
        return w * self.a + self.b, w * self.c + self.d

    def compose(self, other: "Mobius") -> "Mobius":
        """``self ∘ other``."""
        return Mobius.from_matrix(self.matrix @ other.matrix)

    __matmul__ = compose

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a)

    def equals(self, other, tol=1e-12):
        m1, m2 = self.matrix, other.matrix
        return bool(np.allclose(m1, m2, atol=tol) or np.allclose(m1, -m2, atol=tol))

    def is_disk_automorphism(self, tol=1e-12):
        """True for matrices of the form ``[[p, q], [conj q, conj p]]``."""
        for sign in (1, -1):
            a, b, c, d = (sign * v for v in (self.a, self.b, self.c, self.d))
            if abs(d - np.conj(a)) <= tol and abs(c - np.conj(b)) <= tol:
                return abs(a) > abs(b)
        return False

    def __str__(self):
        return f"({self.a:.6g} z + {self.b:.6g}) / ({self.c:.6g} z + {self.d:.6g})"


def mobius_apply(m: Mobius, z):
    return m(z)


def mobius_disk_auto(a, rotation=1.0) -> Mobius:
    """Disk automorphism ``rotation * (z + a) / (1 + conj(a) z)``; maps 0 to ``rotation*a``."""
    a = complex(a)
    if abs(a) >= 1:
        raise DomainError("disk automorphism needs |a| < 1")
    rotation = complex(rotation)
    if abs(abs(rotation) - 1) > 1e-12:
        raise DomainError("rotation factor must be unimodular")
    half = np.sqrt(rotation)
    return Mobius(half, half * a, np.conj(half) * np.conj(a), np.conj(half))


def spherical_rotation(p, q) -> Mobius:
    """Isometry ``(p z + q) / (-conj(q) z + conj(p))`` of the spherical metric."""
    return Mobius(p, q, -np.conj(q), np.conj(p))


def random_disk_automorphism(rng, radius=0.6) -> Mobius:
    r = radius * np.sqrt(rng.uniform())
    a = r * np.exp(2j * np.pi * rng.uniform())
    return mobius_disk_auto(a, np.exp(2j * np.pi * rng.uniform()))


def random_mobius(rng, scale=1.0) -> Mobius:
    while True:
        m = scale * (rng.normal(size=4) + 1j * rng.normal(size=4))
        try:
            return Mobius(*m)
        except DomainError:  # pragma: no cover - measure zero
            continue


def random_spherical_rotation(rng) -> Mobius:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return spherical_rotation(v[0] + 1j * v[1], v[2] + 1j * v[3])
