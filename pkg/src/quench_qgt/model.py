"""SSH Bloch Hamiltonian: spectrum, fixed-gauge eigenstates, Berry connection, velocities.

Conventions: lattice constant 1, hbar = 1, ``m = J1 / J2`` and energies carry
the factor ``J2``.  Momenta are accepted on the whole real line and folded into
``(-pi, pi]`` before use.  All functions broadcast over numpy arrays of ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import GapClosed, InvalidParameters

TAU_GAP = 1e-9
"""Below this value of R~(k) the eigenbasis is treated as degenerate."""

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModelParams:
    """One SSH Hamiltonian: dimerization ``m = J1/J2`` and hopping ``j2``."""

    m: float
    j2: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.m) or self.m < 0:
            raise InvalidParameters(f"dimerization m must be finite and >= 0, got {self.m!r}")
        if not np.isfinite(self.j2) or self.j2 <= 0:
            raise InvalidParameters(f"J2 must be finite and > 0, got {self.j2!r}")

    @property
    def j1(self) -> float:
        return self.m * self.j2


@dataclass(frozen=True)
class BlochVector:
    """Components of R(k) with H(k) = R(k) . sigma (energy units)."""

    rx: NDArray | float
    ry: NDArray | float
    rz: NDArray | float

    def norm(self) -> NDArray | float:
        return np.sqrt(np.square(self.rx) + np.square(self.ry) + np.square(self.rz))

    def matrix(self) -> NDArray:
        """Assemble the 2x2 Hamiltonian (scalar k only)."""
        rx, ry, rz = (complex(c) for c in (self.rx, self.ry, self.rz))
        return np.array([[rz, rx - 1j * ry], [rx + 1j * ry, -rz]], dtype=complex)


@dataclass(frozen=True)
class Spinor:
    """Normalized cell-periodic two-component state."""

    c0: complex
    c1: complex

    @classmethod
    def from_array(cls, vec: ArrayLike) -> Spinor:
        v = np.asarray(vec, dtype=complex)
        return cls(complex(v[0]), complex(v[1]))

    def as_array(self) -> NDArray:
        return np.array([self.c0, self.c1], dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2))


@dataclass(frozen=True)
class EigenSystem:
    e_minus: float
    e_plus: float
    u_minus: Spinor
    u_plus: Spinor


def wrap_k(k: ArrayLike) -> NDArray | float:
    """Fold momenta into (-pi, pi]; values already inside are returned unchanged."""
    k = np.asarray(k, dtype=float)
    out = k - TWO_PI * np.round(k / TWO_PI)
    out = np.where(out <= -np.pi, out + TWO_PI, out)
    out = np.where(out > np.pi, out - TWO_PI, out)
    return out[()] if out.ndim == 0 else out


def sin_k(k: ArrayLike) -> NDArray | float:
    """sin(k) on the folded momentum, exactly zero at the zone boundary."""
    kw = np.asarray(wrap_k(k))
    out = np.where(np.abs(kw) == np.pi, 0.0, np.sin(kw))
    return out[()] if out.ndim == 0 else out


def cos_k(k: ArrayLike) -> NDArray | float:
    kw = np.asarray(wrap_k(k))
    out = np.where(np.abs(kw) == np.pi, -1.0, np.cos(kw))
    return out[()] if out.ndim == 0 else out


def bloch_vector(params: ModelParams, k: ArrayLike) -> BlochVector:
    c, s = cos_k(k), sin_k(k)
    return BlochVector(-params.j2 * (params.m + c), params.j2 * s, np.zeros_like(c))


def hamiltonian(params: ModelParams, k: float) -> NDArray:
    """2x2 Bloch Hamiltonian at a single momentum."""
    return bloch_vector(params, k).matrix()


def r_tilde(params: ModelParams, k: ArrayLike) -> NDArray | float:
    """Dimensionless band half-width sqrt(m^2 + 1 + 2 m cos k).

    Evaluated as hypot(m + cos k, sin k) so that the zone-center and
    zone-boundary values come out as exactly |m + 1| and |m - 1|.
    """
    return np.hypot(params.m + cos_k(k), sin_k(k))


def check_gap(params: ModelParams, k: ArrayLike) -> NDArray | float:
    """Return R~(k), raising :class:`GapClosed` if any value is at or below ``TAU_GAP``."""
    r = r_tilde(params, k)
    if np.any(np.asarray(r) <= TAU_GAP):
        raise GapClosed(f"gap closes for m={params.m} at the requested momentum")
    return r


def _offdiag(params: ModelParams, k: ArrayLike) -> NDArray | complex:
    # m + exp(-ik), built from the exact-at-boundary trig helpers
    return params.m + cos_k(k) - 1j * sin_k(k)


def eigenstate_array(params: ModelParams, k: ArrayLike, band: int) -> NDArray:
    """Fixed-gauge eigenvector(s) with real first component 1/sqrt(2).

    ``band`` is -1 for the ground state and +1 for the excited state.  For an
    array of momenta the result has shape ``(2, *k.shape)``.
    """
    r = check_gap(params, k)
    first = np.full(np.shape(r), 1.0 / np.sqrt(2.0), dtype=complex)
    second = -band * _offdiag(params, k) / (np.sqrt(2.0) * r)
    return np.stack([first, second])


def eigensystem(params: ModelParams, k: float) -> EigenSystem:
    r = float(check_gap(params, k))
    e = params.j2 * r
    return EigenSystem(
        e_minus=-e,
        e_plus=e,
        u_minus=Spinor.from_array(eigenstate_array(params, k, -1)),
        u_plus=Spinor.from_array(eigenstate_array(params, k, +1)),
    )


def berry_connection(params: ModelParams, k: ArrayLike) -> NDArray | float:
    """Ground-band connection i<u-|d_k u-> in the fixed gauge: (m cos k + 1) / (2 R~^2)."""
    r = check_gap(params, k)
    return (params.m * cos_k(k) + 1.0) / (2.0 * np.square(r))


def metric(params: ModelParams, k: ArrayLike) -> NDArray | float:
    """Static ground-band quantum metric (m cos k + 1)^2 / (4 R~^4)."""
    r = check_gap(params, k)
    return np.square(params.m * cos_k(k) + 1.0) / (4.0 * r**4)


def group_velocity(
    params: ModelParams, k: ArrayLike, band: Literal["minus", "plus"] = "plus"
) -> NDArray | float:
    """Band slope +-d_k(J2 R~) = -+J2 m sin k / R~ (Hellmann-Feynman sign)."""
    if band not in ("minus", "plus"):
        raise ValueError(f"band must be 'minus' or 'plus', got {band!r}")
    r = check_gap(params, k)
    v = -params.j2 * params.m * sin_k(k) / r
    return v if band == "plus" else -v
