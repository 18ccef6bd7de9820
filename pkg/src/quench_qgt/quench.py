"""Sudden quench m_i -> m_f: band overlaps, time evolution and energy fluctuations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidParameters
from .model import (
    ModelParams,
    Spinor,
    check_gap,
    cos_k,
    eigenstate_array,
    group_velocity,
    sin_k,
)

INFINITE_TIMESCALE = math.inf
"""Returned by :func:`volatility_timescale` for modes with no energy spread."""


@dataclass(frozen=True)
class QuenchProtocol:
    """Ground state of ``m_i`` prepared at t=0, then evolved under ``m_f``."""

    m_i: float
    m_f: float
    j2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("m_i", "m_f"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidParameters(f"{name} must be finite and >= 0, got {v!r}")
        if not np.isfinite(self.j2) or self.j2 <= 0:
            raise InvalidParameters(f"J2 must be finite and > 0, got {self.j2!r}")

    @property
    def initial(self) -> ModelParams:
        return ModelParams(self.m_i, self.j2)

    @property
    def final(self) -> ModelParams:
        return ModelParams(self.m_f, self.j2)

    @property
    def is_trivial(self) -> bool:
        return self.m_i == self.m_f

    def label(self) -> str:
        return f"{self.m_i:g}->{self.m_f:g}"


@dataclass(frozen=True)
class OverlapCoeffs:
    """Amplitudes of the initial ground state on the final ground (alpha) and excited (beta) bands."""

    alpha: complex
    beta: complex


@dataclass(frozen=True)
class EvolvedState:
    k: float
    t: float
    spinor: Spinor


def overlap_arrays(proto: QuenchProtocol, k: ArrayLike) -> tuple[NDArray, NDArray]:
    """Vectorized alpha, beta."""
    ri = check_gap(proto.initial, k)
    rf = check_gap(proto.final, k)
    c, s = cos_k(k), sin_k(k)
    # (m_i + e^{-ik}) (m_f + e^{ik})
    cross = (proto.m_i + c - 1j * s) * (proto.m_f + c + 1j * s)
    denom = 2.0 * ri * rf
    # real and imaginary parts divided separately: keeps alpha, beta exactly 0 or 1 at k = 0, pi
    half = np.real(cross) / denom + 1j * (np.imag(cross) / denom)
    return 0.5 + half, 0.5 - half


def overlap_coeffs(proto: QuenchProtocol, k: float) -> OverlapCoeffs:
    alpha, beta = overlap_arrays(proto, k)
    return OverlapCoeffs(complex(alpha), complex(beta))


def evolved_spinor(proto: QuenchProtocol, k: float, t: float) -> NDArray:
    """alpha e^{+i R_f t}|u_f^-> + beta e^{-i R_f t}|u_f^+> as a length-2 array."""
    alpha, beta = overlap_arrays(proto, k)
    rf = proto.j2 * check_gap(proto.final, k)
    u_minus = eigenstate_array(proto.final, k, -1)
    u_plus = eigenstate_array(proto.final, k, +1)
    return alpha * np.exp(1j * rf * t) * u_minus + beta * np.exp(-1j * rf * t) * u_plus


def evolved_state(proto: QuenchProtocol, k: float, t: float) -> EvolvedState:
    return EvolvedState(k=float(k), t=float(t), spinor=Spinor.from_array(evolved_spinor(proto, k, t)))


def energy_variance(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    """Energy variance of mode k, J2^2 (m_i - m_f)^2 sin^2 k / R~_i^2 (time independent)."""
    ri = check_gap(proto.initial, k)
    return proto.j2**2 * (proto.m_i - proto.m_f) ** 2 * np.square(sin_k(k)) / np.square(ri)


def energy_variance_from_overlaps(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    """Same quantity via 4 J2^2 R~_f^2 |alpha|^2 |beta|^2."""
    alpha, beta = overlap_arrays(proto, k)
    rf = check_gap(proto.final, k)
    return 4.0 * proto.j2**2 * np.square(rf) * np.abs(alpha) ** 2 * np.abs(beta) ** 2


def excitation_probability(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    """Population |beta|^2 of the post-quench excited band."""
    _, beta = overlap_arrays(proto, k)
    return np.abs(beta) ** 2


def mean_velocity(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    """Band-diagonal velocity expectation |alpha|^2 v^- + |beta|^2 v^+."""
    alpha, beta = overlap_arrays(proto, k)
    vp = group_velocity(proto.final, k, "plus")
    return (np.abs(beta) ** 2 - np.abs(alpha) ** 2) * vp


def volatility_timescale(proto: QuenchProtocol, k: float) -> float:
    """Mandelstam-Tamm time 1/sqrt(energy variance); ``INFINITE_TIMESCALE`` when the variance is zero."""
    var = float(energy_variance(proto, k))
    if var <= 0.0:
        return INFINITE_TIMESCALE
    return 1.0 / math.sqrt(var)
