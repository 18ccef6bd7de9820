"""Closed-form post-quench quantum geometric tensor on the (k, t) plane.

Sign convention for the off-diagonal entry: :func:`q_kt` follows the
literature closed form, whose imaginary part equals that of

    <d_t psi|d_k psi> - <d_t psi|psi><psi|d_k psi>,

i.e. the complex conjugate of the bra-k/ket-t ordering.  The full Hermitian
tensor in bra-mu/ket-nu ordering is available from :func:`qgt_tensor`, which
is what the finite-difference oracle in :mod:`quench_qgt.numeric` reproduces.
Real parts are unaffected by the ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AtCriticalPoint, InvalidParameters
from .model import berry_connection, check_gap, cos_k, metric, sin_k
from .quench import QuenchProtocol, energy_variance, overlap_coeffs


@dataclass(frozen=True)
class QgtCoefficients:
    """Time-independent scalars that fix the whole tensor at one momentum.

    ``a_i``/``a_f`` are ground-band Berry connections of the initial and final
    Hamiltonians, ``b`` the interference coefficient, ``c`` the signed
    velocity spread (``c**2`` is the velocity variance), ``d`` the signed
    energy spread and ``g_kk_i`` the pre-quench metric.
    """

    a_i: NDArray | float
    a_f: NDArray | float
    b: NDArray | float
    c: NDArray | float
    d: NDArray | float
    g_kk_i: NDArray | float


@dataclass(frozen=True)
class QgtValue:
    g_kk: NDArray | float
    g0: NDArray | float
    g1: NDArray | float
    g2: NDArray | float
    g_tt: NDArray | float
    re_qkt: NDArray | float
    im_qkt: NDArray | float

    @property
    def curvature(self) -> NDArray | float:
        return -2.0 * self.im_qkt


@dataclass(frozen=True)
class BoundarySignReport:
    """Sign bookkeeping for Im Q_kt near the zone boundary (values in {-1, 0, +1})."""

    m_i: float
    m_f: float
    a_i_sign_near_pi: int
    d_sign_negative_k: int
    initial_im_qkt_sign_negative_k: int
    # sign of Im Q in the bra-k/ket-t ordering, opposite to the closed form
    ket_order_im_sign_negative_k: int
    probe_k: float
    probe_im_qkt: float

    @property
    def consistent(self) -> bool:
        return int(np.sign(self.probe_im_qkt)) == self.initial_im_qkt_sign_negative_k

    def as_dict(self) -> dict:
        return {
            "m_i": self.m_i,
            "m_f": self.m_f,
            "a_i_sign_near_pi": self.a_i_sign_near_pi,
            "d_sign_negative_k": self.d_sign_negative_k,
            "initial_im_qkt_sign_negative_k": self.initial_im_qkt_sign_negative_k,
            "ket_order_im_sign_negative_k": self.ket_order_im_sign_negative_k,
            "probe_k": self.probe_k,
            "probe_im_qkt": self.probe_im_qkt,
            "consistent": self.consistent,
        }


def coefficients(proto: QuenchProtocol, k: ArrayLike) -> QgtCoefficients:
    ri = check_gap(proto.initial, k)
    rf = check_gap(proto.final, k)
    c, s = cos_k(k), sin_k(k)
    mi, mf = proto.m_i, proto.m_f
    a_i = berry_connection(proto.initial, k)
    a_f = berry_connection(proto.final, k)
    # overlap factor n / (ri rf); for n >= 0 use 1 - deficit so it is exactly 1 when mi == mf
    n = mi * mf + (mi + mf) * c + 1.0
    rr = ri * rf
    with np.errstate(divide="ignore", invalid="ignore"):
        deficit = np.square((mi - mf) * s) / (rr * (rr + n))
    factor = np.where(n >= 0, 1.0 - deficit, n / rr)
    b = -a_f * factor
    if np.ndim(b) == 0:
        b = float(b)
    vel = proto.j2 * mf * (mi - mf) * np.square(s) / (ri * np.square(rf))
    # sign(0) = 0 makes d vanish identically at sin k = 0
    d = -np.sqrt(energy_variance(proto, k)) * np.sign((mi - mf) * s)
    return QgtCoefficients(a_i=a_i, a_f=a_f, b=b, c=vel, d=d, g_kk_i=metric(proto.initial, k))


def _check_time(t: ArrayLike) -> None:
    if np.any(np.asarray(t) < 0):
        raise InvalidParameters("post-quench quantities are defined for t >= 0")


def g_kk(proto: QuenchProtocol, k: ArrayLike, t: ArrayLike):
    """Momentum metric and its breakdown ``(g_kk, g0, g1, g2)`` with g_kk = g0 + g1 t + g2 t^2."""
    _check_time(t)
    co = coefficients(proto, k)
    phase = proto.j2 * check_gap(proto.final, k) * np.asarray(t, dtype=float)
    s2 = np.square(np.sin(phase))
    b2 = np.square(co.b)
    g0 = co.g_kk_i + 4.0 * (b2 - co.a_i * co.a_f) * s2 + 4.0 * (np.square(co.a_f) - b2) * np.square(s2)
    g1 = 2.0 * co.b * co.c * np.sin(2.0 * phase)
    g2 = np.square(co.c) * np.ones_like(phase)
    total = g0 + g1 * t + g2 * np.square(t)
    return total, g0, g1, g2


def g_tt(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    return energy_variance(proto, k)


def q_kt(proto: QuenchProtocol, k: ArrayLike, t: ArrayLike) -> NDArray | complex:
    """Off-diagonal entry D [B sin(2 R_f t) + C t] + i D (A_i - 2 A_f sin^2(R_f t))."""
    _check_time(t)
    co = coefficients(proto, k)
    phase = proto.j2 * check_gap(proto.final, k) * np.asarray(t, dtype=float)
    re = co.d * (co.b * np.sin(2.0 * phase) + co.c * t)
    im = co.d * (co.a_i - 2.0 * co.a_f * np.square(np.sin(phase)))
    return re + 1j * im


def time_averaged_im_qkt(proto: QuenchProtocol, k: ArrayLike) -> NDArray | float:
    co = coefficients(proto, k)
    return co.d * (co.a_i - co.a_f)


def berry_curvature_kt(proto: QuenchProtocol, k: ArrayLike, t: ArrayLike) -> NDArray | float:
    return -2.0 * np.imag(q_kt(proto, k, t))


def evaluate(proto: QuenchProtocol, k: ArrayLike, t: ArrayLike) -> QgtValue:
    total, g0, g1, g2 = g_kk(proto, k, t)
    q = q_kt(proto, k, t)
    gtt = g_tt(proto, k) * np.ones_like(np.asarray(t, dtype=float))
    return QgtValue(g_kk=total, g0=g0, g1=g1, g2=g2, g_tt=gtt, re_qkt=np.real(q), im_qkt=np.imag(q))


def qgt_tensor(proto: QuenchProtocol, k: float, t: float) -> NDArray:
    """2x2 Hermitian tensor [[Q_kk, Q_kt], [Q_tk, Q_tt]] in bra-mu/ket-nu ordering."""
    total, *_ = g_kk(proto, k, t)
    q = complex(q_kt(proto, k, t))
    return np.array([[float(total), q.conjugate()], [q, float(g_tt(proto, k))]], dtype=complex)


def overlap_b(proto: QuenchProtocol, k: float) -> float:
    """Interference coefficient via the overlap route, -A_f (2 Re alpha - 1)."""
    alpha = overlap_coeffs(proto, k).alpha
    return float(-berry_connection(proto.final, k) * (2.0 * alpha.real - 1.0))


BOUNDARY_PROBE_OFFSET = 0.01


def boundary_sign_diagnostic(proto: QuenchProtocol) -> BoundarySignReport:
    """Predict the sign of Im Q_kt at t=0 just inside k = -pi and check it by direct evaluation."""
    if proto.m_i == 1.0:
        raise AtCriticalPoint("sign of the initial Berry connection is undefined at m_i = 1")
    a_sign = int(np.sign(1.0 - proto.m_i))
    # on sin k < 0: D = -sqrt(.) * sign(-(m_i - m_f)) = +sqrt(.) * sign(m_i - m_f)
    d_sign = int(np.sign(proto.m_i - proto.m_f))
    predicted = a_sign * d_sign
    k_probe = -np.pi + BOUNDARY_PROBE_OFFSET
    probe = float(np.imag(q_kt(proto, k_probe, 0.0)))
    return BoundarySignReport(
        m_i=proto.m_i,
        m_f=proto.m_f,
        a_i_sign_near_pi=a_sign,
        d_sign_negative_k=d_sign,
        initial_im_qkt_sign_negative_k=predicted,
        ket_order_im_sign_negative_k=-predicted,
        probe_k=float(k_probe),
        probe_im_qkt=probe,
    )
