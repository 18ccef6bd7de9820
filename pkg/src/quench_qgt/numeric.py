"""Finite-difference and operator-based oracles for the post-quench geometric tensor.

Nothing here uses the closed forms of :mod:`quench_qgt.analytic`.  States are
built independently: the initial ground state comes from ``numpy.linalg.eigh``
of the assembled 2x2 Hamiltonian (arbitrary phase per k) and is propagated with
the spectral decomposition of the final Hamiltonian.  Phase alignment of the
stencil neighbours is what makes the difference quotients gauge-safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateStencil, StepTooLarge
from .model import TAU_GAP, ModelParams, group_velocity, hamiltonian, r_tilde, wrap_k
from .quench import QuenchProtocol, overlap_arrays

MIN_STEP = 1e-7
MAX_STEP = 1e-2
EXCLUSION_RADIUS = 0.05

StateFn = Callable[[float, float], NDArray]


@dataclass(frozen=True)
class FdConfig:
    dk: float = 1e-4
    dt: float = 1e-4
    scheme: Literal["central-2nd"] = "central-2nd"
    gauge_align: bool = True

    def __post_init__(self) -> None:
        for name in ("dk", "dt"):
            h = getattr(self, name)
            if not (MIN_STEP <= h <= MAX_STEP):
                raise StepTooLarge(f"{name}={h!r} outside [{MIN_STEP}, {MAX_STEP}]")
        if self.scheme != "central-2nd":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


@dataclass(frozen=True)
class QgtMatrix:
    """Tensor entries Q_mu,nu = <d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi>."""

    q_kk: float
    q_tt: float
    q_kt: complex
    q_tk: complex

    def as_array(self) -> NDArray:
        return np.array([[self.q_kk, self.q_kt], [self.q_tk, self.q_tt]], dtype=complex)


@dataclass(frozen=True)
class HeisenbergMetric:
    """Position/velocity moments whose combination var_x + 2 t cov_xv + t^2 var_v is q_kk."""

    var_x: float
    cov_xv: float
    var_v: float
    t: float

    @property
    def total(self) -> float:
        return self.var_x + 2.0 * self.t * self.cov_xv + self.t**2 * self.var_v


@dataclass(frozen=True)
class ConstancyReport:
    m: float
    k: float
    t_samples: tuple[float, ...]
    values: tuple[float, ...]
    reference: float
    spread: float
    tolerance: float = 1e-8
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        ok = self.spread < self.tolerance and abs(self.values[0] - self.reference) < self.tolerance
        object.__setattr__(self, "passed", bool(ok))


# --- independent state construction -------------------------------------------------


def ground_state(params: ModelParams, k: float) -> NDArray:
    """Ground state of the assembled Hamiltonian, phase as returned by LAPACK."""
    _, vecs = np.linalg.eigh(hamiltonian(params, k))
    return vecs[:, 0]


def propagate(params: ModelParams, k: float, t: float, state: NDArray) -> NDArray:
    """exp(-i H t) state via the spectral decomposition of H(k)."""
    energies, vecs = np.linalg.eigh(hamiltonian(params, k))
    return vecs @ (np.exp(-1j * energies * t) * (vecs.conj().T @ state))


def quench_state(proto: QuenchProtocol, k: float, t: float) -> NDArray:
    return propagate(proto.final, k, t, ground_state(proto.initial, k))


def _degenerate_k(m: float) -> bool:
    return abs(m - 1.0) <= TAU_GAP


def _check_stencil(proto: QuenchProtocol, k: float, dk: float) -> None:
    for m in {proto.m_i, proto.m_f}:
        if _degenerate_k(m) and np.pi - abs(float(wrap_k(k))) < max(EXCLUSION_RADIUS, 2.0 * dk):
            raise DegenerateStencil(f"k={k} lies within the exclusion zone of the gap closing at m={m}")
        params = ModelParams(m, proto.j2)
        for kk in (k - dk, k, k + dk):
            if r_tilde(params, kk) <= TAU_GAP:
                raise DegenerateStencil(f"stencil point k={kk} hits the gap closing at m={m}")


def _align(reference: NDArray, vec: NDArray) -> NDArray:
    # rescale so that <reference|vec> is real and positive
    ov = np.vdot(reference, vec)
    return vec * (np.conj(ov) / abs(ov))


def _derivatives(state: StateFn, k: float, t: float, cfg: FdConfig) -> tuple[NDArray, NDArray, NDArray]:
    psi = state(k, t)
    nbrs = [state(k + cfg.dk, t), state(k - cfg.dk, t), state(k, t + cfg.dt), state(k, t - cfg.dt)]
    if cfg.gauge_align:
        nbrs = [_align(psi, v) for v in nbrs]
    d_k = (nbrs[0] - nbrs[1]) / (2.0 * cfg.dk)
    d_t = (nbrs[2] - nbrs[3]) / (2.0 * cfg.dt)
    return psi, d_k, d_t


def _cov(psi: NDArray, a: NDArray, b: NDArray) -> complex:
    """<a|b> - <a|psi><psi|b>."""
    return complex(np.vdot(a, b) - np.vdot(a, psi) * np.vdot(psi, b))


def numeric_qgt(
    proto: QuenchProtocol,
    k: float,
    t: float,
    cfg: FdConfig | None = None,
    state: StateFn | None = None,
) -> QgtMatrix:
    """Central-difference tensor of the evolved state at (k, t).

    ``state`` overrides the default independent propagator; it must map
    ``(k, t)`` to a normalized spinor.
    """
    cfg = cfg or FdConfig()
    if t < cfg.dt:
        raise ValueError(f"time stencil would cross the quench at t=0 (t={t}, dt={cfg.dt})")
    _check_stencil(proto, k, cfg.dk)
    state = state or (lambda kk, tt: quench_state(proto, kk, tt))
    psi, d_k, d_t = _derivatives(state, k, t, cfg)
    return QgtMatrix(
        q_kk=_cov(psi, d_k, d_k).real,
        q_tt=_cov(psi, d_t, d_t).real,
        q_kt=_cov(psi, d_k, d_t),
        q_tk=_cov(psi, d_t, d_k),
    )


def variance_velocity(proto: QuenchProtocol, k: float) -> float:
    """Var of the band-diagonal velocity in the quenched state."""
    alpha, beta = overlap_arrays(proto, k)
    pa, pb = float(np.abs(alpha) ** 2), float(np.abs(beta) ** 2)
    vm = float(group_velocity(proto.final, k, "minus"))
    vp = float(group_velocity(proto.final, k, "plus"))
    return pa * vm**2 + pb * vp**2 - (pa * vm + pb * vp) ** 2


def _position_vector(proto: QuenchProtocol, k: float, t: float, cfg: FdConfig) -> tuple[NDArray, NDArray]:
    """psi and i d_k psi (phase-aligned central difference)."""
    state = lambda kk, tt: quench_state(proto, kk, tt)  # noqa: E731
    psi = state(k, t)
    plus, minus = state(k + cfg.dk, t), state(k - cfg.dk, t)
    if cfg.gauge_align:
        plus, minus = _align(psi, plus), _align(psi, minus)
    return psi, 1j * (plus - minus) / (2.0 * cfg.dk)


def covariance_x_H(proto: QuenchProtocol, k: float, t: float, cfg: FdConfig | None = None) -> complex:
    """Cov(x, H_f) = <x psi|H_f psi> - <x psi|psi><H_f> with x psi = i d_k psi.

    This is the bra-k/ket-t tensor entry, i.e. the conjugate of
    :func:`quench_qgt.analytic.q_kt`.
    """
    cfg = cfg or FdConfig()
    _check_stencil(proto, k, cfg.dk)
    psi, x_psi = _position_vector(proto, k, t, cfg)
    h_psi = hamiltonian(proto.final, k) @ psi
    return _cov(psi, x_psi, h_psi)


def commutator_x_H(proto: QuenchProtocol, k: float, t: float, cfg: FdConfig | None = None) -> complex:
    """Half the expectation of [x, H_f] with x = i d_k acting on the spinor components.

    Both ``psi`` and ``H_f psi`` are differenced, so the result is
    (i/2) <d_k H_f> up to O(dk^2), including the interband velocity terms.
    """
    cfg = cfg or FdConfig()
    _check_stencil(proto, k, cfg.dk)

    def h_state(kk: float) -> NDArray:
        return hamiltonian(proto.final, kk) @ quench_state(proto, kk, t)

    psi = quench_state(proto, k, t)
    plus, minus = quench_state(proto, k + cfg.dk, t), quench_state(proto, k - cfg.dk, t)
    # a common phase rotation per neighbour keeps psi and H psi consistent
    ph_plus = np.conj(np.vdot(psi, plus)) / abs(np.vdot(psi, plus))
    ph_minus = np.conj(np.vdot(psi, minus)) / abs(np.vdot(psi, minus))
    x_psi = 1j * (plus * ph_plus - minus * ph_minus) / (2.0 * cfg.dk)
    x_hpsi = 1j * (h_state(k + cfg.dk) * ph_plus - h_state(k - cfg.dk) * ph_minus) / (2.0 * cfg.dk)
    h = hamiltonian(proto.final, k)
    return complex(0.5 * (np.vdot(psi, x_hpsi) - np.vdot(psi, h @ x_psi)))


def band_velocity_operator(params: ModelParams, k: float, h: float) -> NDArray:
    """sum_n v_n |n><n| with v_n from central differences of the eigenvalues."""
    _, vecs = np.linalg.eigh(hamiltonian(params, k))
    v = (np.linalg.eigvalsh(hamiltonian(params, k + h)) - np.linalg.eigvalsh(hamiltonian(params, k - h))) / (2.0 * h)
    return vecs @ np.diag(v) @ vecs.conj().T


def heisenberg_metric(proto: QuenchProtocol, k: float, t: float, cfg: FdConfig | None = None) -> HeisenbergMetric:
    """Split i d_k psi into a geometric part and t v psi and return the three moments."""
    cfg = cfg or FdConfig()
    _check_stencil(proto, k, cfg.dk)
    psi, x_psi = _position_vector(proto, k, t, cfg)
    v_psi = band_velocity_operator(proto.final, k, cfg.dk) @ psi
    geom = x_psi - t * v_psi
    return HeisenbergMetric(
        var_x=_cov(psi, geom, geom).real,
        cov_xv=_cov(psi, geom, v_psi).real,
        var_v=_cov(psi, v_psi, v_psi).real,
        t=float(t),
    )


def eigenstate_metric(params: ModelParams, k: float, cfg: FdConfig | None = None) -> float:
    """<d_k n|d_k n> - |<n|d_k n>|^2 for the ground band, by central differences."""
    cfg = cfg or FdConfig()
    n0 = ground_state(params, k)
    plus, minus = _align(n0, ground_state(params, k + cfg.dk)), _align(n0, ground_state(params, k - cfg.dk))
    d = (plus - minus) / (2.0 * cfg.dk)
    return float(np.vdot(d, d).real - abs(np.vdot(n0, d)) ** 2)


def no_quench_constancy(
    params: ModelParams,
    k: float,
    t_samples: Sequence[float],
    cfg: FdConfig | None = None,
) -> ConstancyReport:
    """q_kk of a ground state evolved by its own Hamiltonian, sampled at several times."""
    cfg = cfg or FdConfig()
    proto = QuenchProtocol(params.m, params.m, params.j2)
    _check_stencil(proto, k, cfg.dk)
    values = []
    for t in t_samples:
        psi, x_psi = _position_vector(proto, k, float(t), cfg)
        values.append(_cov(psi, x_psi, x_psi).real)
    return ConstancyReport(
        m=params.m,
        k=float(k),
        t_samples=tuple(float(t) for t in t_samples),
        values=tuple(values),
        reference=eigenstate_metric(params, k, cfg),
        spread=float(np.ptp(values)),
    )
