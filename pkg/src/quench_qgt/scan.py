"""Grid scans over (k, t), Brillouin-zone integrals, reports and flat-file export."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from . import __version__
from . import analytic, numeric
from .errors import ConfigInvalid, DegenerateGrid, GapClosed, IoFailure
from .model import TAU_GAP, r_tilde
from .quench import QuenchProtocol, excitation_probability, volatility_timescale

COMPONENTS = ("g_kk", "g0", "g1", "g2", "g_tt", "re_qkt", "im_qkt", "curvature", "beta2", "tau")
FORMATS = ("csv", "json")
VERIFY_TOLERANCE = 1e-6
VERIFY_FRACTION = 0.01

REFERENCE_PROTOCOLS = (
    QuenchProtocol(0.5, 0.1),
    QuenchProtocol(1.1, 2.0),
    QuenchProtocol(1.5, 0.1),
    QuenchProtocol(0.9, 2.0),
)


@dataclass(frozen=True)
class ScanConfig:
    proto: QuenchProtocol
    k_points: int = 401
    t_max: float = 20.0
    t_points: int = 201
    components: tuple[str, ...] = ("g_kk",)
    fd_verify: bool = False
    fd_step: float = 1e-5
    seed: int = 0
    format: str = "csv"
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.k_points) != self.k_points or self.k_points < 3:
            raise ConfigInvalid(f"k_points must be an integer >= 3, got {self.k_points!r}")
        if int(self.t_points) != self.t_points or self.t_points < 1:
            raise ConfigInvalid(f"t_points must be an integer >= 1, got {self.t_points!r}")
        if not math.isfinite(self.t_max) or self.t_max < 0:
            raise ConfigInvalid(f"t_max must be finite and >= 0, got {self.t_max!r}")
        if not self.components:
            raise ConfigInvalid("at least one output component is required")
        unknown = [c for c in self.components if c not in COMPONENTS]
        if unknown:
            raise ConfigInvalid(f"unknown components {unknown}; choose from {list(COMPONENTS)}")
        if len(set(self.components)) != len(self.components):
            raise ConfigInvalid("duplicate components")
        if self.format not in FORMATS:
            raise ConfigInvalid(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if not (numeric.MIN_STEP <= self.fd_step <= numeric.MAX_STEP):
            raise ConfigInvalid(f"fd_step {self.fd_step!r} outside [{numeric.MIN_STEP}, {numeric.MAX_STEP}]")


@dataclass
class ScanResult:
    columns: list[str]
    rows: NDArray
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> NDArray:
        return self.rows[:, self.columns.index(name)]


def k_grid(k_points: int) -> NDArray:
    """Uniform grid over (-pi, pi], symmetric under k -> -k (node pairs are exact negatives)."""
    j = np.arange(-((k_points - 1) // 2), k_points // 2 + 1)
    return np.pi * (2.0 * j / k_points)


def t_grid(t_max: float, t_points: int) -> NDArray:
    if t_points == 1:
        return np.array([0.0])
    return np.linspace(0.0, t_max, t_points)


def usable_k(proto: QuenchProtocol, ks: NDArray) -> tuple[NDArray, list[float]]:
    """Drop nodes where either Hamiltonian is gapless; excluded nodes are returned for the record."""
    bad = np.zeros(ks.shape, dtype=bool)
    for params in (proto.initial, proto.final):
        bad |= r_tilde(params, ks) <= TAU_GAP
    # keep the grid symmetric: drop the partner of any excluded node too
    bad |= np.isin(-ks, ks[bad])
    return ks[~bad], [float(k) for k in ks[bad]]


def _row_block(proto: QuenchProtocol, k: float, ts: NDArray, components: Sequence[str]) -> NDArray:
    val = analytic.evaluate(proto, k, ts)
    cols = []
    for name in components:
        if name == "curvature":
            col = val.curvature
        elif name == "beta2":
            col = np.full(ts.shape, float(excitation_probability(proto, k)))
        elif name == "tau":
            col = np.full(ts.shape, volatility_timescale(proto, k))
        else:
            col = getattr(val, name)
        cols.append(np.broadcast_to(np.asarray(col, dtype=float), ts.shape))
    return np.column_stack([np.full(ts.shape, k), ts, *cols])


def verify_residual(proto: QuenchProtocol, k: float, t: float, step: float) -> float:
    """Max over tensor entries of |analytic - numeric| / max(1, |analytic|)."""
    cfg = numeric.FdConfig(dk=step, dt=step)
    ref = analytic.qgt_tensor(proto, k, t)
    num = numeric.numeric_qgt(proto, k, t, cfg).as_array()
    return float(np.max(np.abs(ref - num) / np.maximum(1.0, np.abs(ref))))


def _verify(cfg: ScanConfig, ks: NDArray, ts: NDArray) -> dict:
    candidates = []
    for k in ks:
        try:
            numeric._check_stencil(cfg.proto, float(k), cfg.fd_step)
        except GapClosed:
            continue
        candidates.extend((float(k), float(t)) for t in ts if t >= cfg.fd_step)
    if not candidates:
        return {"fd_samples": 0, "fd_residual_max": None, "fd_step": cfg.fd_step}
    n = max(1, math.ceil(VERIFY_FRACTION * len(ks) * len(ts)))
    n = min(n, len(candidates))
    rng = np.random.default_rng(cfg.seed)
    picks = np.sort(rng.choice(len(candidates), size=n, replace=False))
    worst = 0.0
    for i in picks:
        worst = max(worst, verify_residual(cfg.proto, *candidates[i], cfg.fd_step))
    return {"fd_samples": int(n), "fd_residual_max": worst, "fd_step": cfg.fd_step}


def run_scan(cfg: ScanConfig) -> ScanResult:
    """Evaluate the requested components on the (k, t) grid, k-major then t."""
    ks_all = k_grid(cfg.k_points)
    ks, excluded = usable_k(cfg.proto, ks_all)
    if ks.size == 0:
        raise DegenerateGrid("every k node was excluded")
    ts = t_grid(cfg.t_max, cfg.t_points)
    comps = list(cfg.components)

    def block(k: float) -> NDArray:
        return _row_block(cfg.proto, float(k), ts, comps)

    # each block is computed identically whatever thread runs it; map keeps grid order
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            blocks = list(pool.map(block, ks))
    else:
        blocks = [block(k) for k in ks]
    rows = np.vstack(blocks)

    metadata = {
        "tool": "quench_qgt",
        "version": __version__,
        "protocol": {"m_i": cfg.proto.m_i, "m_f": cfg.proto.m_f, "j2": cfg.proto.j2},
        "grid": {
            "k_points": cfg.k_points,
            "k_used": int(ks.size),
            "k_excluded": excluded,
            "t_max": cfg.t_max,
            "t_points": cfg.t_points,
        },
        "components": comps,
    }
    if cfg.fd_verify:
        metadata["verification"] = _verify(cfg, ks, ts)
    return ScanResult(columns=["k", "t", *comps], rows=rows, metadata=metadata)


def _pair_order(ks: NDArray) -> list[int]:
    """Summation order: k=0, then each (+k, -k) pair, then the zone boundary."""
    pos = {float(k): i for i, k in enumerate(ks)}
    order, seen = [], set()
    for i in np.argsort(np.abs(ks), kind="stable"):
        if i in seen:
            continue
        order.append(int(i))
        seen.add(i)
        partner = pos.get(-float(ks[i]))
        if partner is not None and partner not in seen:
            order.append(partner)
            seen.add(partner)
    return order


def bz_integral_im_qkt(proto: QuenchProtocol, t: float, k_points: int) -> float:
    """Periodic trapezoid rule for the zone integral of Im Q_kt at fixed t."""
    if int(k_points) != k_points or k_points < 64:
        raise ConfigInvalid(f"k_points must be an integer >= 64, got {k_points!r}")
    ks, _ = usable_k(proto, k_grid(k_points))
    if ks.size == 0:
        raise DegenerateGrid("every k node was excluded")
    values = np.imag(analytic.q_kt(proto, ks, t))
    total = 0.0
    for i in _pair_order(ks):
        total += float(values[i])
    return total * (2.0 * np.pi / k_points)


@dataclass(frozen=True)
class PeakEntry:
    label: str
    m_i: float
    m_f: float
    peak: float
    k_at_peak: float


@dataclass(frozen=True)
class PeakReport:
    entries: tuple[PeakEntry, ...]
    k_points: int

    @property
    def ordering(self) -> list[str]:
        """Protocol labels sorted by increasing peak height."""
        return [e.label for e in sorted(self.entries, key=lambda e: e.peak)]

    def strictly_increasing(self) -> bool:
        peaks = [e.peak for e in self.entries]
        return all(a < b for a, b in zip(peaks, peaks[1:]))

    def as_dict(self) -> dict:
        return {
            "k_points": self.k_points,
            "entries": [e.__dict__ for e in self.entries],
            "ordering": self.ordering,
            "input_order_increasing": self.strictly_increasing(),
        }


def gtt_peak_report(protocols: Iterable[QuenchProtocol] = REFERENCE_PROTOCOLS, k_points: int = 512) -> PeakReport:
    """Maximum of the energy variance over the zone, and where it sits (k >= 0 side)."""
    if int(k_points) != k_points or k_points < 256:
        raise ConfigInvalid(f"k_points must be an integer >= 256, got {k_points!r}")
    entries = []
    for proto in protocols:
        ks, _ = usable_k(proto, k_grid(k_points))
        ks = ks[ks >= 0]
        gtt = np.asarray(analytic.g_tt(proto, ks))
        i = int(np.argmax(gtt))
        entries.append(PeakEntry(proto.label(), proto.m_i, proto.m_f, float(gtt[i]), float(ks[i])))
    return PeakReport(tuple(entries), k_points)


# --- export ----------------------------------------------------------------------


def _json_number(x: float):
    return x if math.isfinite(x) else repr(x)  # 'inf', '-inf', 'nan'


def _from_json_number(x) -> float:
    return float(x)


def to_csv_text(result: ScanResult) -> str:
    lines = [",".join(result.columns)]
    for row in result.rows:
        lines.append(",".join(f"{v:.16e}" for v in row))
    return "\n".join(lines) + "\n"


def to_json_text(result: ScanResult) -> str:
    payload = {
        "metadata": result.metadata,
        "columns": result.columns,
        "rows": [[_json_number(float(v)) for v in row] for row in result.rows],
    }
    return json.dumps(payload, allow_nan=False, separators=(",", ":")) + "\n"


def export(result: ScanResult, path: str | Path, format: str = "csv") -> Path:
    if format not in FORMATS:
        raise ConfigInvalid(f"format must be one of {FORMATS}, got {format!r}")
    text = to_csv_text(result) if format == "csv" else to_json_text(result)
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> ScanResult:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            rows = [[float(v) for v in r] for r in reader]
    except (OSError, StopIteration) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return ScanResult(columns=columns, rows=np.array(rows, dtype=float).reshape(-1, len(columns)))


def read_json(path: str | Path) -> ScanResult:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    cols = payload["columns"]
    rows = np.array([[_from_json_number(v) for v in r] for r in payload["rows"]], dtype=float)
    return ScanResult(columns=cols, rows=rows.reshape(-1, len(cols)), metadata=payload["metadata"])
