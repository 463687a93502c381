"""Parameter scans, gap series, finite-size fits and their file outputs."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from xychain import closedform, quadoracle, spectrum
from xychain.errors import DivergenceError, DomainError

__all__ = [
    "QUANTITIES",
    "CSV_HEADER",
    "GapFit",
    "ScanGrid",
    "ScanRow",
    "count_local_minima",
    "default_gap_ladder",
    "fit_gap_scaling",
    "fit_range_sensitivity",
    "circle_fd_derivative",
    "gap_alpha_sweep",
    "gap_series",
    "gap_series_rows",
    "plot_script",
    "scan",
    "write_csv",
]

QUANTITIES = ("energy", "magnetization", "susceptibility", "gap", "circle-derivative")
CSV_HEADER = ("alpha", "gamma", "quantity", "value", "status")


@dataclass(frozen=True)
class ScanGrid:
    """Rectangular (alpha, gamma) grid and the quantity to evaluate on it.

    ``n_sites``/``boundary`` apply to ``gap``; ``order`` to
    ``circle-derivative``, which depends on gamma only and is reported at
    alpha = sqrt(1 - gamma^2) (the alpha range is then ignored).
    """

    alpha_range: tuple[float, float, int]
    gamma_range: tuple[float, float, int]
    quantity: str = "energy"
    n_sites: int | None = None
    boundary: str = "open"
    order: int | None = None

    def __post_init__(self):
        for name, (lo, hi, count) in (("alpha", self.alpha_range), ("gamma", self.gamma_range)):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"{name} range must be finite")
            if int(count) != count or count < 2:
                raise DomainError(f"{name} count must be an integer >= 2 (got {count})")
        if self.quantity not in QUANTITIES:
            raise DomainError(f"unknown quantity {self.quantity!r}; expected one of {QUANTITIES}")
        if max(abs(self.gamma_range[0]), abs(self.gamma_range[1])) > 1.0:
            raise DomainError("gamma range must lie inside [-1, 1]")
        if self.quantity == "gap":
            if self.n_sites is None:
                raise DomainError("gap scans need n_sites")
            spectrum.ChainSpec(self.n_sites, self.boundary)
        if self.quantity == "circle-derivative" and (self.order is None or self.order < 2):
            raise DomainError("circle-derivative scans need order >= 2")

    @property
    def alphas(self) -> np.ndarray:
        lo, hi, count = self.alpha_range
        return np.linspace(lo, hi, int(count))

    @property
    def gammas(self) -> np.ndarray:
        lo, hi, count = self.gamma_range
        return np.linspace(lo, hi, int(count))

    @property
    def label(self) -> str:
        if self.quantity == "gap":
            return f"gap(N={self.n_sites};{self.boundary})"
        if self.quantity == "circle-derivative":
            return f"circle-derivative({self.order})"
        return self.quantity

    def nodes(self) -> list[tuple[float, float]]:
        """Grid nodes, row-major in alpha then gamma."""
        if self.quantity == "circle-derivative":
            return [(math.sqrt((1.0 - g) * (1.0 + g)), float(g)) for g in self.gammas]
        return [(float(a), float(g)) for a in self.alphas for g in self.gammas]


class ScanRow(NamedTuple):
    alpha: float
    gamma: float
    quantity: str
    value: float
    status: str


def _evaluate(grid: ScanGrid, alpha: float, gamma: float) -> ScanRow:
    try:
        if grid.quantity == "energy":
            value = closedform.ground_energy(alpha, gamma)
        elif grid.quantity == "magnetization":
            value = closedform.magnetization(alpha, gamma)
        elif grid.quantity == "susceptibility":
            value = closedform.susceptibility(alpha, gamma)
        elif grid.quantity == "gap":
            value = spectrum.gap(alpha, gamma, spectrum.ChainSpec(grid.n_sites, grid.boundary))
        else:
            value = closedform.circle_derivative(grid.order, abs(gamma))
    except DivergenceError:
        return ScanRow(alpha, gamma, grid.label, math.nan, "divergent_line")
    except DomainError:
        return ScanRow(alpha, gamma, grid.label, math.nan, "domain_error")
    return ScanRow(alpha, gamma, grid.label, float(value), "ok")


def _evaluate_chunk(args):
    grid, nodes = args
    return [_evaluate(grid, a, g) for a, g in nodes]


def scan(grid: ScanGrid, workers: int = 1) -> list[ScanRow]:
    """Evaluate ``grid.quantity`` on every node.

    Nodes on divergence lines or outside a formula's domain come back with a
    NaN value and a status flag instead of raising.  Output order is the
    node order regardless of ``workers``.
    """
    nodes = grid.nodes()
    if workers <= 1 or len(nodes) < 64:
        return [_evaluate(grid, a, g) for a, g in nodes]
    chunk = max(16, len(nodes) // (4 * workers))
    pieces = [(grid, nodes[i : i + chunk]) for i in range(0, len(nodes), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [row for rows in pool.map(_evaluate_chunk, pieces) for row in rows]


def gap_series(
    alpha: float,
    gamma: float,
    ns: Sequence[int],
    boundary: str = "open",
    workers: int = 1,
) -> list[tuple[int, float]]:
    """(N, Delta_N) for each chain length in ascending ``ns``."""
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("chain lengths must be strictly ascending")
    chains = [spectrum.ChainSpec(n, boundary) for n in ns]

    def one(chain):
        return spectrum.gap(alpha, gamma, chain)

    if workers <= 1:
        gaps = [one(c) for c in chains]
    else:
        # LAPACK releases the GIL, threads are enough here
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(one, chains))
    return list(zip(ns, gaps))


def gap_series_rows(alpha: float, gamma: float, series, boundary: str = "open") -> list[ScanRow]:
    return [
        ScanRow(float(alpha), float(gamma), f"gap(N={n};{boundary})", float(d), "ok")
        for n, d in series
    ]


def default_gap_ladder(lo: int = 50, hi: int = 1000, count: int = 10) -> list[int]:
    """Geometric ladder of distinct chain lengths from ``lo`` to ``hi``."""
    ladder = np.unique(np.rint(np.geomspace(lo, hi, count)).astype(int))
    return [int(n) for n in ladder]


@dataclass(frozen=True)
class GapFit:
    """Least-squares fit Delta_N = a / N + delta_inf."""

    a: float
    delta_inf: float
    stderr_a: float
    stderr_delta_inf: float
    residual_norm: float
    n_points: int
    n_range: tuple[int, int] = field(default=(0, 0))


def fit_gap_scaling(points: Iterable[tuple[int, float]]) -> GapFit:
    """Unweighted ordinary least squares of Delta_N against 1/N.

    Standard errors come from the residual variance RSS / (n - 2);
    ``residual_norm`` is the root-mean-square residual.
    """
    pts = [(int(n), float(d)) for n, d in points]
    if len(pts) < 3:
        raise DomainError(f"need at least 3 points to fit (got {len(pts)})")
    ns = np.array([n for n, _ in pts], dtype=float)
    if len(np.unique(ns)) < 2:
        raise DomainError("rank-deficient fit: all chain lengths are equal")
    if len(np.unique(ns)) != len(ns):
        raise DomainError("chain lengths must be distinct")
    y = np.array([d for _, d in pts])
    design = np.column_stack([1.0 / ns, np.ones_like(ns)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise DomainError("rank-deficient fit")
    resid = y - design @ coef
    dof = len(y) - 2
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return GapFit(
        a=float(coef[0]),
        delta_inf=float(coef[1]),
        stderr_a=float(math.sqrt(max(cov[0, 0], 0.0))),
        stderr_delta_inf=float(math.sqrt(max(cov[1, 1], 0.0))),
        residual_norm=float(math.sqrt(np.mean(resid**2))),
        n_points=len(y),
        n_range=(int(ns.min()), int(ns.max())),
    )


def fit_range_sensitivity(points, min_points: int = 3) -> list[GapFit]:
    """Refit on the full series, then dropping the shortest / longest chains.

    Returns the full fit followed by fits on the upper and lower halves of
    the N range, as long as each keeps ``min_points`` points.
    """
    pts = sorted((int(n), float(d)) for n, d in points)
    fits = [fit_gap_scaling(pts)]
    half = len(pts) // 2
    for subset in (pts[half:], pts[: len(pts) - half]):
        if len(subset) >= min_points:
            fits.append(fit_gap_scaling(subset))
    return fits


def gap_alpha_sweep(gamma: float, n_sites: int, alphas, boundary: str = "open") -> np.ndarray:
    chain = spectrum.ChainSpec(n_sites, boundary)
    return np.array([spectrum.gap(a, gamma, chain) for a in alphas])


def count_local_minima(values) -> int:
    """Number of strict interior local minima of a sampled curve."""
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return 0
    return int(np.count_nonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])))


def _format_value(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.17g}"


def write_csv(rows: Iterable[ScanRow], target) -> None:
    """Write rows with the fixed header; ``target`` is a path or a text stream.

    Floats use 17 significant digits so that values round-trip exactly.
    """
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [_format_value(row.alpha), _format_value(row.gamma), row.quantity, _format_value(row.value), row.status]
        )


def csv_text(rows: Iterable[ScanRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


_MAP_SCRIPT = '''\
"""Plot {title} from {csv_name}."""
import csv
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, encoding="utf-8") as fh:
    rows = [r for r in csv.DictReader(fh)]
alphas = sorted({{float(r["alpha"]) for r in rows}})
gammas = sorted({{float(r["gamma"]) for r in rows}})
grid = np.full((len(gammas), len(alphas)), np.nan)
for r in rows:
    if r["status"] == "ok":
        grid[gammas.index(float(r["gamma"])), alphas.index(float(r["alpha"]))] = float(r["value"])
fig, ax = plt.subplots()
mesh = ax.pcolormesh(alphas, gammas, grid, shading="auto")
fig.colorbar(mesh, ax=ax, label={quantity!r})
{extra}ax.set_xlabel("alpha")
ax.set_ylabel("gamma")
ax.set_title({title!r})
fig.savefig({png_name!r}, dpi=150)
'''

_LINE_SCRIPT = '''\
"""Plot {title} from {csv_name}."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, encoding="utf-8") as fh:
    rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
curves = {{}}
for r in rows:
    curves.setdefault(r["gamma"], []).append((float(r["alpha"]), float(r["value"])))
fig, ax = plt.subplots()
for gamma, pts in curves.items():
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"gamma = {{float(gamma):.4g}}")
ax.set_xlabel("alpha")
ax.set_ylabel({quantity!r})
ax.set_title({title!r})
ax.legend()
fig.savefig({png_name!r}, dpi=150)
'''

_GAP_SCRIPT = '''\
"""Plot {title} from {csv_name}."""
import csv
import re
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, encoding="utf-8") as fh:
    rows = [r for r in csv.DictReader(fh) if r["status"] == "ok"]
series = {{}}
for r in rows:
    n = int(re.search(r"N=(\\d+)", r["quantity"]).group(1))
    series.setdefault((r["alpha"], r["gamma"]), []).append((n, float(r["value"])))
fig, ax = plt.subplots()
for (alpha, gamma), pts in series.items():
    pts.sort()
    n = np.array([p[0] for p in pts], dtype=float)
    d = np.array([p[1] for p in pts])
    a, b = np.polyfit(1.0 / n, d, 1)
    ax.plot(n, d, "o", label=f"alpha={{float(alpha):.3g}}, gamma={{float(gamma):.3g}}")
    ax.plot(n, a / n + b, "-", label=f"fit a={{a:.4g}}, Delta_inf={{b:.3g}}")
ax.set_xlabel("N")
ax.set_ylabel("Delta_N")
ax.set_title({title!r})
ax.legend()
fig.savefig({png_name!r}, dpi=150)
'''


def plot_script(kind: str, csv_path, title: str, quantity: str = "value") -> str:
    """Source of a standalone matplotlib script that plots ``csv_path``.

    ``kind`` is ``map`` (2-D colour map over alpha and gamma), ``lines``
    (curves in alpha, one per gamma) or ``gap`` (Delta_N against N with the
    a/N + Delta_inf fit).  Nothing is plotted here.
    """
    csv_name = Path(csv_path).name
    png_name = Path(csv_name).with_suffix(".png").name
    fields = dict(title=title, csv_name=csv_name, png_name=png_name, quantity=quantity)
    if kind == "map":
        extra = ""
        if quantity == "energy":
            extra = 'ax.contour(alphas, gammas, grid, levels=[-0.5], colors="w")\n'
        return _MAP_SCRIPT.format(extra=extra, **fields)
    if kind == "lines":
        return _LINE_SCRIPT.format(**fields)
    if kind == "gap":
        return _GAP_SCRIPT.format(**fields)
    raise DomainError(f"unknown plot kind {kind!r}")


def circle_fd_derivative(order: int, gamma: float, side: int, accuracy: int = 2) -> quadoracle.Derivative:
    """One-sided finite-difference d^order eps / d alpha^order at the circle.

    ``side=-1`` samples only the disk interior, ``side=+1`` only the annulus.
    The largest step keeps the annulus stencil short of the critical line
    alpha = 1, which is the nearest singularity on both sides.
    """
    g = abs(float(gamma))
    a0 = math.sqrt((1.0 - g) * (1.0 + g))
    room = (1.0 - a0) if side > 0 else a0
    h0 = min(1e-2 if order <= 2 else 5e-2, 0.9 * room / (order + accuracy - 1))
    return quadoracle.derivative(
        lambda x: closedform.ground_energy(x, g), a0, order, h0=h0, side=side, accuracy=accuracy
    )
