"""Selection of outgoing Bloch modes for the radiation boxes.

For every admissible vertical wave number j2 the dispersion surfaces are
sampled along j1 in (-1/2, 1/2], intersections with the level omega^2 are
bracketed per band family and refined by bisection (each step re-solves the
cell eigenproblem), and the resulting modes are kept when their Poynting
number has the sign required by the box: right-going modes enter the right
box, left-going modes the left box.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cell_eigen import BlochMode, CellGrid, CellOperator, group_velocity
from .errors import ConfigError, DegenerateBandError

__all__ = ["SelectedMode", "IndexSet", "q_prime", "incoming_admissible", "select_indices", "sample_bands"]

log = logging.getLogger(__name__)

ADMISSIBILITY_RTOL = 1e-6
DEDUP_J_DISTANCE = 1e-6
MAX_BISECTIONS = 40


def q_prime(K: int) -> list[float]:
    """Vertical wave numbers compatible with eps*K-periodicity, in (-1/2, 1/2]."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K % 2 == 0:
        nums = range(-(K // 2 - 1), K // 2 + 1)
    else:
        nums = range(-((K - 1) // 2), (K - 1) // 2 + 1)
    return [n / K for n in nums]


def incoming_admissible(omega: float, j_in) -> bool:
    """Whether a plane wave e^{i j_in.x} solves the left (a=1) Helmholtz problem."""
    j_in = np.asarray(j_in, dtype=float)
    return abs(j_in @ j_in - omega**2) < ADMISSIBILITY_RTOL * omega**2


@dataclass(frozen=True)
class SelectedMode:
    mode: BlochMode
    poynting: float
    vg: np.ndarray

    @property
    def j(self) -> np.ndarray:
        return self.mode.j

    def row(self) -> tuple:
        return (
            self.mode.side,
            float(self.mode.j[0]),
            float(self.mode.j[1]),
            int(self.mode.m),
            float(self.mode.mu),
            float(self.poynting),
            float(self.vg[0]),
            float(self.vg[1]),
        )


@dataclass(frozen=True)
class IndexSet:
    """Modes admitted into one radiation box, with the speed threshold used."""

    side: str
    entries: list[SelectedMode] = field(default_factory=list)
    c0: float = 0.0

    def __len__(self) -> int:
        return len(self.entries)

    def rows(self) -> list[tuple]:
        return [e.row() for e in self.entries]


def _bisect_level(op: CellOperator, j2: float, m: int, ja: float, fa: float, jb: float, fb: float, omega2: float, level_tol: float):
    """Refine one bracketed crossing of mu_m(., j2) - omega^2.

    Starts from the secant point, then bisects, re-solving the eigenproblem
    at every step.  Returns (j1, residual) of the best iterate.
    """
    n_solve = m + 1
    best = (ja, abs(fa)) if abs(fa) <= abs(fb) else (jb, abs(fb))
    # secant guess first, then plain bisection on the sign change
    jm = ja - fa * (jb - ja) / (fb - fa)
    for _ in range(MAX_BISECTIONS):
        jm = min(max(jm, min(ja, jb)), max(ja, jb))
        fm = op.eigenvalues((jm, j2), n_solve)[m] - omega2
        if abs(fm) < best[1]:
            best = (jm, abs(fm))
        if abs(fm) <= 0.25 * level_tol:
            break
        if (fm > 0) == (fb > 0):
            jb, fb = jm, fm
        else:
            ja, fa = jm, fm
        jm = 0.5 * (ja + jb)
    return best


def select_indices(
    medium,
    omega: float,
    side: str,
    K: int,
    cellgrid: CellGrid,
    j1_mesh_size: int = 201,
    c0: float | None = None,
    level_tol: float | None = None,
    n_bands: int = 6,
    j2_rows=None,
    max_modes: int | None = None,
    operator: CellOperator | None = None,
) -> IndexSet:
    """Build the outgoing index set for one radiation box.

    `j2_rows` restricts the vertical wave numbers (defaults to all of Q'_K);
    entries must be members of Q'_K.  `max_modes` keeps the strongest
    carriers (largest |Poynting|) when the selection is larger, as for
    localized sources on tall domains.
    """
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    if omega <= 0:
        raise ValueError("omega must be positive")
    if j1_mesh_size < 16:
        raise ValueError("j1_mesh_size must be at least 16")
    omega2 = omega**2
    if level_tol is None:
        level_tol = 1e-6 * omega2
    rows = q_prime(K) if j2_rows is None else list(j2_rows)
    allowed = q_prime(K)
    for j2 in rows:
        if min(abs(j2 - q) for q in allowed) > 1e-12:
            raise ConfigError(f"j2={j2} is not an admissible vertical wave number for K={K}")

    op = operator if operator is not None else CellOperator(cellgrid, cellgrid.sample(medium.far_field()))
    n = j1_mesh_size
    j1_vals = -0.5 + np.arange(1, n + 1) / n  # uniform mesh of (-1/2, 1/2]

    candidates: list[BlochMode] = []
    for j2 in rows:
        mu = np.empty((n, n_bands))
        for i, j1 in enumerate(j1_vals):
            mu[i] = op.eigenvalues((j1, j2), n_bands)
        f = mu - omega2
        for m in range(n_bands):
            fm = f[:, m]
            for i in range(n):  # circular: bands are 1-periodic in j1
                k = (i + 1) % n
                fa, fb = fm[i], fm[k]
                if fa == 0.0:
                    j_root, res = j1_vals[i], 0.0
                elif fa * fb < 0.0:
                    ja = j1_vals[i]
                    jb = j1_vals[k] if k != 0 else j1_vals[0] + 1.0
                    j_root, res = _bisect_level(op, j2, m, ja, fa, jb, fb, omega2, level_tol)
                else:
                    continue
                if j_root > 0.5:
                    j_root -= 1.0
                if res > level_tol:
                    log.warning(
                        "dropping level-set candidate at j=(%.6f, %.6f), band %d: residual %.2e > %.2e",
                        j_root, j2, m, res, level_tol,
                    )
                    continue
                mode = op.modes((j_root, j2), m + 1, side=side)[m]
                candidates.append(mode)

    # deduplicate intersections found through more than one band family
    kept: list[BlochMode] = []
    for mode in sorted(candidates, key=lambda md: (md.j[1], md.j[0], md.m)):
        dup = next((k for k in kept if np.hypot(*(k.j - mode.j)) < DEDUP_J_DISTANCE), None)
        if dup is None:
            kept.append(mode)
        elif abs(mode.mu - omega2) < abs(dup.mu - omega2):
            kept[kept.index(dup)] = mode

    scored = [(mode, op.poynting(mode)) for mode in kept]
    if c0 is None:
        c0 = 1e-8 * max((abs(p) for _, p in scored), default=0.0)
    want_positive = side == "+"
    outgoing = [(mode, p) for mode, p in scored if (p > c0 if want_positive else p < -c0)]
    if max_modes is not None and len(outgoing) > max_modes:
        outgoing.sort(key=lambda mp: -abs(mp[1]))
        outgoing = outgoing[:max_modes]
        outgoing.sort(key=lambda mp: (mp[0].j[1], mp[0].j[0], mp[0].m))

    entries = []
    for mode, p in outgoing:
        try:
            vg = group_velocity(cellgrid, op.a_cell, mode.j, mode.m, operator=op)
        except DegenerateBandError as exc:
            log.warning("group velocity unavailable for j=%s, m=%d: %s", mode.j, mode.m, exc)
            vg = np.array([np.nan, np.nan])
        entries.append(SelectedMode(mode=mode, poynting=p, vg=vg))

    if not entries:
        log.warning("empty index set for side %s at omega=%.6g (evanescent regime?)", side, omega)
    return IndexSet(side=side, entries=entries, c0=c0)


def sample_bands(
    medium,
    side: str,
    K: int,
    cellgrid: CellGrid,
    j1_mesh_size: int = 101,
    n_bands: int = 3,
    j2_rows=None,
    operator: CellOperator | None = None,
):
    """Band-structure samples for export: (j1, j2, m) -> (mu, P, vg approx).

    Group velocities are central differences of sqrt(mu) on the sampling
    lattice itself (circular in both directions), so their resolution is the
    lattice spacing; the selected-set export carries properly re-solved
    values instead.
    """
    op = operator if operator is not None else CellOperator(cellgrid, cellgrid.sample(medium.far_field()))
    rows = q_prime(K) if j2_rows is None else list(j2_rows)
    n = j1_mesh_size
    j1_vals = -0.5 + np.arange(1, n + 1) / n
    mu = np.empty((len(rows), n, n_bands))
    pw = np.empty((len(rows), n, n_bands))
    for a, j2 in enumerate(rows):
        for i, j1 in enumerate(j1_vals):
            modes = op.modes((j1, j2), n_bands, side=side)
            for m, md in enumerate(modes):
                mu[a, i, m] = md.mu
                pw[a, i, m] = op.poynting(md)
    root = np.sqrt(np.maximum(mu, 0.0))
    dj1 = 1.0 / n
    vg1 = (np.roll(root, -1, axis=1) - np.roll(root, 1, axis=1)) / (2 * dj1)
    if len(rows) > 1:
        dj2 = rows[1] - rows[0]
        vg2 = (np.roll(root, -1, axis=0) - np.roll(root, 1, axis=0)) / (2 * dj2)
    else:
        vg2 = np.zeros_like(root)
    out = []
    for a, j2 in enumerate(rows):
        for i, j1 in enumerate(j1_vals):
            for m in range(n_bands):
                out.append(
                    (side, float(j1), float(j2), m, float(mu[a, i, m]), float(pw[a, i, m]),
                     float(vg1[a, i, m]), float(vg2[a, i, m]))
                )
    return out
