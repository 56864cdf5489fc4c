"""Canned configurations for the standard experiments.

The default geometry is the first interface experiment: eps = 1, inner
half-width 15 cells, box width 6, height 14, mesh 20 x 19 per cell, damping
1e-4, incoming plane wave at omega = 0.2*pi aimed slightly upward.  The
incoming wave vectors are constructed exactly on the dispersion circle with
the vertical component on an admissible row, so |j_in| = omega holds to
machine precision.
"""

from __future__ import annotations

import math

from .runconfig import GeometryConfig, RunConfig, SelectionConfig, SourceConfig

__all__ = [
    "incoming_on_row",
    "interface_small_omega",
    "interface_negative_refraction",
    "homogenized_counterpart",
    "fresnel_validation",
    "gaussian_source_scaled",
    "finite_crystal_lens",
]


def incoming_on_row(omega: float, row: int, K: int, eps: float = 1.0) -> tuple[float, float]:
    """Incoming wave vector with |j_in| = omega and j2 on row/K of the zone."""
    j2 = 2.0 * math.pi * row / (K * eps)
    j1_sq = omega**2 - j2**2
    if j1_sq <= 0:
        raise ValueError(f"row {row}/{K} is beyond the dispersion circle at omega={omega}")
    return (math.sqrt(j1_sq), j2)


def _crystal_interface(omega: float, row: int) -> RunConfig:
    geo = GeometryConfig(eps=1.0, R=15, L=6, K=14, n1=20, n2=19)
    return RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "disc_array"},
        omega=omega,
        delta=1e-4,
        source=SourceConfig(kind="incoming", j_in=incoming_on_row(omega, row, geo.K)),
        selection=SelectionConfig(j1_mesh=201, n_bands=6),
    )


def interface_small_omega() -> RunConfig:
    """Air | disc crystal at omega = 0.2*pi (homogenization regime)."""
    return _crystal_interface(0.2 * math.pi, row=1)


def interface_negative_refraction() -> RunConfig:
    """Air | disc crystal at omega = 1.85 (negative refraction regime)."""
    return _crystal_interface(1.85, row=3)


def homogenized_counterpart(config: RunConfig, a_star: float) -> RunConfig:
    """Same run with the right medium replaced by the homogenized constant."""
    return RunConfig(
        geometry=config.geometry,
        medium_minus=config.medium_minus,
        medium_plus={"kind": "constant", "value": a_star},
        omega=config.omega,
        delta=config.delta,
        source=config.source,
        selection=config.selection,
        out_dir=config.out_dir,
    )


def fresnel_validation(a_star: float, delta: float = 1e-4) -> RunConfig:
    """Homogeneous interface 1 | a_star probed by the omega = 1.85 wave."""
    base = interface_negative_refraction()
    cfg = homogenized_counterpart(base, a_star)
    return RunConfig(
        geometry=cfg.geometry,
        medium_minus=cfg.medium_minus,
        medium_plus=cfg.medium_plus,
        omega=cfg.omega,
        delta=delta,
        source=cfg.source,
        selection=cfg.selection,
        out_dir=cfg.out_dir,
    )


def gaussian_source_scaled() -> RunConfig:
    """Localized-source run scaled to desk size: H = 30, at most 40 modes."""
    geo = GeometryConfig(eps=1.0, R=9, L=6, K=30, n1=16, n2=16)
    return RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "disc_array"},
        omega=1.85,
        delta=1e-4,
        source=SourceConfig(kind="gaussian", strength=2.0, decay=3.0, center=(-3.5, 0.0)),
        selection=SelectionConfig(j1_mesh=101, n_bands=6, max_modes=40, j2_rows="all"),
    )


def finite_crystal_lens(omega: float = 1.85) -> RunConfig:
    """Crystal slab of 10 periods in air, probed by the localized source."""
    geo = GeometryConfig(eps=1.0, R=12, L=6, K=30, n1=16, n2=16)
    return RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "slab", "core": {"kind": "disc_array"}, "width_cells": 10},
        omega=omega,
        delta=1e-4,
        source=SourceConfig(kind="gaussian", strength=2.0, decay=3.0, center=(-3.5, 0.0)),
        selection=SelectionConfig(j1_mesh=101, n_bands=6, max_modes=40, j2_rows="all"),
    )
