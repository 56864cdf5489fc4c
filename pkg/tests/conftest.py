import numpy as np
import pytest

from blochfem.presets import incoming_on_row
from blochfem.runconfig import GeometryConfig, RunConfig, SelectionConfig, SourceConfig


def small_homogeneous_config(delta=1e-4, row=1, omega_frac=0.35, d=1.5):
    """Air on both sides, small grid; transmission should be ~1."""
    geo = GeometryConfig(eps=1.0, R=8, L=3, K=4, n1=16, n2=16)
    omega = 2 * np.pi * omega_frac
    return RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "constant", "value": 1.0},
        omega=omega,
        delta=delta,
        source=SourceConfig(kind="incoming", j_in=incoming_on_row(omega, row, geo.K), d=d),
        selection=SelectionConfig(j1_mesh=64, n_bands=4),
    )


def small_interface_config(a_right=0.25, delta=1e-4):
    """Air | homogeneous a_right, small grid, Fresnel-checkable."""
    geo = GeometryConfig(eps=1.0, R=8, L=3, K=4, n1=16, n2=16)
    omega = 2 * np.pi * 0.35
    return RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "constant", "value": a_right},
        omega=omega,
        delta=delta,
        source=SourceConfig(kind="incoming", j_in=incoming_on_row(omega, 1, geo.K), d=1.5),
        selection=SelectionConfig(j1_mesh=64, n_bands=4),
    )


@pytest.fixture(scope="session")
def homogeneous_run():
    from blochfem.pipeline import Workspace

    ws = Workspace(small_homogeneous_config())
    sol = ws.solve()
    return ws, sol
