import numpy as np
import pytest

from entropy_lab import _kernels


@pytest.fixture
def tables():
    lam = np.linspace(-4.0, 4.0, 2049)
    return {
        "f": 0.5 * lam**2,
        "a": np.abs(lam),
        "fp": 0.5 * np.maximum(lam, 0.0) ** 2,
        "fm": -0.5 * np.minimum(lam, 0.0) ** 2,
        "x0": -4.0,
        "inv_dl": 2048 / 8.0,
    }


def test_backend_selected():
    assert _kernels.BACKEND in ("numpy", "compiled")
    for name in ("viscous_step", "eo_step", "euler_step"):
        assert callable(getattr(_kernels, name))


needs_compiled = pytest.mark.skipif(not _kernels.HAVE_COMPILED,
                                    reason="extension not built")


@needs_compiled
def test_viscous_parity(tables, rng):
    w = rng.normal(0.0, 0.8, 777)
    a = _kernels.numpy_backend.viscous_step(
        w, 0.1, 0.03, tables["f"], tables["a"], tables["x0"], tables["inv_dl"])
    b = _kernels.compiled_backend.viscous_step(
        w, 0.1, 0.03, tables["f"], tables["a"], tables["x0"], tables["inv_dl"])
    assert np.max(np.abs(a - b)) < 1e-14


@needs_compiled
def test_eo_parity(tables, rng):
    w = rng.normal(0.0, 0.8, 777)
    a = _kernels.numpy_backend.eo_step(
        w, 0.1, tables["fp"], tables["fm"], tables["x0"], tables["inv_dl"])
    b = _kernels.compiled_backend.eo_step(
        w, 0.1, tables["fp"], tables["fm"], tables["x0"], tables["inv_dl"])
    assert np.max(np.abs(a - b)) < 1e-14


@needs_compiled
def test_euler_parity(rng):
    rho = 1.0 + 0.4 * rng.random(777)
    m = rng.normal(0.0, 0.2, 777)
    r1, m1 = _kernels.numpy_backend.euler_step(rho, m, 0.05, 1.4)
    r2, m2 = _kernels.compiled_backend.euler_step(rho, m, 0.05, 1.4)
    assert np.max(np.abs(r1 - r2)) < 1e-14
    assert np.max(np.abs(m1 - m2)) < 1e-14


@needs_compiled
def test_trajectory_parity(rng):
    """A full multi-step run agrees between backends to rounding."""
    from entropy_lab import PeriodicGrid, ScalarField, burgers_flux, solve_reference
    import entropy_lab.claw as claw_mod

    g = PeriodicGrid(128)
    u0 = ScalarField(g, rng.normal(0.0, 0.5, 128))
    fl = burgers_flux()

    out = {}
    saved = claw_mod._kernels
    for backend in (_kernels.numpy_backend, _kernels.compiled_backend):
        claw_mod._kernels = backend
        try:
            out[backend] = solve_reference(u0, fl, 0.5, 4).values_array()
        finally:
            claw_mod._kernels = saved
    a, b = out.values()
    assert np.max(np.abs(a - b)) < 1e-12
