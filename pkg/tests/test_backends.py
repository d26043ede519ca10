import os
import subprocess
import sys

import numpy as np
import pytest

from spdc_schmidt import _backend, _jacobi_py

try:
    from spdc_schmidt import _jacobi
except ImportError:  # extension not built
    _jacobi = None

BACKENDS = [pytest.param(_jacobi_py.one_sided_jacobi, id="python")]
if _jacobi is not None:
    BACKENDS.append(pytest.param(_jacobi.one_sided_jacobi, id="cython"))


@pytest.mark.parametrize("jacobi", BACKENDS)
@pytest.mark.parametrize("shape", [(1, 5), (2, 3), (7, 7), (24, 40), (33, 33)])
def test_rows_orthogonalized(jacobi, shape, rng):
    a = rng.normal(size=shape)
    before = a.copy()
    cols, vt, sweeps = jacobi(a, 1e-15, 60)
    assert sweeps > 0
    np.testing.assert_array_equal(a, before)  # input untouched
    np.testing.assert_allclose(vt @ vt.T, np.eye(shape[0]), atol=1e-13)
    np.testing.assert_allclose(vt.T @ cols, a, atol=1e-12)
    gram = cols @ cols.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-12 * np.max(np.diag(gram))
    s = np.sort(np.linalg.norm(cols, axis=1))[::-1]
    np.testing.assert_allclose(s, np.linalg.svd(a, compute_uv=False), rtol=1e-12)


@pytest.mark.parametrize("jacobi", BACKENDS)
def test_zero_rows_skipped(jacobi):
    a = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 0.0], [3.0, 1.0, 1.0]])
    cols, _, sweeps = jacobi(a, 1e-15, 30)
    assert sweeps > 0
    assert np.all(cols[1] == 0.0)


@pytest.mark.parametrize("jacobi", BACKENDS)
def test_sweep_cap_reports_failure(jacobi, rng):
    a = rng.normal(size=(10, 10))
    _, _, sweeps = jacobi(a, 1e-15, 1)
    assert sweeps == -1


@pytest.mark.skipif(_jacobi is None, reason="compiled extension not built")
def test_backends_agree(rng):
    a = rng.normal(size=(50, 80))
    c1, v1, _ = _jacobi.one_sided_jacobi(a, 1e-15, 60)
    c2, v2, _ = _jacobi_py.one_sided_jacobi(a, 1e-15, 60)
    s1 = np.sort(np.linalg.norm(c1, axis=1))
    s2 = np.sort(np.linalg.norm(c2, axis=1))
    np.testing.assert_allclose(s1, s2, rtol=1e-12)


def test_tournament_covers_all_pairs():
    for r in (2, 5, 8, 13):
        pairs = set()
        for p, q in _jacobi_py._tournament(r):
            assert len(set(p) | set(q)) == 2 * p.size  # disjoint within a round
            pairs.update(zip(p.tolist(), q.tolist()))
        assert pairs == {(i, j) for i in range(r) for j in range(i + 1, r)}


def test_env_var_forces_fallback():
    env = dict(os.environ, SPDC_SCHMIDT_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c", "from spdc_schmidt import _backend; print(_backend.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_selected_backend():
    forced = os.environ.get("SPDC_SCHMIDT_BACKEND", "").lower() == "python"
    expected = "cython" if (_jacobi is not None and not forced) else "python"
    assert _backend.BACKEND == expected
