import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from kowcpi.kernels import FAMILIES, KernelSpec, eval_kernel, kernel_from_distances

finite = st.floats(-50, 50, allow_nan=False)
vectors = st.integers(1, 6).flatmap(lambda w: arrays(float, w, elements=finite))
specs = st.builds(KernelSpec, st.sampled_from(FAMILIES), st.floats(0.05, 20))


def test_epanechnikov_at_origin():
    assert eval_kernel(KernelSpec("epanechnikov", 1.0), np.zeros(3)) == 0.75


def test_outside_support_is_zero():
    u = np.array([1.5, 0.0])
    assert eval_kernel(KernelSpec("epanechnikov", 1.0), u) == 0.0


def test_scaled_value_by_hand():
    assert eval_kernel(KernelSpec("epanechnikov", 2.0), [1.0]) == pytest.approx(0.28125, abs=1e-15)


def test_gaussian_is_truncated_at_three():
    spec = KernelSpec("gaussian", 1.0)
    assert eval_kernel(spec, [2.999]) > 0
    assert eval_kernel(spec, [3.001]) == 0.0


def test_length_mismatch_names_both_lengths():
    with pytest.raises(ValueError, match="length 2, expected w=3"):
        eval_kernel(KernelSpec(), [0.0, 1.0], w=3)


@pytest.mark.parametrize("h", [0.0, -1.0, np.inf, np.nan])
def test_bad_bandwidth(h):
    with pytest.raises(ValueError):
        KernelSpec("boxcar", h)


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown kernel family"):
        KernelSpec("triangle", 1.0)


@given(specs, vectors)
def test_nonnegative_and_symmetric(spec, u):
    k = eval_kernel(spec, u)
    assert k >= 0
    assert eval_kernel(spec, -u) == k


@given(specs, vectors, st.integers(0, 10**6))
def test_radial(spec, u, seed):
    # rotate u by a random orthogonal matrix; only the norm should matter
    w = u.size
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((w, w)))
    v = q @ u
    r = np.linalg.norm(u) / spec.bandwidth
    edge = 1.0 if spec.family != "gaussian" else 3.0
    if abs(r - edge) < 1e-9:
        return
    assert eval_kernel(spec, v) == pytest.approx(eval_kernel(spec, u), rel=1e-12, abs=1e-300)


@given(specs, vectors)
def test_bandwidth_scaling_identity(spec, u):
    h = spec.bandwidth
    unit = KernelSpec(spec.family, 1.0)
    lhs = eval_kernel(spec, u)
    rhs = h ** (-u.size) * eval_kernel(unit, u / h)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=0)


@given(specs, vectors)
def test_vectorised_form_agrees(spec, u):
    k = kernel_from_distances(spec, [np.linalg.norm(u)], u.size)[0]
    assert k == pytest.approx(eval_kernel(spec, u), rel=1e-15, abs=0)
