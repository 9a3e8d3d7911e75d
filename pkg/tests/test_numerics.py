import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from jamsec.numerics import (
    BracketError,
    ConvergenceError,
    DomainError,
    Monotonicity,
    RootSpec,
    find_root,
    lambert_w0,
    make_rng,
    sample_exponential,
    sample_gamma_integer_shape,
    sign_change_brackets,
)


def _newton_w(x: float) -> float:
    """Plain Newton on w e^w = x from log(1+x), run to a fixed point."""
    w = math.log1p(x) if x < 3 else math.log(x)
    for _ in range(200):
        w_new = w - (w * math.exp(w) - x) / (math.exp(w) * (w + 1))
        if w_new == w:
            break
        w = w_new
    return w


def test_lambert_w_known_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w0(-1 / math.e) == pytest.approx(-1.0, abs=1e-7)
    # omega constant
    assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, rel=1e-15)


def test_lambert_w_large_argument_against_newton():
    x = 1.6e8
    assert lambert_w0(x) == pytest.approx(_newton_w(x), rel=1e-14)


@given(st.floats(-1 / math.e + 1e-6, 1e12))
def test_lambert_w_defining_identity(x):
    w = lambert_w0(x)
    assert w >= -1.0
    assert w * math.exp(w) == pytest.approx(x, rel=1e-12, abs=1e-15)


def test_lambert_w_domain():
    with pytest.raises(DomainError):
        lambert_w0(-0.5)
    with pytest.raises(DomainError):
        lambert_w0(float("nan"))


def test_find_root_simple():
    r = find_root(lambda x: x * x - 2.0, RootSpec(0.0, 2.0, monotonicity=Monotonicity.INCREASING))
    assert r == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_find_root_endpoint_root():
    assert find_root(lambda x: x, RootSpec(0.0, 1.0)) == 0.0


def test_find_root_no_sign_change():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, RootSpec(-1.0, 1.0))


def test_find_root_monotonicity_mismatch():
    with pytest.raises(BracketError):
        find_root(lambda x: 1.0 - x, RootSpec(0.0, 2.0, monotonicity=Monotonicity.INCREASING))


def test_find_root_iteration_cap():
    with pytest.raises(ConvergenceError):
        find_root(lambda x: math.tan(x) - 1e6, RootSpec(1.0, 1.5707963, abs_tol=1e-300, max_iter=2))


def test_bad_bracket():
    with pytest.raises(ValueError):
        RootSpec(1.0, 1.0)


def test_sign_change_brackets_skips_nan():
    grid = np.linspace(0, 4, 9)
    f = lambda x: math.nan if x > 3.4 else math.sin(math.pi * x / 2 - 0.1)  # noqa: E731
    br = sign_change_brackets(f, grid)
    assert len(br) == 2
    assert all(b - a == pytest.approx(0.5) for a, b in br)


def test_rng_is_reproducible_and_streams_differ():
    a = make_rng(5, 0).random(4)
    b = make_rng(5, 0).random(4)
    c = make_rng(5, 1).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        make_rng(-1)


def test_exponential_mean():
    x = sample_exponential(make_rng(1), mean=2.5, size=200_000)
    assert x.mean() == pytest.approx(2.5, rel=0.01)


@pytest.mark.parametrize("k", [1, 3, 8])
def test_gamma_sum_distribution(k):
    x = sample_gamma_integer_shape(make_rng(2, k), k, size=50_000)
    assert stats.kstest(x, stats.gamma(a=k).cdf).pvalue > 1e-3


def test_gamma_scalar_and_validation():
    assert isinstance(sample_gamma_integer_shape(make_rng(0), 2), float)
    with pytest.raises(ValueError):
        sample_gamma_integer_shape(make_rng(0), 0)
