import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from garchbk import InnovationModel, gaussian, student_t


def test_gaussian_sample_moments():
    s = gaussian().sample(seed=1, n=10**6)
    assert abs(s.mean()) < 0.005
    assert abs(s.var() - 1.0) < 0.01


def test_sample_deterministic():
    m = gaussian()
    a = m.sample(seed=123, n=5000)
    b = m.sample(seed=123, n=5000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, m.sample(seed=124, n=5000))


def test_student_t_sample_variance():
    s = student_t(5.0).sample(seed=2, n=10**6)
    assert abs(s.var() - 1.0) < 0.02


def test_sample_validates_n():
    with pytest.raises(ValueError):
        gaussian().sample(seed=0, n=0)


def test_gaussian_cdf_center_and_deriv():
    m = gaussian()
    assert m.cdf(0.0) == 0.5
    assert m.pdf_deriv(0.0) == 0.0


@pytest.mark.parametrize("model", [gaussian(), student_t(5.0), student_t(9.0)])
def test_cdf_pdf_finite_difference(model):
    # central difference of H matches h to O(eps^2)
    xs = np.linspace(-4.0, 4.0, 81)
    eps = 1e-5
    fd = (model.cdf(xs + eps) - model.cdf(xs - eps)) / (2 * eps)
    assert np.abs(fd - model.pdf(xs)).max() < 1e-8


@pytest.mark.parametrize("model", [gaussian(), student_t(4.5), student_t(8.0)])
def test_pdf_deriv_matches_finite_difference(model):
    xs = np.linspace(-6.0, 6.0, 121)
    eps = 1e-6
    fd = (model.pdf(xs + eps) - model.pdf(xs - eps)) / (2 * eps)
    dv = model.pdf_deriv(xs)
    assert np.isfinite(dv).all()
    assert np.abs(fd - dv).max() < 1e-4


def test_fourth_moment_gaussian():
    assert gaussian().fourth_moment() == 3.0


def test_fourth_moment_student_t_analytic():
    # 3 (df - 2) / (df - 4)
    assert student_t(5.0).fourth_moment() == pytest.approx(9.0)
    assert student_t(8.0).fourth_moment() == pytest.approx(4.5)


def test_fourth_moment_student_t_monte_carlo():
    # independent oracle: t = z / sqrt(v / df) built from normal and
    # chi-square draws, then scaled to unit variance
    df = 5.0
    rng = np.random.default_rng(2024)
    n = 10**7
    z = rng.standard_normal(n)
    v = rng.chisquare(df, n)
    eps = math.sqrt((df - 2.0) / df) * z / np.sqrt(v / df)
    e4 = eps**4
    se = e4.std(ddof=1) / math.sqrt(n)
    assert abs(e4.mean() - student_t(df).fourth_moment()) < 3 * se


def test_df_boundary_rejected():
    with pytest.raises(ValueError):
        student_t(4.0)
    with pytest.raises(ValueError):
        student_t(3.0)
    student_t(4.0001)  # just above the boundary is fine


def test_family_validation():
    with pytest.raises(ValueError):
        InnovationModel("cauchy")
    with pytest.raises(ValueError):
        InnovationModel("student_t")  # df missing
    with pytest.raises(ValueError):
        InnovationModel("gaussian", df=5.0)


@pytest.mark.parametrize("model", [gaussian(), student_t(6.0)])
@pytest.mark.parametrize("a,b", [(-1.0, 0.5), (0.2, 2.3), (-3.5, -1.1)])
def test_cdf_is_integral_of_pdf(model, a, b):
    val, _ = integrate.quad(lambda x: float(model.pdf(x)), a, b)
    assert abs(val - (model.cdf(b) - model.cdf(a))) < 1e-6


def test_empirical_cdf_within_ks_band():
    m = gaussian()
    n = 10**6
    s = np.sort(m.sample(seed=11, n=n))
    i = np.arange(1, n + 1)
    f = m.cdf(s)
    d = max(np.abs(i / n - f).max(), np.abs((i - 1) / n - f).max())
    assert d < 2.0 / math.sqrt(n)


@settings(max_examples=50, deadline=None)
@given(
    x=st.floats(-30, 30),
    y=st.floats(-30, 30),
    df=st.one_of(st.none(), st.floats(4.1, 40)),
)
def test_cdf_monotone_pdf_nonnegative(x, y, df):
    model = gaussian() if df is None else student_t(df)
    lo, hi = min(x, y), max(x, y)
    assert model.cdf(hi) >= model.cdf(lo)
    assert model.pdf(x) >= 0.0


def test_spec_roundtrip():
    for m in (gaussian(), student_t(5.5)):
        assert InnovationModel.from_spec(m.spec()) == m
    with pytest.raises(ValueError):
        InnovationModel.from_spec({"family": "gaussian", "mean": 1.0})
    with pytest.raises(ValueError):
        InnovationModel.from_spec({"df": 5.0})
