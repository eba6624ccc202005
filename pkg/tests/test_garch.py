import math

import numpy as np
import pytest

from garchbk import (
    DivergenceError,
    GarchParams,
    NonStationaryError,
    arch_infinity_coeffs,
    autocovariance_x2,
    companion_matrix,
    companion_offset,
    gaussian,
    inverse_sigma_variance,
    is_stationary,
    lyapunov_exponent,
    simulate,
)

G11 = GarchParams(0.1, (0.8,), (0.1,))


def scalar_gamma_oracle(beta1, alpha1, n=10**6, seed=77):
    """Independent Monte Carlo of E log(beta1 + alpha1 Z^2)."""
    z = np.random.default_rng(seed).standard_normal(n)
    g = np.log(beta1 + alpha1 * z * z)
    return g.mean(), g.std(ddof=1) / math.sqrt(n)


def test_params_validation():
    with pytest.raises(ValueError):
        GarchParams(0.0, (), (0.1,))
    with pytest.raises(ValueError):
        GarchParams(1.0, (-0.1,), (0.1,))
    with pytest.raises(ValueError):
        GarchParams(1.0, (0.1,), ())
    p = GarchParams(1.0, (), (0.0,))
    assert p.p == 0 and p.q == 1 and p.coeff_sum == 0.0


def test_iid_case_is_the_innovation_stream():
    # delta=1 with zero coefficients collapses to X_k = eps_k
    m = gaussian()
    path = simulate(GarchParams(1.0, (), (0.0,)), m, n=10**5, seed=31,
                    burn_in=1000)
    eps = m.sample(31, 10**5 + 1000)[1000:]
    assert np.array_equal(path.x, eps)
    assert np.all(path.sigma2 == 1.0)
    assert abs(path.x.var() - 1.0) < 3 * math.sqrt(2.0 / 10**5)


def test_unconditional_variance_monte_carlo():
    # E sigma^2 = delta / (1 - beta - alpha) = 1; batch means give the SE
    path = simulate(G11, gaussian(), n=2 * 10**5, seed=5)
    batches = path.sigma2.reshape(100, -1).mean(axis=1)
    se = batches.std(ddof=1) / 10.0
    assert abs(path.sigma2.mean() - 1.0) < 3 * se + 1e-3


def test_simulate_deterministic():
    a = simulate(G11, gaussian(), n=5000, seed=42)
    b = simulate(G11, gaussian(), n=5000, seed=42)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.sigma2, b.sigma2)
    assert a.seed == 42 and a.burn_in == 10_000


def test_sigma2_floor_and_rerun_reconstruction():
    params = GarchParams(0.05, (0.6, 0.1), (0.2, 0.05))
    path = simulate(params, gaussian(), n=400, seed=9, burn_in=2000)
    assert np.all(path.sigma2 >= params.delta)
    # re-running the recursion on the stored prefix reproduces sigma2 exactly
    p, q = params.p, params.q
    for k in range(max(p, q), path.n):
        s = params.delta
        for i in range(p):
            s += params.beta[i] * path.sigma2[k - 1 - i]
        for j in range(q):
            s += params.alpha[j] * (path.x[k - 1 - j] * path.x[k - 1 - j])
        assert s == path.sigma2[k]


def test_x_squared_reconstruction_near_exact():
    # x_k = sqrt(sigma2_k) eps_k, so x^2 == sigma2 * eps^2 up to one rounding
    m = gaussian()
    path = simulate(G11, m, n=2000, seed=13, burn_in=500)
    eps = m.sample(13, 2500)[500:]
    lhs = path.x**2
    rhs = path.sigma2 * eps**2
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14)


def test_divergence_guard():
    with pytest.raises(DivergenceError):
        simulate(GarchParams(1.0, (1.5,), (0.9,)), gaussian(), n=5000,
                 seed=1, burn_in=0, check_stationarity=False)


def test_nonstationary_rejection_and_override():
    params = GarchParams(1.0, (1.2,), (0.5,))
    with pytest.raises(NonStationaryError):
        simulate(params, gaussian(), n=100, seed=1)
    path = simulate(params, gaussian(), n=400, seed=1, burn_in=0,
                    check_stationarity=False)
    assert path.sigma2.max() > 1e10  # explosive but below the overflow cap


def test_boundary_inconclusive_rejected():
    # beta=1, alpha=0 gives gamma exactly 0: inconclusive, hence rejected
    params = GarchParams(1.0, (1.0,), (0.0,))
    assert is_stationary(params, gaussian()).verdict == "inconclusive"
    with pytest.raises(NonStationaryError):
        simulate(params, gaussian(), n=100, seed=1)


def test_companion_garch11():
    A = companion_matrix(GarchParams(1.0, (0.8,), (0.1,)), eps=2.0)
    assert A.shape == (1, 1)
    assert A[0, 0] == pytest.approx(0.8 + 0.1 * 4.0, abs=1e-15)
    A = companion_matrix(GarchParams(1.0, (0.8,), (0.1,)), eps=1.0)
    assert A[0, 0] == pytest.approx(0.9, abs=1e-15)


def _state(path, params, k):
    """(sigma^2_{k+1}, .., sigma^2_{k-p'+2}, x^2_k, .., x^2_{k-q+2})."""
    p_eff = max(params.p, 1)
    sig = [path.sigma2[k + 1 - i] for i in range(p_eff)]
    xx = [path.x[k - j] ** 2 for j in range(params.q - 1)]
    return np.array(sig + xx)


@pytest.mark.parametrize("params", [
    GarchParams(0.3, (0.5, 0.2), (0.15, 0.1)),
    GarchParams(1.0, (0.8,), (0.1,)),
    GarchParams(0.2, (), (0.3, 0.2)),
    GarchParams(0.5, (0.4, 0.1, 0.05), (0.2,)),
])
def test_companion_reproduces_recursion(params):
    m = gaussian()
    path = simulate(params, m, n=1000, seed=21, burn_in=200)
    eps = m.sample(21, 1200)[200:]
    B = companion_offset(params)
    start = max(params.p, params.q, 1) + 1
    for k in range(start, 900):
        A = companion_matrix(params, eps[k + 1])
        nxt = A @ _state(path, params, k) + B
        np.testing.assert_allclose(nxt, _state(path, params, k + 1),
                                   rtol=1e-10, atol=1e-12)


def test_companion_random_params_property():
    rng = np.random.default_rng(8)
    m = gaussian()
    for _ in range(25):
        p = int(rng.integers(0, 4))
        q = int(rng.integers(1, 4))
        raw = rng.random(p + q)
        raw *= 0.9 / max(raw.sum(), 1e-9)
        params = GarchParams(0.1 + rng.random(), tuple(raw[:p]), tuple(raw[p:]))
        path = simulate(params, m, n=60, seed=int(rng.integers(2**62)),
                        burn_in=100)
        eps = m.sample(path.seed, 160)[100:]
        B = companion_offset(params)
        for k in range(5, 50):
            A = companion_matrix(params, eps[k + 1])
            nxt = A @ _state(path, params, k) + B
            np.testing.assert_allclose(nxt, _state(path, params, k + 1),
                                       rtol=1e-9, atol=1e-12)


def test_lyapunov_matches_scalar_oracle():
    est = lyapunov_exponent(G11, gaussian(), iterations=200_000, seed=3)
    oracle, oracle_se = scalar_gamma_oracle(0.8, 0.1)
    tol = 3 * math.hypot(est.std_error, oracle_se)
    assert abs(est.gamma_hat - oracle) < tol


def test_lyapunov_zero_padding_invariance():
    # appending zero coefficients grows the companion matrix but not gamma
    base = lyapunov_exponent(G11, gaussian(), iterations=200_000, seed=3)
    padded = lyapunov_exponent(GarchParams(0.1, (0.8, 0.0), (0.1, 0.0)),
                               gaussian(), iterations=200_000, seed=4)
    tol = 3 * math.hypot(base.std_error, padded.std_error)
    assert abs(base.gamma_hat - padded.gamma_hat) < tol


def test_lyapunov_positive_for_explosive_params():
    # E log(1 + 0.5 Z^2) > 0 because the integrand is positive a.s.
    est = lyapunov_exponent(GarchParams(1.0, (1.0,), (0.5,)), gaussian(),
                            iterations=100_000, seed=6)
    assert est.gamma_hat - 3 * est.std_error > 0
    oracle, oracle_se = scalar_gamma_oracle(1.0, 0.5)
    assert abs(est.gamma_hat - oracle) < 3 * math.hypot(est.std_error, oracle_se)


def test_lyapunov_degenerate_sentinel():
    est = lyapunov_exponent(GarchParams(1.0, (), (0.0,)), gaussian(),
                            iterations=10_000, seed=0)
    assert est.gamma_hat == float("-inf") and est.std_error == 0.0
    assert is_stationary(GarchParams(1.0, (), (0.0,)), gaussian()).verdict == "stationary"


def test_lyapunov_validates_iterations():
    with pytest.raises(ValueError):
        lyapunov_exponent(G11, gaussian(), iterations=100, seed=0)


def test_lyapunov_random_garch11_property():
    rng = np.random.default_rng(14)
    m = gaussian()
    for _ in range(8):
        b = float(rng.uniform(0.0, 0.9))
        a = float(rng.uniform(0.01, 0.95 - b))
        est = lyapunov_exponent(GarchParams(0.2, (b,), (a,)), m,
                                iterations=150_000,
                                seed=int(rng.integers(2**62)))
        oracle, oracle_se = scalar_gamma_oracle(b, a, seed=int(rng.integers(2**62)))
        assert abs(est.gamma_hat - oracle) < 3 * math.hypot(est.std_error, oracle_se)


def test_is_stationary_verdicts():
    m = gaussian()
    assert is_stationary(GarchParams(1.0, (0.8,), (0.1,)), m).verdict == "stationary"
    assert is_stationary(GarchParams(1.0, (0.5,), (0.4,)), m).verdict == "stationary"
    v = is_stationary(GarchParams(1.0, (1.2,), (0.5,)), m)
    assert v.verdict == "non_stationary"
    assert v.margin == pytest.approx(3 * v.std_error)


def test_arch_coeffs_garch11_closed_form():
    a, b = arch_infinity_coeffs(G11, 50)
    assert a == pytest.approx(0.1 / 0.2, rel=1e-14)
    i = np.arange(1, 51)
    np.testing.assert_allclose(b, 0.1 * 0.8 ** (i - 1), rtol=1e-12)


def test_arch_coeffs_archq_passthrough():
    params = GarchParams(0.5, (), (0.3, 0.2, 0.1))
    a, b = arch_infinity_coeffs(params, 8)
    assert a == 0.5
    np.testing.assert_array_equal(b, [0.3, 0.2, 0.1, 0, 0, 0, 0, 0])


def test_arch_coeffs_beta_sum_error():
    with pytest.raises(ValueError):
        arch_infinity_coeffs(GarchParams(1.0, (0.7, 0.3), (0.1,)), 10)


def test_arch_coeffs_nonnegative_and_summable():
    rng = np.random.default_rng(3)
    for _ in range(25):
        p = int(rng.integers(0, 4))
        q = int(rng.integers(1, 4))
        beta = tuple(rng.random(p) * (0.95 / max(p, 1)))
        alpha = tuple(rng.random(q))
        params = GarchParams(0.3, beta, alpha)
        _, b = arch_infinity_coeffs(params, 300)
        assert np.all(b >= 0.0)
        bound = sum(alpha) / (1.0 - sum(beta))
        assert b.sum() <= bound + 1e-9


@pytest.mark.parametrize("beta1", [0.5, 0.8, 0.9])
def test_arch_truncation_reproduces_sigma2(beta1):
    params = GarchParams(1.0, (beta1,), (0.05,))
    m_trunc = 200
    path = simulate(params, gaussian(), n=2200, seed=17)
    a, b = arch_infinity_coeffs(params, m_trunc)
    x2 = path.x**2
    approx = a + np.array([
        b @ x2[k - m_trunc:k][::-1] for k in range(m_trunc, path.n)
    ])
    rel = np.abs(approx - path.sigma2[m_trunc:]) / path.sigma2[m_trunc:]
    assert rel.max() < 1e-8


def test_autocovariance_iid_and_lag0():
    path = simulate(GarchParams(1.0, (), (0.0,)), gaussian(), n=10**5, seed=3)
    acov, partial = autocovariance_x2(path, 20)
    y = path.x**2
    assert acov[0] == pytest.approx(y.var(), rel=1e-12)
    assert abs(acov[1]) < 3.0 / math.sqrt(path.n)
    assert partial[0] == pytest.approx(acov[0], rel=1e-12)
    assert partial[3] == pytest.approx(acov[0] + 2 * acov[1:4].sum(), rel=1e-9)


def test_autocovariance_partial_sums_stabilize():
    path = simulate(G11, gaussian(), n=10**6, seed=4)
    _, partial = autocovariance_x2(path, 200)
    tail = partial[-20:]
    assert tail.max() - tail.min() < 0.10 * abs(partial[-1])


def test_autocovariance_requires_short_lags():
    path = simulate(GarchParams(1.0, (), (0.0,)), gaussian(), n=100, seed=2)
    with pytest.raises(ValueError):
        autocovariance_x2(path, 50)


def _blocks(params, n_b, count, seed0, burn_in=2000):
    m = gaussian()
    return [
        simulate(params, m, n=n_b, seed=seed0 + i, burn_in=burn_in)
        for i in range(count)
    ]


def test_inverse_sigma_variance_iid_zero():
    blocks = _blocks(GarchParams(1.0, (), (0.0,)), 200, 100, seed0=1000,
                     burn_in=10)
    assert inverse_sigma_variance(blocks) == 0.0


def test_inverse_sigma_variance_plateau():
    # Var(sum 1/sigma) = O(n) means the normalized ratio is flat in n
    v1 = inverse_sigma_variance(_blocks(G11, 10**3, 100, seed0=5000))
    v2 = inverse_sigma_variance(_blocks(G11, 10**4, 100, seed0=9000))
    assert 0.5 < v2 / v1 < 2.0


def test_inverse_sigma_variance_needs_blocks():
    with pytest.raises(ValueError):
        inverse_sigma_variance(_blocks(G11, 100, 5, seed0=1, burn_in=10))


def test_inverse_sigma_variance_se_shrinks_with_blocks():
    # doubling the block count roughly halves the estimator variance
    rng = np.random.default_rng(0)
    est_small, est_big = [], []
    for rep in range(40):
        s0 = int(rng.integers(2**60))
        est_small.append(
            inverse_sigma_variance(_blocks(G11, 200, 100, seed0=s0, burn_in=500)))
        est_big.append(
            inverse_sigma_variance(_blocks(G11, 200, 200, seed0=s0 + 10**6,
                                           burn_in=500)))
    ratio = np.var(est_small, ddof=1) / np.var(est_big, ddof=1)
    assert 1.2 < ratio < 3.3
