import math

import numpy as np
import pytest

from bergmanlab import weights as W
from bergmanlab.errors import InvalidInput, NotFound


def test_power_examples():
    assert np.all(W.make_power(0)(np.linspace(0, 1, 11)) == 1.0)
    assert W.make_power(1)(0.5) == pytest.approx(0.75)
    W.make_power(-0.5)
    with pytest.raises(InvalidInput):
        W.make_power(-1)


def test_dostanic_examples():
    d = W.make_dostanic(0, 1, 1)
    assert d(0.0) == pytest.approx(math.exp(-1))
    assert d(1 - 1e-4) == 0.0 and d(1.0) == 0.0
    assert W.make_dostanic(2, 3, 0.5)(0.6) == pytest.approx(0.4096 * math.exp(-3.75), rel=1e-14)
    for bad in [(-1, 1, 1), (0, 0, 1), (0, 1, 0)]:
        with pytest.raises(InvalidInput):
            W.make_dostanic(*bad)


def test_custom_weight_checks():
    W.make_custom(lambda r: 1 + r, "one_plus_r")
    with pytest.raises(InvalidInput):
        W.make_custom(lambda r: r - 0.5)
    with pytest.raises(InvalidInput):
        W.make_custom(lambda r: np.zeros_like(r))


@pytest.mark.parametrize("w", [W.make_power(0), W.make_power(3), W.make_power(-0.5),
                               W.make_dostanic(0, 1, 1), W.make_dostanic(2, 3, 0.5)])
def test_nonnegative(w):
    assert np.all(w(np.random.default_rng(0).uniform(0, 1, 1000)) >= 0)


def test_scaled_and_power():
    d = W.make_dostanic(1, 2, 0.5)
    assert d.scaled(3.0)(0.4) == pytest.approx(3 * d(0.4))
    assert d.power(2)(0.4) == pytest.approx(d(0.4) ** 2)
    assert W.make_power(1.5).power(2).params["t"] == 3.0


def test_numeric_derivative_examples():
    assert W.numeric_derivative(W.make_power(1), 1, 0.5) == pytest.approx(-1.0)
    d = W.make_dostanic(0, 1, 1)
    ref = -2 * 0.5 / 0.75**2 * math.exp(-1 / 0.75)
    assert W.numeric_derivative(d, 1, 0.5) == pytest.approx(ref, rel=1e-13)
    assert W.numeric_derivative(d, 0, 0.3) == d(0.3)
    with pytest.raises(InvalidInput):
        W.numeric_derivative(d, 13, 0.5)
    with pytest.raises(InvalidInput):
        W.numeric_derivative(d, 1, 0.9999)


def test_custom_weight_uses_finite_differences():
    c = W.make_custom(lambda r: np.exp(-r * r), "gauss")
    # d²/dr² e^{-r²} = (4r² - 2) e^{-r²}
    assert W.numeric_derivative(c, 2, 0.4) == pytest.approx((4 * 0.16 - 2) * math.exp(-0.16), rel=1e-7)
    with pytest.raises(InvalidInput):
        W.numeric_derivative(c, 7, 0.4)


@pytest.mark.parametrize("w", [W.make_dostanic(0, 1, 1), W.make_dostanic(2, 3, 0.5),
                               W.make_power(0.5), W.make_power(3)])
def test_analytic_vs_finite_difference(w):
    """Analytic derivatives against finite differences on [0.1, 0.9].

    Near sign changes λ^(n) passes through zero, where a pure relative error is
    meaningless; the error is measured against the largest |λ^(n)| among the
    nine nearest sample radii instead, and the median pure relative error is
    also bounded.
    """
    rs = np.linspace(0.1, 0.9, 41)
    for n in range(1, 7):
        a = np.array([W.numeric_derivative(w, n, r) for r in rs])
        f = np.array([W.finite_difference(w, n, r) for r in rs])
        local = np.array([np.abs(a[max(0, i - 4):i + 5]).max() for i in range(len(a))])
        assert np.max(np.abs(a - f) / local) <= 1e-5, n
        assert np.median(np.abs(a - f) / np.abs(a)) <= 1e-6, n


def test_finite_difference_on_polynomial():
    w = W.make_power(1)
    assert W.finite_difference(w, 2, 0.3) == pytest.approx(-2.0, rel=1e-8)
    assert abs(W.finite_difference(w, 4, 0.3)) < 1e-5


def test_sign_onset_examples():
    assert W.sign_onset(W.make_dostanic(0, 1, 1), 1).a_n == 0.0
    assert W.sign_onset(W.make_power(1), 1).a_n == 0.0
    rep = W.sign_onset(W.make_dostanic(0, 1, 1), 3)
    assert 0 < rep.a_n < 1 and rep.certified_grid == 1000
    r = np.linspace(rep.a_n, 1 - W.DELTA, 500)
    vals = W.psi(W.make_dostanic(0, 1, 1), 3, r)
    assert np.all(vals >= -1e-12 * np.max(np.abs(vals)))


def test_sign_onset_not_found():
    # λ = 1 + r: λ' = 1 > 0, so -λ' < 0 everywhere
    with pytest.raises(NotFound):
        W.sign_onset(W.make_custom(lambda r: 1 + r), 1)


def test_cayley():
    assert W.cayley(1j) == pytest.approx(0)
    assert W.cayley(0, boundary=True) == pytest.approx(1)
    assert W.inverse_cayley(0) == pytest.approx(1j)
    with pytest.raises(InvalidInput):
        W.cayley(0)
    with pytest.raises(InvalidInput):
        W.inverse_cayley(1.0)
    with pytest.raises(InvalidInput):
        W.cayley(-1j, boundary=True)


def test_cayley_round_trip():
    rng = np.random.default_rng(1)
    r = 0.999 * np.sqrt(rng.uniform(0, 1, 1000))
    z = r * np.exp(2j * math.pi * rng.uniform(0, 1, 1000))
    zeta = rng.uniform(-5, 5, 1000) + 1j * rng.uniform(1e-3, 5, 1000)
    assert np.max(np.abs(W.cayley(W.inverse_cayley(z)) - z)) <= 1e-12
    assert np.max(np.abs(W.inverse_cayley(W.cayley(zeta)) - zeta)) <= 1e-12


def test_cayley_derivatives():
    h = 1e-6
    zeta, z = 0.3 + 0.7j, 0.2 - 0.4j
    assert W.cayley_derivative(zeta) == pytest.approx((W.cayley(zeta + h) - W.cayley(zeta - h)) / (2 * h), rel=1e-8)
    num = (W.inverse_cayley(z + h) - W.inverse_cayley(z - h)) / (2 * h)
    assert W.inverse_cayley_derivative(z) == pytest.approx(num, rel=1e-8)


def test_holo_weight_rejects_zero():
    with pytest.raises(InvalidInput):
        W.polynomial_weight([0, 1])
    w = W.polynomial_weight([-2, 1])
    assert w(0.5) == pytest.approx(2.25)
    assert w.power(3).coeffs is not None
    assert w.power(3)(0.5) == pytest.approx(2.25**3)


def test_transport_examples():
    om = W.transport_weight(W.remark_F(5.0))
    assert om(0.0) == pytest.approx(1.0, rel=1e-14)
    assert om(0.5) == pytest.approx(2 ** (-4 / 3), rel=1e-10)
    r = np.linspace(0, 0.9, 20)
    z = r[:, None] * np.exp(1j * np.linspace(0, 2 * math.pi, 20, endpoint=False))[None, :]
    assert np.max(np.abs(om(z) / np.abs(z - 1) ** (4 / 3) - 1)) <= 1e-9


def test_zeta_power_transport_unbounded():
    om = W.transport_weight(W.zeta_power_F(5.0))
    # |ψ(z)|^(4/3)|ψ'(z)|² blows up where ψ(z) → ∞, i.e. at z = -1
    vals = [float(om(-1 + 10.0**-j)) for j in range(1, 6)]
    assert all(b > 10 * a for a, b in zip(vals, vals[1:]))
    # and stays bounded approaching z = 1, where it vanishes like |z-1|^(4/3)
    near_one = [float(om(1 - 10.0**-j)) for j in range(1, 6)]
    assert max(near_one) < 2.0 and near_one[-1] < near_one[0]


def test_halfplane_weights():
    mu = W.zeta_pow_weight(5.0, 3.0)
    assert mu.is_power_form and mu.origin_exponent == pytest.approx(-2 / 3)
    assert mu(1j) == pytest.approx(1.0)
    conj = mu.power(1 / (1 - 3.0))
    assert conj.origin_exponent == pytest.approx(1 / 3)
    direct = W.holomorphic_halfplane_weight(W.zeta_power_F(5.0), 3.0)
    zeta = np.array([0.3 + 0.1j, -2 + 1j, 0.01j])
    assert np.allclose(direct(zeta), mu(zeta), rtol=1e-13)
    assert not direct.is_power_form
    with pytest.raises(InvalidInput):
        W.zeta_pow_weight(2.0, 3.0)
    with pytest.raises(InvalidInput):
        W.remark_F(1.5)
