import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from algext.core import CharacterSpace, Element
from algext.errors import DegreeTooHigh
from algext.poly import (
    MonicPoly,
    PolyOverA,
    monic_divmod,
    newton_sums,
    rescale_poly,
    resultant,
    resultant_as_poly_in_c,
    roots_array,
)

from conftest import cnormal, random_monic, random_space

S1 = CharacterSpace(["w"])


def const(c, space=S1):
    return Element.const(space, c)


def poly(*cs, space=S1):
    return PolyOverA([const(c, space) for c in cs])


def test_divmod_one_step():
    a = const(3 + 1j)
    q, r = monic_divmod(poly(0, 0, 1), MonicPoly([-a, const(0)]))
    assert q.degree == 0 and q.coeffs[0].allclose(const(1))
    assert r.coeffs[0].allclose(a)


def test_divmod_low_degree():
    alpha = MonicPoly([const(1), const(2), const(3)])
    beta = poly(1, 2)
    q, r = monic_divmod(beta, alpha)
    assert q.coeffs[0].allclose(const(0))
    assert np.allclose(r.array[:2], beta.array)


@given(st.integers(0, 2**32 - 1))
def test_divmod_reconstructs(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 6)
    alpha = random_monic(rng, S)
    n = alpha.degree
    beta = PolyOverA.from_array(S, cnormal(rng, int(rng.integers(1, 2 * n + 2)), len(S)))
    q, r = monic_divmod(beta, alpha)
    assert r.array.shape[0] <= n
    alpha_full = PolyOverA(list(alpha.coeffs) + [Element.const(S, 1)])
    back = q * alpha_full + r
    m = max(back.array.shape[0], beta.array.shape[0])
    diff = back.padded(m) - beta.padded(m)
    assert np.max(np.abs(diff)) <= 1e-10 * max(1, np.max(np.abs(beta.array)))


def test_resultant_quadratic_formula(rng):
    S = random_space(rng)
    a0, b0, b1 = (Element(S, cnormal(rng, len(S))) for _ in range(3))
    res = resultant(MonicPoly([-a0, Element.const(S, 0)]), PolyOverA([b0, b1]))
    assert res.allclose(b0 * b0 - a0 * b1 * b1, atol=1e-12)


def test_resultant_small_cases():
    alpha = MonicPoly([const(-1), const(0)])
    assert resultant(alpha, poly(0, 1)).allclose(const(-1))
    c = 2 - 1j
    cubic = MonicPoly([const(2), const(-1), const(0.5j)])
    assert resultant(cubic, poly(c)).allclose(const(c**3), atol=1e-12)
    with pytest.raises(DegreeTooHigh):
        resultant(alpha, poly(1, 2, 3))


def test_resultant_frozen_oracles():
    # values from an exact computer-algebra resultant
    a = MonicPoly([const(3), const(-1), const(2)])
    assert resultant(a, poly(1, 2, -1)).values[0] == pytest.approx(-97, abs=1e-11)
    q = MonicPoly([const(-1), const(-1j)])
    assert resultant(q, poly(2, 1j)).values[0] == pytest.approx(3, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_resultant_root_product(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 16)
    alpha = random_monic(rng, S)
    n = alpha.degree
    beta = PolyOverA.from_array(S, cnormal(rng, n, len(S)))
    res = resultant(alpha, beta).values
    roots = roots_array(alpha.array)
    prod = np.prod(beta.eval_at(roots), axis=1)
    scale = (1 + max(np.max(np.abs(alpha.array)), np.max(np.abs(beta.array)))) ** n
    assert np.max(np.abs(res - prod)) <= 1e-8 * scale


@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10))
def test_resultant_homogeneous(seed, s):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 6)
    alpha = random_monic(rng, S)
    n = alpha.degree
    beta = PolyOverA.from_array(S, cnormal(rng, n, len(S)))
    lhs = resultant(alpha, beta * s).values
    rhs = s**n * resultant(alpha, beta).values
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + abs(s)) ** n)


def test_p_of_c_quadratic(rng):
    S = random_space(rng)
    a0, b1 = Element(S, cnormal(rng, len(S))), Element(S, cnormal(rng, len(S)))
    p = resultant_as_poly_in_c(MonicPoly([-a0, Element.const(S, 0)]), [b1])
    assert p[0].allclose(-a0 * b1 * b1, atol=1e-12)
    assert p[1].allclose(Element.const(S, 0), atol=1e-12)


def test_p_of_c_frozen_oracle():
    # exact computer-algebra expansion of res(x^3 - 2x + 1, c + x + 2x^2)
    p = resultant_as_poly_in_c(MonicPoly([const(1), const(-2), const(0)]), [const(1), const(2)])
    assert [complex(e.values[0]) for e in p] == pytest.approx([15, 20, 8], abs=1e-12)


def test_p_of_c_zero_rest(rng):
    S = random_space(rng)
    alpha = random_monic(rng, S)
    zero = [Element.const(S, 0)] * (alpha.degree - 1)
    for e in resultant_as_poly_in_c(alpha, zero):
        assert e.norm() <= 1e-12


@given(st.integers(0, 2**32 - 1))
def test_p_of_c_consistent(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 6)
    alpha = random_monic(rng, S)
    n = alpha.degree
    rest = [Element(S, cnormal(rng, len(S))) for _ in range(n - 1)]
    p = np.array([e.values for e in resultant_as_poly_in_c(alpha, rest)])
    for _ in range(50):
        c = Element(S, cnormal(rng, len(S)))
        direct = resultant(alpha, PolyOverA([c] + rest, space=S)).values
        via_p = c.values**n + sum(p[k] * c.values**k for k in range(n))
        assert np.all(np.abs(via_p - direct) <= 1e-9 * (1 + np.abs(direct)))


def test_newton_sums_basic(rng):
    S = random_space(rng)
    a = Element(S, cnormal(rng, len(S)))
    s = newton_sums(MonicPoly([-a, Element.const(S, 0)]), 3)
    assert np.array_equal(s[0].values, np.full(len(S), 2.0))
    assert s[1].norm() == 0
    assert s[2].allclose(2 * a, atol=1e-12)
    assert s[3].norm() <= 1e-12


def test_newton_sums_frozen_oracle():
    # power sums of the roots of x^3 + 2x^2 - x + 3, computed to 40 digits
    s = newton_sums(MonicPoly([const(3), const(-1), const(2)]), 6)
    assert [e.values[0].real for e in s] == pytest.approx([3, -2, 6, -23, 58, -157, 441], abs=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_newton_sums_match_power_sums(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 8)
    alpha = random_monic(rng, S)
    n = alpha.degree
    s = newton_sums(alpha, 2 * n)
    roots = roots_array(alpha.array)
    for j in range(2 * n + 1):
        assert np.max(np.abs(s[j].values - np.sum(roots**j, axis=1))) <= 1e-8 * max(
            1, np.max(np.abs(roots)) ** j
        )


def test_rescale(rng):
    S = random_space(rng)
    a = Element(S, cnormal(rng, len(S)))
    alpha = MonicPoly([-a, Element.const(S, 0)])
    assert np.array_equal(rescale_poly(alpha, 1.0).array, alpha.array)
    half = rescale_poly(alpha, 0.5)
    assert half.coeffs[0].allclose(-a * 0.25)
    r0 = np.sort_complex(roots_array(alpha.array)[0])
    r1 = np.sort_complex(roots_array(half.array)[0])
    assert np.allclose(np.sort_complex(r0 / 2), r1)


@given(st.integers(0, 2**32 - 1))
def test_rescaled_newton_sums_shrink(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng, 6)
    alpha = random_monic(rng, S)
    n = alpha.degree
    base = newton_sums(alpha, 2 * n)
    for mu in (1e-1, 1e-2):
        scaled = newton_sums(rescale_poly(alpha, mu), 2 * n)
        for j in range(1, 2 * n + 1):
            assert scaled[j].norm() <= mu**j * base[j].norm() * (1 + 1e-9) + 1e-14


def test_degree_cap():
    with pytest.raises(ValueError):
        MonicPoly([const(0)] * 9)
    assert MonicPoly([const(0)] * 9, cap=9).degree == 9
