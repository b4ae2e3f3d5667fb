import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from algext.core import (
    CharacterSpace,
    Element,
    Unitized,
    exp_elem,
    invert,
    log_principal,
    quasi_inverse,
    quasi_product,
    spectrum,
    sup_norm,
    unitization_inverse,
)
from algext.errors import LogOnCut, NotInvertible, SpaceMismatch

from conftest import cnormal, random_element, random_space


def test_sup_norm_trivial():
    S = CharacterSpace(["a", "b"])
    assert sup_norm(Element.const(S, 1)) == 1.0
    assert sup_norm(Element(S, [1, -2j])) == 2.0


def test_spectral_radius_by_powering(rng):
    S = random_space(rng)
    e = random_element(rng, S)
    e = e * (1 / e.norm())  # keep powers in range
    assert abs(sup_norm(e**64) ** (1 / 64) - sup_norm(e)) <= 1e-6


def test_invert():
    S = CharacterSpace(["a", "b"])
    assert invert(Element.const(S, 2)).allclose(Element.const(S, 0.5))
    with pytest.raises(NotInvertible) as info:
        invert(Element(S, [1, 0]))
    assert info.value.point == 1


@given(st.integers(0, 2**32 - 1))
def test_invert_is_two_sided(seed):
    rng = np.random.default_rng(seed)
    e = random_element(rng, random_space(rng)) + 0.0
    e = Element(e.space, e.values + 0.1 * np.sign(e.values.real + 0.5))
    inv = invert(e)
    assert (e * inv - 1).norm() <= 1e-12
    assert (invert(inv) - e).norm() <= 1e-12 * max(1, e.norm())


def test_spectrum():
    S = CharacterSpace(["a", "b", "c"])
    assert spectrum(Element.const(S, 3 + 1j)) == [3 + 1j]
    assert spectrum(Element(S, [1, 1, -1])) == [1, -1]


def test_spectrum_in_norm_disk(rng):
    for _ in range(100):
        e = random_element(rng, random_space(rng))
        assert all(abs(z) <= e.norm() * (1 + 1e-15) for z in spectrum(e))


def test_quasi_product(rng):
    S = random_space(rng)
    b = random_element(rng, S)
    assert quasi_product(Element.const(S, 0), b).allclose(b)
    u = random_element(rng, S) + 3.0
    a, qb = 1 - u, 1 - invert(u)
    assert quasi_product(a, qb).norm() <= 1e-12 * max(1, u.norm() * invert(u).norm())
    for _ in range(100):
        x, y = random_element(rng, S), random_element(rng, S)
        assert quasi_product(x, y).allclose(quasi_product(y, x))


def test_exp_log():
    S = CharacterSpace(["a"])
    assert exp_elem(Element.const(S, 0)).allclose(Element.const(S, 1))
    assert log_principal(Element.const(S, np.e)).allclose(Element.const(S, 1))
    with pytest.raises(LogOnCut):
        log_principal(Element.const(S, -2.0))
    # a rotated cut accepts the negative axis
    assert abs(log_principal(Element.const(S, -2.0), cut_angle=np.pi / 2).values[0].imag + np.pi) < 1e-12


def test_log_round_trip(rng):
    S = random_space(rng)
    e = Element(S, np.abs(rng.normal(size=len(S))) + 0.1 + 1j * rng.normal(size=len(S)))
    assert np.max(np.abs(np.exp(log_principal(e).values) - e.values)) <= 1e-12 * max(1, e.norm())


@given(st.integers(0, 2**32 - 1))
def test_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng)
    for _ in range(25):
        a, b = random_element(rng, S), random_element(rng, S)
        assert (a * b).norm() <= a.norm() * b.norm() * (1 + 1e-15)


@given(st.integers(0, 2**32 - 1))
def test_unitization_inverse(seed):
    rng = np.random.default_rng(seed)
    S = random_space(rng)
    b = random_element(rng, S)
    b = Element(S, np.where(np.abs(1 - b.values) < 0.1, b.values + 0.5, b.values))
    mu = complex(*rng.normal(size=2)) + 0.05
    x, y = unitization_inverse(b, mu)
    assert x.norm() == pytest.approx((-mu * b).norm() + abs(mu))
    one = Unitized(Element.const(S, 0), 1.0)
    for prod in (x * y, y * x):
        assert (prod.a - one.a).norm() <= 1e-10 and abs(prod.lam - 1) <= 1e-12
    assert quasi_product(b, quasi_inverse(b)).norm() <= 1e-10 * max(1, b.norm()) ** 2


def test_cross_space_rejected():
    a = Element.const(CharacterSpace(["a"]), 1)
    b = Element.const(CharacterSpace(["b"]), 1)
    with pytest.raises(SpaceMismatch):
        a + b


def test_space_invariants():
    with pytest.raises(ValueError):
        CharacterSpace(["a", "a"])
    with pytest.raises(ValueError):
        CharacterSpace(["a", "b"], coords=[0.0])
    with pytest.raises(ValueError):
        CharacterSpace(["a", "b", "c", "d"], edges=[(0, 1, True), (1, 2, True)])
    C = CharacterSpace.circle(8)
    assert C.loops == (tuple(range(8)),)


def test_json_round_trip(rng):
    C = CharacterSpace.circle(6)
    back = CharacterSpace.from_json(json.loads(json.dumps(C.to_json())))
    assert back == C and back.loops == C.loops
    e = Element(C, cnormal(rng, 6))
    e2 = Element.from_json(back, json.loads(json.dumps(e.to_json())))
    assert e2.allclose(e, atol=0)
    with pytest.raises(SpaceMismatch):
        Element.from_json(CharacterSpace.interval(6), e.to_json())


def test_elements_are_immutable():
    e = Element.const(CharacterSpace(["a"]), 1)
    with pytest.raises(ValueError):
        e.values[0] = 2
