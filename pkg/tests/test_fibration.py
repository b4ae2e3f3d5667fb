import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from algext.arens_hoffman import AHExtension
from algext.core import CharacterSpace, Element
from algext.errors import AmbiguousMatching, CannotSeparate, IllConditioned, PointNotInFibration
from algext.fibration import (
    build_fibration,
    fibre_separator,
    gelfand_ah,
    local_trivialization,
    loop_components,
    root_separation,
)
from algext.logext import winding_number
from algext.poly import MonicPoly

from conftest import random_ah, random_extension


def circle_alpha(n=256):
    """(x - e^{i pi t})(x - e^{-i pi t}) over the interval [0, 1]."""
    base = CharacterSpace.interval(n)
    t = base.coords.real
    return MonicPoly([Element.const(base, 1), Element(base, -2 * np.cos(np.pi * t))])


def roots_poly(space, roots):
    """Monic polynomial with the given root elements."""
    coeffs = [Element.const(space, 1)]
    for r in roots:
        shifted = [Element.const(space, 0)] + coeffs
        coeffs = [s - r * c for s, c in zip(shifted, coeffs + [Element.const(space, 0)])]
    return MonicPoly(coeffs[:-1])


def test_circle_is_one_loop():
    fib = build_fibration(circle_alpha())
    comps = loop_components(fib)
    assert len(comps) == 1 and comps[0].cyclic
    # endpoints carry a double root, interior characters two simple roots
    assert fib.point_count() == 2 * 256 - 2
    (r0, m0), = fib.fibres[0]
    assert m0 == 2 and abs(r0 - 1) < 1e-7
    assert winding_number(fib.coordinate()) == 1
    base_inv = Element(fib.base, 2 + np.exp(2j * np.pi * fib.base.coords.real))
    assert winding_number(fib.pullback(base_inv)) == 0


def test_fibration_rows_and_projection():
    fib = build_fibration(circle_alpha(16))
    rows = fib.to_rows()
    assert len(rows) == fib.point_count()
    assert sum(r[3] for r in rows) == 2 * 16
    assert {r[5] for r in rows} == {0}
    proj = fib.projection()
    assert np.all(np.diff(proj) >= 0) and proj[-1] == 15
    assert fib.expanded.shape == (16, 2)


def test_triple_root_merges():
    S = CharacterSpace(["a"])
    one = Element.const(S, 1)
    fib = build_fibration(roots_poly(S, [one, one, one]))
    assert len(fib.fibres[0]) == 1
    r, m = fib.fibres[0][0]
    assert m == 3 and abs(r - 1) < 1e-4


def test_two_disjoint_loops():
    # x^2 - 1 over a circle: two sheets, each a copy of the base loop
    base = CharacterSpace.circle(32)
    alpha = MonicPoly([Element.const(base, -1), Element.const(base, 0)])
    comps = build_fibration(alpha).components()
    assert len(comps) == 2 and all(c.cyclic for c in comps)


def test_square_root_double_cover():
    # x^2 - z over a small circle around 0 joins the two sheets into one loop
    base = CharacterSpace.circle(64, radius=0.5)
    z = Element.coordinate(base)
    fib = build_fibration(MonicPoly([-z, Element.const(base, 0)]))
    comps = fib.components()
    assert len(comps) == 1 and comps[0].cyclic and len(comps[0].points) == 128
    assert winding_number(fib.coordinate()) == 1


def test_coarse_sampling_is_ambiguous():
    # fibres {0, 1} then {0.51, 0.6}: no link is clearly shorter than the alternative
    base = CharacterSpace.interval(2)
    t = Element.coordinate(base)
    with pytest.raises(AmbiguousMatching):
        build_fibration(roots_poly(base, [0.51 * t, 1 - 0.4 * t])).components()


@given(st.integers(0, 2**32 - 1))
def test_gelfand_transform_matches_evaluation(seed):
    rng = np.random.default_rng(seed)
    ext = random_extension(rng)
    try:
        fib = build_fibration(ext.alpha)
    except IllConditioned:
        return
    u = random_ah(rng, ext)
    for k, j, r, _ in fib.distinct_points():
        direct = gelfand_ah(u, (k, r), fib)
        assert abs(direct - fib.transform(u).values[fib.global_index(k, j)]) <= 1e-9 * max(1, abs(direct))
    with pytest.raises(PointNotInFibration):
        gelfand_ah(u, (0, 1e3 + fib.fibres[0][0][0]), fib)


def test_fibre_separator(rng):
    base = CharacterSpace.interval(8)
    t = Element.coordinate(base)
    alpha = roots_poly(base, [t - 2, t, t + 2])
    ext = AHExtension(alpha)
    fib = build_fibration(alpha)
    for k in (0, 5):
        for chosen in range(3):
            sep = fibre_separator(fib, ext, k, chosen)
            vals = [gelfand_ah(sep, (k, r), fib) for r, _ in fib.fibres[k]]
            expect = [1.0 if i == chosen else 0.0 for i in range(3)]
            assert np.allclose(vals, expect, atol=1e-12)


def test_root_separation():
    base = CharacterSpace.interval(4)
    t = Element.coordinate(base)
    fib = build_fibration(roots_poly(base, [t, t + 1 + t]))
    sep = root_separation(fib)
    assert np.allclose(sep.per_character, 1 + base.coords.real)
    assert sep.minimum == pytest.approx(1.0)


def test_local_trivialization_postconditions():
    base = CharacterSpace.interval(41, lo=-1, hi=1)
    t = Element.coordinate(base)
    alpha = roots_poly(base, [t, t + 1, -t - 1.5])
    fib = build_fibration(alpha)
    lt = local_trivialization(fib, 20, 0.2)
    assert 20 in lt.V and len(lt.W) == 3 and lt.delta > 0
    proj = fib.projection()
    for w in lt.W:
        assert {int(proj[g]) for g in w} == set(lt.V)
    assert sum(len(w) for w in lt.W) == 3 * len(lt.V)
    with pytest.raises(CannotSeparate):
        local_trivialization(fib, 20, 10.0)


def test_fibration_rejects_foreign_base():
    fib_alpha = circle_alpha(8)
    with pytest.raises(ValueError):
        build_fibration(fib_alpha, base=CharacterSpace.interval(9))
