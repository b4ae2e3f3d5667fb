"""Approximation of Arens-Hoffman elements by invertible ones, perturbing ``b_0`` only.

With ``b_1..b_{n-1}`` fixed, the resultant is a monic polynomial ``P(c)`` of
degree ``n`` in ``b_0 = c``. An element is invertible exactly when ``P(b_0)``
is invertible in the base, so it suffices to move ``b_0`` off the roots of
``P`` at every character.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arens_hoffman import AHElement, ah_norm
from .core import Element
from .errors import RetriesExhausted
from .poly import horner, resultant_array, resultant_poly_coeffs_array

MARGIN = 1e-9
BOUNDARY_SAMPLES = 64


@dataclass(frozen=True)
class PerturbationTrace:
    chain: tuple  # c_{n-1}, ..., c_0, then the final b_0 (Elements)
    step_norms: tuple
    min_modulus: float
    seed: int
    draws: int

    def to_json(self):
        return {
            "seed": self.seed,
            "draws": self.draws,
            "step_norms": list(self.step_norms),
            "min_modulus": self.min_modulus,
            "chain": [c.to_json() for c in self.chain],
        }


def resultant_margin(u):
    """Threshold below which a resultant value counts as zero."""
    res = resultant_array(u.ext.alpha.array, u.array)
    return MARGIN * max(1.0, float(np.max(np.abs(res))))


def _p_full(u):
    """``P(c)`` coefficients ``p_0..p_{n-1}, 1`` per character, shape ``(n+1, N)``."""
    p = resultant_poly_coeffs_array(u.ext.alpha.array, u.array[1:])
    return np.vstack([p, np.ones((1, p.shape[1]))])


def _res_at(u, chars, b0):
    """Resultant of ``u`` with ``b_0`` replaced by ``b0`` at characters ``chars``.

    The Sylvester determinant is the acceptance test: the interpolated
    coefficients of ``P`` carry absolute errors that can exceed the margin.
    """
    beta = u.array[:, chars].copy()
    beta[0] = b0
    return resultant_array(u.ext.alpha.array[:, chars], beta)


def _derivative(coeffs, order):
    """Coefficients of the ``order``-th derivative of a polynomial array."""
    c = coeffs
    for _ in range(order):
        k = np.arange(1, c.shape[0])[:, None]
        c = c[1:] * k
    return c


def approx_invertible_direct(u, eps):
    """Invertible ``u~`` with ``||u~ - u|| < eps`` differing from ``u`` only in ``b_0``.

    At characters where the resultant clears the margin nothing moves.
    Elsewhere ``b_0`` moves to the point of the disk ``B(b_0, eps/2)`` farthest
    from the roots of ``P``, among the centre and boundary samples.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    full = _p_full(u)
    b0 = u.array[0]
    margin = resultant_margin(u)
    vals = resultant_array(u.ext.alpha.array, u.array)
    new_b0 = b0.copy()
    rho = 0.5 * eps
    ring = rho * np.exp(2j * np.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES)
    for k in np.nonzero(np.abs(vals) <= margin)[0]:
        roots = np.roots(full[::-1, k])
        cand = b0[k] + np.concatenate([[0], ring, 0.5 * ring])
        dist = np.min(np.abs(cand[:, None] - roots[None, :]), axis=1)
        order = np.argsort(-dist, kind="stable")
        rv = np.abs(_res_at(u, np.full(len(cand), k), cand))
        ok = order[rv[order] > margin]
        best = ok[0] if len(ok) else int(np.argmax(rv))
        new_b0[k] = cand[best]
    arr = u.array.copy()
    arr[0] = new_b0
    out = AHElement.from_array(u.ext, arr)
    _check_output(u, out, eps)
    return out


def _check_output(u, out, eps):
    if not np.array_equal(out.array[1:], u.array[1:]):
        raise AssertionError("higher coefficients changed")
    if not ah_norm(out - u) < eps:
        raise AssertionError("perturbation is not within eps")
    if not np.min(np.abs(resultant_array(u.ext.alpha.array, out.array))) > resultant_margin(u):
        raise AssertionError("resultant of the output is not invertible")


def approx_invertible_chain(u, eps, retries=32, seed=0):
    """The derivative-chain procedure, returning ``(u~, trace)``.

    Starting from ``c_{n-1} = b_0``, step ``j`` (``j = n-1, ..., 1``) perturbs
    by less than ``eps/n`` until ``P^{(j)}`` is invertible at the candidate;
    the last step does the same for ``P`` itself and yields ``b~_0``. Each
    step first tries no perturbation, then redraws at failing characters.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(seed)
    n = u.ext.degree
    full = _p_full(u)
    margin = resultant_margin(u)
    radius = 0.99 * eps / n
    current = u.array[0].copy()
    chain = [Element(u.ext.space, current)]
    steps = []
    draws = 0
    for order in list(range(n - 1, 0, -1)) + [0]:
        deriv = _derivative(full, order)
        scale = max(1.0, float(np.max(np.abs(horner(deriv, current)))))
        thresh = margin if order == 0 else MARGIN * scale
        chars = np.arange(len(current))

        def failing(c):
            if order == 0:
                return np.abs(_res_at(u, chars, c)) <= thresh
            return np.abs(horner(deriv, c)) <= thresh

        cand = current.copy()
        bad = failing(cand)
        tries = 0
        while bad.any():
            if tries == retries:
                raise RetriesExhausted(f"derivative order {order} after {retries} draws")
            m = int(bad.sum())
            r = radius * np.sqrt(rng.random(m))
            cand[bad] = current[bad] + r * np.exp(2j * np.pi * rng.random(m))
            bad = failing(cand)
            tries += 1
            draws += 1
        steps.append(float(np.max(np.abs(cand - current))))
        current = cand
        chain.append(Element(u.ext.space, current))
    arr = u.array.copy()
    arr[0] = current
    out = AHElement.from_array(u.ext, arr)
    _check_output(u, out, eps)
    res = resultant_array(u.ext.alpha.array, out.array)
    trace = PerturbationTrace(tuple(chain), tuple(steps), float(np.min(np.abs(res))), seed, draws)
    return out, trace


@dataclass(frozen=True)
class PowerWitness:
    eps: float
    witness: Element
    distance: float


def nth_power_witness(a, ext, eps_seq=(1e-1, 1e-2, 1e-3), strategy="direct", seed=0):
    """Invertible resultants ``R(beta_eps)`` converging to ``a^n``.

    ``beta_eps`` is an invertible approximation of ``embed(a)``; since its
    higher coefficients vanish, ``R(beta_eps) = b~_0^n``.
    """
    u = ext.embed(a)
    target = a.values**ext.degree
    out = []
    for eps in eps_seq:
        if strategy == "direct":
            v = approx_invertible_direct(u, eps)
        else:
            v, _ = approx_invertible_chain(u, eps, seed=seed)
        res = resultant_array(ext.alpha.array, v.array)
        out.append(PowerWitness(eps, Element(a.space, res), float(np.max(np.abs(res - target)))))
    return out
