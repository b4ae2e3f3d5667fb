"""The averaging operator ``T`` of an Arens-Hoffman extension.

``T(u) = (1/n) sum_k b_k s_k`` with ``s_k`` the Newton sums of ``alpha``. At
each character this is the mean of ``u^`` over the fibre, roots counted with
multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arens_hoffman import AHElement, AHExtension, min_norm_param
from .core import Element, sup_norm
from .errors import NotReached
from .poly import newton_sums_array, rescale_poly, roots_array

CONTRACTION_TOL = 1e-12


@dataclass(frozen=True)
class ContractionReport:
    condition_ok: bool
    witness: int | None
    ratios: tuple  # ||s_j|| / (t^j n) for j = 0..n-1


class AveragingOperator:
    """``T`` for one extension, with the contraction condition precomputed.

    ``t`` overrides the extension's norm parameter when checking the
    condition; this is how a violating instance can be exhibited, since a
    valid parameter always satisfies it.
    """

    def __init__(self, ext, t=None):
        self.ext = ext
        self.t = float(ext.t if t is None else t)
        n = ext.degree
        self._sums = newton_sums_array(ext.alpha.array, n - 1)
        self.sums = tuple(Element(ext.space, row) for row in self._sums)
        norms = np.max(np.abs(self._sums), axis=1)
        ratios = tuple(float(norms[j] / (self.t**j * n)) for j in range(n))
        bad = [j for j, r in enumerate(ratios) if r > 1 + CONTRACTION_TOL]
        self.report = ContractionReport(not bad, bad[0] if bad else None, ratios)

    @property
    def condition_ok(self):
        return self.report.condition_ok

    def __call__(self, u):
        return T_formula(self, u)


def T_formula(op, u):
    """``(1/n) sum_k b_k s_k``."""
    if u.ext is not op.ext:
        raise ValueError("element is not in the operator's extension")
    n = op.ext.degree
    return Element(op.ext.space, np.sum(u.array * op._sums, axis=0) / n)


def T_fibre_avg(fib, u):
    """Mean of ``u^`` over each fibre, roots repeated by multiplicity."""
    return Element(u.ext.space, np.mean(u.evaluate(fib.expanded), axis=1))


def check_contraction(op, samples=0, rng=None):
    """Report the contraction condition; when it holds, replay ``||T u|| <= ||u||`` on samples."""
    if op.condition_ok and samples:
        rng = np.random.default_rng(rng)
        n, N = op.ext.degree, len(op.ext.space)
        for _ in range(samples):
            arr = rng.normal(size=(n, N)) + 1j * rng.normal(size=(n, N))
            u = AHElement.from_array(op.ext, arr)
            norm_u = sum(sup_norm(c) * op.t**k for k, c in enumerate(u.coeffs))
            if sup_norm(T_formula(op, u)) > norm_u * (1 + 1e-12):
                raise AssertionError("contraction failed although the condition holds")
    return op.report


def enforce_by_rescaling(alpha, t_policy="min", max_halvings=60):
    """Halve ``mu`` until ``alpha^mu`` satisfies the contraction condition.

    ``t_policy`` is ``"min"`` (the minimal norm parameter of each ``alpha^mu``)
    or a fixed number used as ``t`` for every candidate. Returns
    ``(mu, alpha_mu, operator)``.
    """
    mu = 1.0
    for _ in range(max_halvings + 1):
        scaled = alpha if mu == 1.0 else rescale_poly(alpha, mu)
        if t_policy == "min":
            t = min_norm_param(scaled)
        else:
            t = float(t_policy)
        try:
            ext = AHExtension(scaled, t)
        except ValueError:
            ext = None
        if ext is not None:
            op = AveragingOperator(ext)
            if op.condition_ok:
                return mu, scaled, op
        mu *= 0.5
    raise NotReached(f"no compliant rescaling after {max_halvings} halvings")


def rescaled_roots_agree(alpha, mu, tol=1e-8):
    """Every root ``eta`` of ``alpha^mu`` gives ``|alpha(eta/mu)| <= tol``."""
    eta = roots_array(rescale_poly(alpha, mu).array)
    return float(np.max(np.abs(alpha.eval_at(eta / mu)))) <= tol
