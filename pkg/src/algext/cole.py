"""Cole extensions by finite sets of monic polynomials, finite towers, and sup-norm distance.

The Cole space over ``X`` for ``U = {alpha_1, ..., alpha_P}`` is the fibred
product of the individual fibrations: all tuples ``(omega, lambda_1, ...,
lambda_P)`` with ``alpha_j(omega)(lambda_j) = 0``. Points are kept
multiplicity-expanded so that fibre averages carry the right weights.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from .arens_hoffman import min_norm_param
from .core import CharacterSpace, Element
from .errors import IndexOrder, StageTooLarge, TooLarge
from .fibration import build_fibration
from .poly import newton_sums_array

POINT_CAP = 10**6
BOUND_SLACK = 1e-9


class ColeSpace:
    """Multiplicity-expanded fibred product of the fibrations of ``polys``."""

    def __init__(self, base, polys, cap=POINT_CAP):
        polys = list(polys)
        for p in polys:
            if p.space.token != base.token:
                raise ValueError("every polynomial must live on the base")
        self.base = base
        self.polys = tuple(polys)
        self.dims = tuple(p.degree for p in polys)
        per = int(np.prod(self.dims)) if polys else 1
        total = len(base) * per
        if total > cap:
            raise TooLarge(f"{total} points exceed the cap {cap}")
        fibres = [build_fibration(p).expanded for p in polys]
        tuples = np.array(list(itertools.product(*[range(d) for d in self.dims])), dtype=int)
        tuples = tuples.reshape(per, len(polys))
        self.parent = np.repeat(np.arange(len(base)), per)
        self.sheets = np.tile(tuples, (len(base), 1))
        lam = np.empty((total, len(polys)), dtype=complex)
        for j, fib in enumerate(fibres):
            lam[:, j] = fib[self.parent, self.sheets[:, j]]
        self.lam = lam
        for a in (self.parent, self.sheets, self.lam):
            a.setflags(write=False)
        self._check_bound()
        self._space = None

    def _check_bound(self):
        for j, p in enumerate(self.polys):
            bound = max(1.0, float(np.sum(p.norms())))
            if np.any(np.abs(self.lam[:, j]) > bound * (1 + BOUND_SLACK)):
                raise AssertionError(f"coordinate bound violated for polynomial {j}")

    def __len__(self):
        return len(self.parent)

    @property
    def fibre_size(self):
        return int(np.prod(self.dims)) if self.dims else 1

    def as_space(self):
        """Character space of the expanded points (no adjacency)."""
        if self._space is None:
            ids = [
                f"{self.base.points[k]}|" + ".".join(str(int(s)) for s in row)
                for k, row in zip(self.parent, self.sheets)
            ]
            self._space = CharacterSpace(ids)
        return self._space

    def pullback_values(self, e):
        vals = e.values if isinstance(e, Element) else np.asarray(e)
        return vals[self.parent]

    def fibre_average(self, values):
        """Mean over each base fibre of a function on the expanded points."""
        values = np.asarray(values, dtype=complex)
        re = np.bincount(self.parent, weights=values.real, minlength=len(self.base))
        im = np.bincount(self.parent, weights=values.imag, minlength=len(self.base))
        return (re + 1j * im) / self.fibre_size

    def collapsed_rows(self, decimals=10):
        """Rows ``(character-id, lambda_1.., multiplicity)`` with duplicate tuples merged."""
        rows = {}
        order = []
        for k, lam in zip(self.parent, self.lam):
            key = (int(k),) + tuple(np.round(lam, decimals))
            if key not in rows:
                rows[key] = [int(k), lam, 0]
                order.append(key)
            rows[key][2] += 1
        return [(self.base.points[rows[k][0]], rows[k][1], rows[k][2]) for k in order]


def build_cole(base, polys, cap=POINT_CAP):
    return ColeSpace(base, polys, cap)


def _reduce_axis(arr, axis, alpha_low):
    """Reduce a polynomial array along ``axis`` modulo the monic ``alpha`` (last axis = characters)."""
    n = alpha_low.shape[0]
    arr = np.moveaxis(arr, axis, 0).copy()
    shape = (n,) + (1,) * (arr.ndim - 2) + (alpha_low.shape[1],)
    a = alpha_low.reshape(shape)
    for k in range(arr.shape[0] - 1, n - 1, -1):
        q = arr[k].copy()
        arr[k - n : k] -= q[None] * a
        arr[k] = 0
    out = arr[:n]
    if out.shape[0] < n:
        pad = np.zeros((n - out.shape[0],) + out.shape[1:], dtype=complex)
        out = np.concatenate([out, pad])
    return np.moveaxis(out, 0, axis)


class ColePolyElement:
    """Minimal representative ``sum_m b_m p^m`` with ``0 <= m_j < n(alpha_j)``.

    ``coeffs`` has shape ``dims + (N,)``; ``coeffs[m]`` holds ``b_m``.
    """

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != space.dims + (len(space.base),):
            raise ValueError(f"coefficient shape {coeffs.shape} does not match {space.dims}")
        coeffs.setflags(write=False)
        self.space = space
        self.coeffs = coeffs

    @classmethod
    def reduce(cls, space, arr):
        """Minimal representative of an arbitrary-degree polynomial array."""
        arr = np.asarray(arr, dtype=complex)
        for j, p in enumerate(space.polys):
            arr = _reduce_axis(arr, j, p.array)
        return cls(space, arr)

    @classmethod
    def pullback(cls, space, a):
        arr = np.zeros(space.dims + (len(space.base),), dtype=complex)
        arr[(0,) * len(space.dims)] = a.values if isinstance(a, Element) else a
        return cls(space, arr)

    @classmethod
    def coordinate(cls, space, j):
        """The coordinate function ``p_{alpha_j}``."""
        shape = tuple(d if i != j else max(d, 2) for i, d in enumerate(space.dims))
        arr = np.zeros(shape + (len(space.base),), dtype=complex)
        idx = [0] * len(space.dims)
        idx[j] = 1
        arr[tuple(idx)] = 1.0
        return cls.reduce(space, arr)

    def values(self):
        """Evaluation at every expanded point."""
        sp = self.space
        out = np.zeros(len(sp), dtype=complex)
        for m in itertools.product(*[range(d) for d in sp.dims]):
            term = self.coeffs[m][sp.parent]
            for j, mj in enumerate(m):
                if mj:
                    term = term * sp.lam[:, j] ** mj
            out += term
        return out

    def as_element(self):
        return Element(self.space.as_space(), self.values())

    def _check(self, other):
        if not isinstance(other, ColePolyElement) or other.space is not self.space:
            raise ValueError("operands live on different Cole spaces")

    def __add__(self, other):
        self._check(other)
        return ColePolyElement(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return ColePolyElement(self.space, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return ColePolyElement(self.space, self.coeffs * other)
        self._check(other)
        dims = self.space.dims
        out = np.zeros(tuple(2 * d - 1 for d in dims) + (len(self.space.base),), dtype=complex)
        for m in itertools.product(*[range(d) for d in dims]):
            a = self.coeffs[m]
            if not np.any(a):
                continue
            for k in itertools.product(*[range(d) for d in dims]):
                out[tuple(x + y for x, y in zip(m, k))] += a * other.coeffs[k]
        return ColePolyElement.reduce(self.space, out)

    __rmul__ = __mul__


def eval_cole(e, point):
    """Value of ``e`` at expanded point index ``point``."""
    sp = e.space
    k = sp.parent[point]
    total = 0j
    for m in itertools.product(*[range(d) for d in sp.dims]):
        total += e.coeffs[m][k] * np.prod([sp.lam[point, j] ** mj for j, mj in enumerate(m)])
    return complex(total)


def T_U(e):
    """``(1/prod n_j) sum_m b_m prod_j s_{alpha_j}^{m_j}``."""
    sp = e.space
    sums = [newton_sums_array(p.array, d - 1) for p, d in zip(sp.polys, sp.dims)]
    out = np.zeros(len(sp.base), dtype=complex)
    for m in itertools.product(*[range(d) for d in sp.dims]):
        term = e.coeffs[m].copy()
        for j, mj in enumerate(m):
            term = term * sums[j][mj]
        out += term
    return Element(sp.base, out / sp.fibre_size)


def T_U_fibre_avg(e):
    return Element(e.space.base, e.space.fibre_average(e.values()))


def subalgebra_basis(space, base_basis):
    """Spanning set ``pullback(g) * prod_j p_j^{m_j}`` of the extended subalgebra."""
    out = []
    for g in base_basis:
        gv = g.values if isinstance(g, Element) else np.asarray(g)
        for m in itertools.product(*[range(d) for d in space.dims]):
            v = gv[space.parent].astype(complex)
            for j, mj in enumerate(m):
                v = v * space.lam[:, j] ** mj
            out.append(v)
    return out


# -- sup-norm distance ---------------------------------------------------------


@dataclass(frozen=True)
class DistanceResult:
    value: float
    lower: float
    upper: float
    coeffs: np.ndarray
    iterations: int


def _as_values(v):
    return v.values if isinstance(v, Element) else np.asarray(v, dtype=complex)


def sup_distance_certified(f, basis, tol=1e-7, max_iter=20000):
    """Complex Chebyshev distance from ``f`` to ``span(basis)`` by Lawson reweighting.

    For weights ``w`` summing to 1 the weighted least-squares residual is a
    lower bound on the distance, and the max residual of the weighted
    solution is an upper bound. Iteration stops once the bounds agree to
    ``tol``.
    """
    f = _as_values(f)
    if len(basis) > 64:
        raise ValueError("at most 64 basis vectors")
    if not basis:
        d = float(np.max(np.abs(f)))
        return DistanceResult(d, d, d, np.zeros(0, dtype=complex), 0)
    G = np.column_stack([_as_values(g) for g in basis])
    M = len(f)
    w = np.full(M, 1.0 / M)
    lower, upper, best_c = 0.0, np.inf, None
    for it in range(1, max_iter + 1):
        sw = np.sqrt(w)
        c, *_ = np.linalg.lstsq(G * sw[:, None], f * sw, rcond=None)
        r = np.abs(f - G @ c)
        lower = max(lower, float(np.sqrt(np.sum(w * r**2))))
        m = float(np.max(r))
        if m < upper:
            upper, best_c = m, c
        if upper - lower <= tol * max(1.0, upper):
            break
        w = w * r
        s = np.sum(w)
        if s == 0:
            break
        w /= s
    return DistanceResult(upper, lower, upper, best_c, it)


def sup_distance(f, basis, tol=1e-7):
    return sup_distance_certified(f, basis, tol).value


# -- towers --------------------------------------------------------------------


def poly_hash(poly):
    return hashlib.sha1(np.ascontiguousarray(poly.array).tobytes()).hexdigest()[:16]


@dataclass
class Stage:
    """One tower stage: its points, the map to the previous stage, and fibre weights."""

    kind: str
    space: CharacterSpace
    parent: np.ndarray
    weight: np.ndarray
    info: dict = field(default_factory=dict)
    coordinates: dict = field(default_factory=dict)


class Tower:
    """A finite sequence of extension stages over a base space."""

    def __init__(self, base, cap=POINT_CAP):
        self.cap = cap
        n = len(base)
        self.stages = [Stage("base", base, np.arange(n), np.ones(n))]

    def __len__(self):
        return len(self.stages) - 1

    @property
    def top(self):
        return self.stages[-1]

    def add_stage(self, stage):
        if len(stage.parent) > self.cap:
            raise StageTooLarge(f"stage has {len(stage.parent)} points, cap {self.cap}")
        sums = np.bincount(stage.parent, weights=stage.weight, minlength=len(self.top.space))
        if not np.allclose(sums, 1.0, atol=1e-12):
            raise ValueError("fibre weights must sum to 1 over every fibre")
        self.stages.append(stage)
        return stage

    def _order(self, sigma, tau):
        if not 0 <= sigma <= tau < len(self.stages):
            raise IndexOrder(f"need 0 <= sigma <= tau <= {len(self)}, got {sigma}, {tau}")

    def project(self, sigma, tau, point):
        """Image in stage ``sigma`` of point(s) of stage ``tau``."""
        self._order(sigma, tau)
        p = np.asarray(point)
        for k in range(tau, sigma, -1):
            p = self.stages[k].parent[p]
        return p

    def pullback(self, sigma, tau, e):
        self._order(sigma, tau)
        vals = _as_values(e)
        idx = self.project(sigma, tau, np.arange(len(self.stages[tau].parent)))
        return Element(self.stages[tau].space, vals[idx])

    def average_down(self, sigma, tau, e):
        """Composite averaging operator ``T_{sigma,tau}``."""
        self._order(sigma, tau)
        vals = _as_values(e).astype(complex)
        for k in range(tau, sigma, -1):
            st = self.stages[k]
            m = len(self.stages[k - 1].space)
            wv = st.weight * vals
            vals = np.bincount(st.parent, weights=wv.real, minlength=m) + 1j * np.bincount(
                st.parent, weights=wv.imag, minlength=m
            )
        return Element(self.stages[sigma].space, vals)

    def manifest(self):
        out = []
        for k, st in enumerate(self.stages):
            out.append({"stage": k, "kind": st.kind, "points": len(st.parent), **st.info})
        return out


def cole_stage(cole):
    """Tower stage for a Cole extension of the current top space."""
    weight = np.full(len(cole), 1.0 / cole.fibre_size)
    coords = {f"p{j}": cole.lam[:, j].copy() for j in range(len(cole.polys))}
    info = {
        "polynomials": [poly_hash(p) for p in cole.polys],
        "degrees": list(cole.dims),
    }
    return Stage("cole", cole.as_space(), cole.parent.copy(), weight, info, coords)


def extend_tower(tower, polys, kind="cole"):
    """Adjoin roots of ``polys`` (MonicPolys on the top space) as a new stage."""
    try:
        cole = build_cole(tower.top.space, polys, cap=tower.cap)
    except TooLarge as exc:
        raise StageTooLarge(str(exc)) from exc
    stage = cole_stage(cole)
    stage.kind = kind
    if kind == "ah":
        stage.info["t"] = min_norm_param(polys[0])
    return tower.add_stage(stage)
