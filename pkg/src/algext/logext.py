"""Logarithmic extensions, logarithm descent, and winding numbers.

The log extension of an invertible ``a`` with bound ``t`` has characters
``{(omega, lambda) : exp(lambda) = a(omega), |lambda| <= t}``. Over each
character these are the branches ``Log a(omega) + 2 pi i k``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .averaging import AveragingOperator, T_formula
from .cole import Stage, Tower
from .core import Element, argument_increments, invert, zero_tolerance
from .errors import (
    NotAnExpWitness,
    NotInvertible,
    NotInvertibleOnLoop,
    SamplingTooCoarse,
    TooLarge,
    UnclassifiablePoint,
)
from .fibration import build_fibration, components_from_edges, linked_space, match_mutual_nearest

PATCH_SPREAD = 1.5 * np.pi
EXP_TOL = 1e-10
TWO_PI = 2 * np.pi


# -- winding numbers and continuous logarithms --------------------------------


def _loop_indices(space, loop):
    if isinstance(loop, (int, np.integer)):
        return space.loops[int(loop)]
    return tuple(loop)


def winding_number(e, loop=0, max_step=np.pi):
    """``(1/2pi) * sum`` of principal argument increments around a declared loop."""
    idx = list(_loop_indices(e.space, loop))
    vals = e.values[idx]
    if np.min(np.abs(vals)) <= zero_tolerance(e):
        raise NotInvertibleOnLoop("element vanishes on the loop")
    inc = argument_increments(vals)
    if np.max(np.abs(inc)) >= max_step:
        raise SamplingTooCoarse(f"argument step {np.max(np.abs(inc)):.3f} >= {max_step:.3f}")
    w = float(np.sum(inc)) / TWO_PI
    k = round(w)
    if abs(w - k) > 1e-6:
        raise SamplingTooCoarse(f"winding {w} is not an integer")
    return int(k)


def windings(e, max_step=np.pi):
    return [winding_number(e, j, max_step) for j in range(len(e.space.loops))]


def has_continuous_log(e, max_step=np.pi):
    """True iff every declared loop has winding number 0."""
    return all(w == 0 for w in windings(e, max_step))


def continuous_log(e, max_step=np.pi, tol=1e-9):
    """A logarithm continuous along the adjacency, or ``None`` if none exists.

    The argument is propagated along a breadth-first tree of every adjacency
    component; each step must be smaller than ``max_step`` and every non-tree
    edge must agree with the propagated values.
    """
    v = e.values
    if np.min(np.abs(v)) <= zero_tolerance(e):
        raise NotInvertible(int(np.argmin(np.abs(v))), complex(v[np.argmin(np.abs(v))]))
    space = e.space
    nbrs = space.neighbors()
    arg = np.full(len(v), np.nan)
    for root in range(len(v)):
        if not np.isnan(arg[root]):
            continue
        arg[root] = np.angle(v[root])
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in nbrs[i]:
                step = np.angle(v[j] / v[i])
                if abs(step) >= max_step:
                    return None
                if np.isnan(arg[j]):
                    arg[j] = arg[i] + step
                    queue.append(j)
                elif abs(arg[j] - arg[i] - step) > tol:
                    return None
    log = np.log(np.abs(v)) + 1j * arg
    if np.max(np.abs(np.exp(log) - v)) > tol * max(1.0, float(np.max(np.abs(v)))):
        return None
    return Element(space, log)


# -- local logarithms and the norm parameter ----------------------------------


@dataclass(frozen=True)
class PartitionOfUnity:
    """Weights ``u_j`` summing to 1 with local logs ``l_j`` of ``a`` on their supports."""

    a: Element
    weights: tuple
    logs: tuple

    def check(self, tol=EXP_TOL):
        total = sum(u.values for u in self.weights)
        if np.max(np.abs(total - 1)) > 1e-12:
            raise AssertionError("weights do not sum to 1")
        for u, l in zip(self.weights, self.logs):
            on = np.abs(u.values) > 0
            err = np.abs(np.exp(l.values[on]) - self.a.values[on])
            if on.any() and np.max(err) > tol * max(1.0, float(np.max(np.abs(self.a.values)))):
                raise AssertionError("a local log fails the exponential identity")
        return True


@dataclass(frozen=True)
class LogNormChoice:
    t: float
    t_exact: float
    patches: tuple  # frozensets of point indices
    pu: PartitionOfUnity


def _grow_patch(v, nbrs, free, seed):
    """Breadth-first arc growth while the unwrapped argument spread stays within bounds."""
    arg = {seed: float(np.angle(v[seed]))}
    lo = hi = arg[seed]
    queue = deque([seed])
    while queue:
        i = queue.popleft()
        for j in nbrs[i]:
            if j in arg or j not in free:
                continue
            cand = arg[i] + float(np.angle(v[j] / v[i]))
            if max(hi, cand) - min(lo, cand) > PATCH_SPREAD:
                continue
            arg[j] = cand
            lo, hi = min(lo, cand), max(hi, cand)
            queue.append(j)
    shift = TWO_PI * round(0.5 * (lo + hi) / TWO_PI)
    return {k: a - shift for k, a in arg.items()}


def choose_norm_param_log(a, policy="2pi"):
    """Cover the space by patches carrying local logs of ``a`` and derive ``t``.

    Patches grow along the adjacency while the argument spread stays within
    ``3 pi / 2``; each patch's branch is centred at 0. Points without
    neighbours share one principal-log patch. ``policy="2pi"`` rounds the
    largest local-log modulus up to a multiple of ``2 pi``; ``"exact"`` uses
    it directly. Both are floored at 1.
    """
    v = invert(invert(a)).values  # raises NotInvertible when a vanishes
    space = a.space
    nbrs = space.neighbors()
    isolated = [k for k in range(len(v)) if not nbrs[k]]
    free = set(range(len(v))) - set(isolated)
    patches, logs = [], []
    if isolated:
        l = np.zeros(len(v), dtype=complex)
        l[isolated] = np.log(v[isolated])
        patches.append(frozenset(isolated))
        logs.append(l)
    while free:
        seed = min(free)
        arg = _grow_patch(v, nbrs, free, seed)
        idx = sorted(arg)
        l = np.zeros(len(v), dtype=complex)
        l[idx] = np.log(np.abs(v[idx])) + 1j * np.array([arg[k] for k in idx])
        patches.append(frozenset(idx))
        logs.append(l)
        free -= set(idx)
    M = max(float(np.max(np.abs(l[sorted(p)]))) for p, l in zip(patches, logs))
    t_exact = max(1.0, M)
    if policy == "2pi":
        t = max(1.0, TWO_PI * math.ceil(M / TWO_PI - 1e-12))
    elif policy == "exact":
        t = t_exact
    else:
        raise ValueError(f"unknown policy {policy!r}")
    weights = []
    for p in patches:
        u = np.zeros(len(v))
        u[sorted(p)] = 1.0
        weights.append(Element(space, u))
    pu = PartitionOfUnity(a, tuple(weights), tuple(Element(space, l) for l in logs))
    return LogNormChoice(float(t), t_exact, tuple(patches), pu)


# -- the log fibration ---------------------------------------------------------


def branch_range(L, t):
    """Integers ``k`` with ``|L + 2 pi i k| <= t``."""
    if abs(L.real) > t:
        return range(0)
    R = math.sqrt(t * t - L.real * L.real)
    lo = math.ceil((-L.imag - R) / TWO_PI) - 1
    hi = math.floor((-L.imag + R) / TWO_PI) + 1
    return [k for k in range(lo, hi + 1) if abs(complex(L.real, L.imag + TWO_PI * k)) <= t]


def brute_force_branches(L, t):
    K = math.ceil(t / np.pi) + 1
    return [k for k in range(-K, K + 1) if abs(complex(L.real, L.imag + TWO_PI * k)) <= t]


class LogFibration:
    """Branch enumeration of ``exp(lambda) = a(omega)`` with ``|lambda| <= t``."""

    def __init__(self, a, t):
        self.a = a
        self.base = a.space
        self.t = float(t)
        L = np.log(a.values)
        parent, branch, lam = [], [], []
        for k, Lk in enumerate(L):
            for b in branch_range(complex(Lk), self.t):
                parent.append(k)
                branch.append(b)
                lam.append(complex(Lk.real, Lk.imag + TWO_PI * b))
        self.parent = np.array(parent, dtype=int)
        self.branch = np.array(branch, dtype=int)
        self.lam = np.array(lam, dtype=complex)
        counts = np.bincount(self.parent, minlength=len(self.base))
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self._space = None
        self._components = None

    def __len__(self):
        return len(self.parent)

    def fibre(self, k):
        return slice(self.offsets[k], self.offsets[k + 1])

    def _link(self):
        links = []
        for i, j, _ in self.base.edges:
            si, sj = self.fibre(i), self.fibre(j)
            pairs = match_mutual_nearest(self.lam[si], self.lam[sj], edge=(i, j), max_dist=np.pi)
            links.extend((si.start + a, sj.start + b) for a, b in pairs)
        comps = components_from_edges(len(self), links, np.exp(self.lam))
        ids = [f"{self.base.points[k]}@{b}" for k, b in zip(self.parent, self.branch)]
        space = linked_space(self.base, ids, self.lam, self.parent, links, comps)
        return space, comps

    def as_space(self):
        if self._space is None:
            self._space, self._components = self._link()
        return self._space

    def components(self):
        self.as_space()
        return self._components

    def coordinate(self):
        """The log coordinate ``(omega, lambda) -> lambda``."""
        return Element(self.as_space(), self.lam)

    def pullback(self, e):
        return Element(self.as_space(), e.values[self.parent])

    def weights_from(self, pu):
        """Fibre weights placing ``u_j(omega)`` on the branch ``l_j(omega)``."""
        w = np.zeros(len(self))
        L = np.log(self.a.values)
        for u, l in zip(pu.weights, pu.logs):
            on = np.nonzero(u.values)[0]
            for k in on:
                b = round((l.values[k].imag - L[k].imag) / TWO_PI)
                s = self.fibre(k)
                hit = np.nonzero(self.branch[s] == b)[0]
                if len(hit) != 1:
                    raise AssertionError(f"local log at {k} is not an enumerated branch")
                w[s.start + hit[0]] += u.values[k].real
        return w

    def to_rows(self):
        comp_of = {}
        for c, comp in enumerate(self.components()):
            for g in comp.points:
                comp_of[g] = c
        rows = []
        for g in range(len(self)):
            k = int(self.parent[g])
            rows.append(
                (
                    self.base.points[k],
                    int(self.branch[g]),
                    self.lam[g].real,
                    self.lam[g].imag,
                    g - int(self.offsets[k]),
                    comp_of[g],
                )
            )
        return rows


def build_log_fibration(a, t=None, policy="2pi"):
    """Log fibration of ``a``; ``t`` defaults to the patch policy's value."""
    choice = choose_norm_param_log(a, policy)
    if t is None:
        t = choice.t
    if t < choice.t_exact - 1e-12:
        raise ValueError(f"t={t} is below the local-log bound {choice.t_exact}")
    fib = LogFibration(a, t)
    fib.choice = choice
    return fib


def log_stage(fib):
    """Tower stage for a log extension, weighted by the partition of unity."""
    w = fib.weights_from(fib.choice.pu)
    info = {"t": fib.t, "patches": len(fib.choice.patches)}
    return Stage("log", fib.as_space(), fib.parent.copy(), w, info, {"log": fib.lam.copy()})


def log_T_operator(pu, q):
    """``sum_k q_k s_k`` with ``s_k = sum_j u_j l_j^k``."""
    q = list(q)
    space = pu.a.space
    out = np.zeros(len(space), dtype=complex)
    for u, l in zip(pu.weights, pu.logs):
        acc = np.zeros(len(space), dtype=complex)
        for c in reversed(q):
            acc = acc * l.values + (c.values if isinstance(c, Element) else c)
        out += u.values * acc
    return Element(space, out)


# -- logarithm descent ---------------------------------------------------------


@dataclass(frozen=True)
class DescentResult:
    log: Element
    average: Element
    classes: np.ndarray
    residual: float


def log_descent(f, h, op=None, fib=None, witness_tol=1e-9, output_tol=1e-8):
    """A logarithm of ``f`` from a logarithm ``h`` of ``embed(f)`` in an AH extension.

    ``g = T(h)`` differs from a log of ``f`` by ``2 pi i k / n`` at each
    character; ``exp(-g) f`` is classified to the nearest ``n``-th root of
    unity (rejecting anything farther than ``pi/(4n)`` in angle) and the
    correction is added back.
    """
    ext = h.ext
    n = ext.degree
    op = op or AveragingOperator(ext)
    fib = fib or build_fibration(ext.alpha)
    hv = h.evaluate(fib.expanded)
    fv = f.values[:, None]
    err = np.abs(np.exp(hv) - fv) / np.maximum(1.0, np.abs(fv))
    if np.max(err) > witness_tol:
        k = int(np.unravel_index(np.argmax(err), err.shape)[0])
        raise NotAnExpWitness(f"exp(h) differs from f by {np.max(err):.3e} at character {k}")
    g = T_formula(op, h)
    eta = np.exp(-g.values) * f.values
    ang = np.angle(eta)
    cls = np.round(ang * n / TWO_PI).astype(int)
    off = np.abs(ang - cls * TWO_PI / n)
    zeta = np.exp(2j * np.pi * cls / n)
    bad = np.nonzero((off > np.pi / (4 * n)) | (np.abs(eta - zeta) > 1e-6))[0]
    if len(bad):
        raise UnclassifiablePoint(int(bad[0]), complex(eta[bad[0]]))
    out = g.values + 2j * np.pi * cls / n
    residual = float(np.max(np.abs(np.exp(out) - f.values)))
    if residual > output_tol:
        raise NotAnExpWitness(f"descent residual {residual:.3e} exceeds {output_tol}")
    return DescentResult(Element(f.space, out), g, np.mod(cls, n), residual)


# -- the analytic circle model -------------------------------------------------


@dataclass(frozen=True)
class Arc:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def contains(self, x):
        return (self.lo < x or (self.lo_closed and x == self.lo)) and (
            x < self.hi or (self.hi_closed and x == self.hi)
        )


def _intersect(intervals):
    """Intersection of ``(lo, hi, lo_closed, hi_closed)`` intervals; ties take the open end."""
    lo, hi, lc, hc = -np.inf, np.inf, False, False
    for a, b, ac, bc in intervals:
        if a > lo or (a == lo and not ac):
            lo, lc = a, ac if a > lo else (lc and ac)
        if b < hi or (b == hi and not bc):
            hi, hc = b, bc if b < hi else (hc and bc)
    if lo < hi or (lo == hi and lc and hc):
        return lo, hi, lc, hc
    return None


def _merge(arcs):
    arcs = sorted(arcs, key=lambda a: (a.lo, not a.lo_closed))
    out = []
    for a in arcs:
        if out:
            p = out[-1]
            touches = a.lo < p.hi or (a.lo == p.hi and (a.lo_closed or p.hi_closed))
            if touches:
                if a.hi > p.hi or (a.hi == p.hi and a.hi_closed):
                    out[-1] = Arc(p.lo, a.hi, p.lo_closed, a.hi_closed)
                continue
        out.append(a)
    return out


def example_5323_region(t, arc, center, radius):
    """Projection to the circle of ``{(theta, lambda) : theta in arc, |lambda - c| < r}``.

    The model is ``a = id`` on the unit circle with branches
    ``lambda = i(theta + 2 pi k)``, ``theta`` in ``(-pi, pi]`` and
    ``|lambda| <= t``. ``arc`` is an open parameter interval. Returns the
    parameter arcs of the image with their endpoint types.
    """
    cx, cy = center.real, center.imag
    if radius * radius <= cx * cx:
        return []
    R = math.sqrt(radius * radius - cx * cx)
    K = math.ceil(t / np.pi) + 1
    pieces = []
    for k in range(-K, K + 1):
        shift = TWO_PI * k
        hit = _intersect(
            [
                (arc[0] + shift, arc[1] + shift, False, False),
                (-np.pi + shift, np.pi + shift, False, True),
                (cy - R, cy + R, False, False),
                (-t, t, True, True),
            ]
        )
        if hit is not None:
            lo, hi, lc, hc = hit
            pieces.append(Arc(lo - shift, hi - shift, lc, hc))
    return _merge(pieces)


# -- finite log towers ---------------------------------------------------------


def _exact_log(e, tol=1e-9):
    l = continuous_log(e)
    if l is None:
        return None
    if np.max(np.abs(np.exp(l.values) - e.values)) > tol * max(1.0, e.norm()):
        return None
    return l


def log_tower(base, rounds=1, samples=8, test_set=None, seed=0, cap=10**5):
    """Adjoin log fibrations round by round and report logarithm coverage.

    Each round draws up to ``samples`` invertible elements of the top space
    (pulled-back generators and seeded products of them) and adjoins a log
    fibration for every sample still lacking a continuous logarithm. The
    report gives, per round, the fraction of ``test_set`` with an exact
    logarithm on the top space.
    """
    if not 0 <= rounds <= 4 or not 1 <= samples <= 32:
        raise TooLarge("rounds must be <= 4 and samples <= 32")
    rng = np.random.default_rng(seed)
    tower = Tower(base, cap=cap)
    gens = list(test_set or [])
    if base.coords is not None:
        z = Element.coordinate(base)
        if np.min(np.abs(z.values)) > zero_tolerance(z) and not any(z.allclose(g) for g in gens):
            gens.append(z)
    if test_set is None:
        if not gens:
            raise ValueError("no invertible coordinate; pass an explicit test set")
        test_set = gens[:1]

    def coverage():
        top = len(tower)
        hits = sum(_exact_log(tower.pullback(0, top, e)) is not None for e in test_set)
        return hits / len(test_set)

    report = [{"round": 0, "adjoined": [], "coverage": coverage(), "points": len(base)}]
    for r in range(1, rounds + 1):
        top = len(tower)
        pool = [tower.pullback(0, top, g) for g in gens]
        while len(pool) < samples and len(gens) > 1:
            i, j = rng.choice(len(gens), size=2, replace=False)
            sgn = int(rng.choice([-1, 1]))
            pool.append(tower.pullback(0, top, gens[i] * gens[j] ** sgn))
        pool = pool[:samples]
        adjoined = []
        for s, e in enumerate(pool):
            cur = _lift(tower, e)
            if _exact_log(cur) is not None:
                continue
            fib = build_log_fibration(cur)
            if len(fib) > cap:
                raise TooLarge(f"log stage would have {len(fib)} points, cap {cap}")
            tower.add_stage(log_stage(fib))
            adjoined.append({"sample": s, "t": fib.t, "points": len(fib)})
        report.append(
            {"round": r, "adjoined": adjoined, "coverage": coverage(), "points": len(tower.top.space)}
        )
    return tower, report


def _lift(tower, e):
    """Pull an element from the stage it lives on up to the current top."""
    for k, st in enumerate(tower.stages):
        if st.space.token == e.space.token:
            return tower.pullback(k, len(tower), e)
    raise ValueError("element does not live on a tower stage")
