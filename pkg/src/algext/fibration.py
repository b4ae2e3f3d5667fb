"""Character spaces of Arens-Hoffman extensions.

The extension space is ``{(omega, lambda) : omega(alpha)(lambda) = 0}``. Two
views are kept: multiplicity-expanded (``n`` points per character, used by
averaging) and distinct-collapsed (used for topology and winding numbers).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment

from .arens_hoffman import AHElement
from .core import CharacterSpace, Element, argument_increments
from .errors import (
    AmbiguousMatching,
    CannotSeparate,
    DegenerateNeighborhood,
    IllConditioned,
    PointNotInFibration,
)
from .poly import cluster_roots, cluster_tolerance, horner, roots_array

MEMBERSHIP_TOL = 1e-7


class FibredSpace:
    """Root enumeration of ``alpha`` over every character of its base."""

    def __init__(self, alpha, fibres):
        self.alpha = alpha
        self.base = alpha.space
        self.fibres = tuple(tuple(f) for f in fibres)
        offsets = [0]
        for f in self.fibres:
            offsets.append(offsets[-1] + len(f))
        self._offsets = np.array(offsets)
        n = alpha.degree
        exp = np.empty((len(self.fibres), n), dtype=complex)
        for k, f in enumerate(self.fibres):
            exp[k] = [r for r, m in f for _ in range(m)]
        exp.setflags(write=False)
        self._expanded = exp
        self._space = None
        self._components = None

    @property
    def degree(self):
        return self.alpha.degree

    @property
    def expanded(self):
        """Roots repeated by multiplicity, shape ``(N, n)``."""
        return self._expanded

    def distinct_points(self):
        """List of ``(character, root_index, root, multiplicity)`` in global order."""
        return [(k, j, r, m) for k, f in enumerate(self.fibres) for j, (r, m) in enumerate(f)]

    def point_count(self, expanded=False):
        return len(self.fibres) * self.degree if expanded else int(self._offsets[-1])

    def global_index(self, character, root_index):
        return int(self._offsets[character] + root_index)

    def locate(self, g):
        k = int(np.searchsorted(self._offsets, g, side="right") - 1)
        return k, int(g - self._offsets[k])

    def projection(self):
        """Base character of each distinct point."""
        return np.repeat(np.arange(len(self.fibres)), np.diff(self._offsets))

    def distinct_roots(self):
        return np.array([r for f in self.fibres for r, _ in f], dtype=complex)

    def as_space(self):
        """The distinct-collapsed space with adjacency induced by sheet matching."""
        if self._space is None:
            self._space, self._components = _linked_space(self)
        return self._space

    def components(self):
        self.as_space()
        return self._components

    def pullback(self, e):
        """``e o pi`` on the distinct-collapsed space."""
        return Element(self.as_space(), e.values[self.projection()])

    def coordinate(self):
        """The fibre coordinate ``p(omega, lambda) = lambda`` on the collapsed space."""
        return Element(self.as_space(), self.distinct_roots())

    def transform(self, u):
        """Gelfand transform of an AHElement on the collapsed space."""
        proj = self.projection()
        lam = self.distinct_roots()
        vals = np.zeros(len(lam), dtype=complex)
        for k in range(u.array.shape[0] - 1, -1, -1):
            vals = vals * lam + u.array[k][proj]
        return Element(self.as_space(), vals)

    def to_rows(self):
        """Rows ``(character-id, re, im, multiplicity, sheet-id, component-id)``."""
        comp_of = {}
        for c, comp in enumerate(self.components()):
            for g in comp.points:
                comp_of[g] = c
        rows = []
        for k, j, r, m in self.distinct_points():
            g = self.global_index(k, j)
            rows.append((self.base.points[k], r.real, r.imag, m, j, comp_of.get(g, -1)))
        return rows


@dataclass(frozen=True)
class RootSeparation:
    per_character: np.ndarray
    minimum: float


@dataclass(frozen=True)
class LoopComponent:
    points: tuple
    cyclic: bool


@dataclass(frozen=True)
class LocalTrivialization:
    center: int
    V: frozenset
    W: tuple  # one frozenset of global distinct-point indices per distinct root at center
    delta: float
    rho: float


def build_fibration(alpha, base=None):
    """Enumerate ``(root, multiplicity)`` per character, sorted by ``(re, im)``."""
    if base is not None and base.token != alpha.space.token:
        raise ValueError("alpha does not live on this base")
    raw = roots_array(alpha.array)
    full = alpha.full_array()
    fibres = []
    for k in range(raw.shape[0]):
        tol = cluster_tolerance(full[:, k])
        clusters = merge_multiple_roots(cluster_roots(raw[k], tol), full[:, k])
        centers = [c for c, _ in clusters]
        for a, b in itertools.combinations(centers, 2):
            if abs(a - b) < 10 * tol:
                raise IllConditioned(k)
        vals = horner(full[:, k : k + 1], np.array(centers))
        scale = 1.0 + float(np.max(np.abs(full[:, k])))
        if np.max(np.abs(vals)) > MEMBERSHIP_TOL * scale ** alpha.degree:
            raise IllConditioned(k, f"cluster centers are not roots at character {k}")
        fibres.append(clusters)
    return FibredSpace(alpha, fibres)


def merge_multiple_roots(clusters, coeffs, reach=1e-4, tol=1e-6):
    """Merge nearby clusters into one root of higher multiplicity when certified.

    A root of multiplicity ``m`` splits by about ``eps**(1/m)`` in floating
    point, so fixed-tolerance clustering misses ``m >= 3``. Two clusters
    within ``reach * scale`` merge when the merged centre annihilates the
    scaled derivatives ``alpha^{(j)}/j!`` for ``j < m``.
    """
    scale = 1.0 + float(np.max(np.abs(coeffs)))
    poly = np.polynomial.Polynomial(coeffs)
    clusters = list(clusters)
    while len(clusters) > 1:
        pairs = sorted(
            (abs(a[0] - b[0]), i, j)
            for (i, a), (j, b) in itertools.combinations(enumerate(clusters), 2)
        )
        merged = False
        for d, i, j in pairs:
            if d > reach * scale:
                break
            (a, ma), (b, mb) = clusters[i], clusters[j]
            m = ma + mb
            c = (a * ma + b * mb) / m
            deriv, fact, ok = poly, 1.0, True
            for q in range(m):
                if q:
                    deriv, fact = deriv.deriv(), fact * q
                if abs(deriv(c)) / fact > tol * scale**m:
                    ok = False
                    break
            if ok:
                clusters = [x for q, x in enumerate(clusters) if q not in (i, j)]
                clusters.append((complex(c), m))
                merged = True
                break
        if not merged:
            break
    clusters.sort(key=lambda p: (round(p[0].real, 12), round(p[0].imag, 12)))
    return clusters


def gelfand_ah(u, point, fib=None, tol=MEMBERSHIP_TOL):
    """Value of ``u^`` at the extension character ``(omega, lambda)``."""
    k, lam = point
    alpha = u.ext.alpha
    full = alpha.at(k)
    scale = 1.0 + float(np.max(np.abs(full)))
    if fib is not None:
        if not any(abs(lam - r) <= tol * scale for r, _ in fib.fibres[k]):
            raise PointNotInFibration(f"({k}, {lam}) is not in the fibration")
    elif abs(np.polynomial.polynomial.polyval(lam, full)) > tol * scale**alpha.degree:
        raise PointNotInFibration(f"({k}, {lam}) is not in the fibration")
    return complex(np.polynomial.polynomial.polyval(lam, u.array[:, k]))


def root_separation(fib):
    eps = np.full(len(fib.fibres), np.inf)
    for k, f in enumerate(fib.fibres):
        for (a, _), (b, _) in itertools.combinations(f, 2):
            eps[k] = min(eps[k], abs(a - b))
    return RootSeparation(eps, float(np.min(eps)))


def fibre_separator(fib, ext, center, chosen):
    """Lagrange element equal to 1 at the chosen fibre root over ``center`` and 0 at the others."""
    roots = [r for r, _ in fib.fibres[center]]
    lam1 = roots[chosen]
    poly = np.array([1.0 + 0j])
    for i, r in enumerate(roots):
        if i == chosen:
            continue
        poly = np.convolve(poly, np.array([-r, 1.0])) / (lam1 - r)
    N = len(ext.space)
    coeffs = np.zeros((ext.degree, N), dtype=complex)
    coeffs[: len(poly)] = poly[:, None]
    return AHElement.from_array(ext, coeffs)


def _counts_ok(roots_row, centers, mults, rho):
    """Each ball ``B(center_i, rho)`` holds exactly ``m_i`` of ``roots_row``."""
    d = np.abs(roots_row[None, :] - np.asarray(centers)[:, None])
    inside = d < rho
    if np.any(inside.sum(axis=0) != 1):
        return False
    return bool(np.all(inside.sum(axis=1) == np.asarray(mults)))


def certify_delta(center_coeffs, centers, mults, rho, rng, start=None, halvings=60):
    """Largest ``delta`` (by halving) for which perturbed roots stay in their balls.

    The check samples the ``3^n`` grid of box offsets ``{-1, 0, 1} * delta``
    (along ``(1+i)/sqrt2``) plus 100 random points of the complex
    ``delta``-polydisc.
    """
    n = len(center_coeffs)
    delta = rho if start is None else start
    grid = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n))) * (1 + 1j) / np.sqrt(2)
    for _ in range(halvings):
        rad = rng.random((100, n)) ** 0.5 * delta
        ang = rng.random((100, n)) * 2 * np.pi
        offsets = np.vstack([grid * delta, rad * np.exp(1j * ang)])
        low = center_coeffs[None, :] + offsets
        comp = np.zeros((len(low), n, n), dtype=complex)
        if n > 1:
            comp[:, np.arange(1, n), np.arange(n - 1)] = 1.0
        comp[:, :, n - 1] = -low
        roots = np.linalg.eigvals(comp) if n > 1 else -low
        if all(_counts_ok(r, centers, mults, rho) for r in roots):
            return delta
        delta *= 0.5
    raise DegenerateNeighborhood("no coefficient radius keeps the roots separated")


def local_trivialization(fib, center, rho0, seed=0):
    """Neighbourhood ``V`` of ``center`` over which the fibre splits into disjoint sheets.

    Returns a :class:`LocalTrivialization`; the postconditions (disjoint
    ``W_i`` each projecting onto ``V``, union equal to the preimage of ``V``)
    are replayed before returning.
    """
    base = fib.base
    if base.coords is None and not base.edges:
        raise DegenerateNeighborhood("base has neither coordinates nor adjacency")
    sep = root_separation(fib).per_character[center]
    if np.isfinite(sep) and not rho0 < sep / 3:
        raise CannotSeparate(f"rho0={rho0} must be < separation/3 = {sep / 3}")
    centers = [r for r, _ in fib.fibres[center]]
    mults = [m for _, m in fib.fibres[center]]
    low = fib.alpha.array
    rng = np.random.default_rng(seed)
    delta = certify_delta(low[:, center], centers, mults, rho0, rng)

    def admissible(k):
        if np.max(np.abs(low[:, k] - low[:, center])) >= delta:
            return False
        return _counts_ok(fib.expanded[k], centers, mults, rho0)

    if not admissible(center):
        raise DegenerateNeighborhood(f"character {center} fails its own trivialization")
    if base.edges:
        nbrs = base.neighbors()
        V = {center}
        stack = [center]
        while stack:
            k = stack.pop()
            for j in nbrs[k]:
                if j not in V and admissible(j):
                    V.add(j)
                    stack.append(j)
    else:
        V = {k for k in range(len(base)) if admissible(k)}
    W = []
    for c in centers:
        W.append(
            frozenset(
                fib.global_index(k, j)
                for k in V
                for j, (r, _) in enumerate(fib.fibres[k])
                if abs(r - c) < rho0
            )
        )
    _replay_trivialization(fib, V, W)
    return LocalTrivialization(center, frozenset(V), tuple(W), float(delta), float(rho0))


def _replay_trivialization(fib, V, W):
    proj = fib.projection()
    union = set()
    for w in W:
        if union & w:
            raise DegenerateNeighborhood("sheets overlap")
        union |= w
        if {int(proj[g]) for g in w} != set(V):
            raise DegenerateNeighborhood("a sheet does not project onto V")
    pre = {fib.global_index(k, j) for k in V for j in range(len(fib.fibres[k]))}
    if union != pre:
        raise DegenerateNeighborhood("sheets do not cover the preimage of V")


# -- sheet matching ------------------------------------------------------------


def _check_margin(pa, pb, links, edge):
    """Linked points must be closer than half the distance to any unlinked one."""
    for side_pts, other_pts, key in ((pa, pb, 0), (pb, pa, 1)):
        for i, p in enumerate(side_pts):
            linked = {l[1 - key] for l in links if l[key] == i}
            if not linked:
                continue
            far = [abs(p - other_pts[j]) for j in range(len(other_pts)) if j not in linked]
            near = max(abs(p - other_pts[j]) for j in linked)
            if far and not near < 0.5 * min(far):
                raise AmbiguousMatching(edge)


def match_with_multiplicity(pa, ma, pb, mb, edge=None):
    """Links between distinct roots of two adjacent fibres of equal total multiplicity."""
    ea = [i for i, m in enumerate(ma) for _ in range(m)]
    eb = [j for j, m in enumerate(mb) for _ in range(m)]
    cost = np.abs(np.asarray(pa)[ea][:, None] - np.asarray(pb)[eb][None, :])
    rows, cols = linear_sum_assignment(cost)
    links = sorted({(ea[r], eb[c]) for r, c in zip(rows, cols)})
    _check_margin(pa, pb, links, edge)
    return links


def match_mutual_nearest(pa, pb, edge=None, max_dist=np.inf):
    """Links between mutually nearest points (fibres of varying size, e.g. log branches)."""
    pa, pb = np.asarray(pa), np.asarray(pb)
    if len(pa) == 0 or len(pb) == 0:
        return []
    d = np.abs(pa[:, None] - pb[None, :])
    na = np.argmin(d, axis=1)
    nb = np.argmin(d, axis=0)
    links = [(i, int(na[i])) for i in range(len(pa)) if nb[na[i]] == i and d[i, na[i]] < max_dist]
    _check_margin(pa, pb, links, edge)
    return links


def oriented_cycle(g, nodes, coord):
    """Traverse a cycle from its smallest node, oriented so ``coord`` winds nonnegatively."""
    start = min(nodes)
    nb = sorted(g.neighbors(start))
    order = [start, nb[0]]
    while True:
        a, b = order[-2], order[-1]
        c = [v for v in g.neighbors(b) if v != a][0]
        if c == start:
            break
        order.append(c)
    vals = coord[order]
    if np.all(np.abs(vals) > 0) and np.sum(argument_increments(vals)) < -1e-9:
        order = [order[0]] + order[1:][::-1]
    return order


def components_from_edges(n_points, edges, coord):
    g = nx.Graph()
    g.add_nodes_from(range(n_points))
    g.add_edges_from(edges)
    comps = []
    for comp in sorted(nx.connected_components(g), key=min):
        sub = g.subgraph(comp)
        degs = [d for _, d in sub.degree()]
        if len(comp) >= 3 and all(d == 2 for d in degs):
            comps.append(LoopComponent(tuple(oriented_cycle(sub, comp, coord)), True))
        elif len(comp) >= 2 and max(degs) <= 2:
            ends = sorted(v for v, d in sub.degree() if d == 1)
            order = [ends[0]]
            prev = None
            while len(order) < len(comp):
                nxt = [v for v in sub.neighbors(order[-1]) if v != prev][0]
                prev = order[-1]
                order.append(nxt)
            comps.append(LoopComponent(tuple(order), False))
        else:
            comps.append(LoopComponent(tuple(sorted(comp)), False))
    return comps


def linked_space(base, point_ids, coords, parent, links, comps):
    """CharacterSpace over fibre points; cyclic components become declared loops."""
    cyc_edges = set()
    ordered_edges = []
    for comp in comps:
        if comp.cyclic:
            pts = comp.points
            for a, b in zip(pts, pts[1:] + pts[:1]):
                cyc_edges.add((min(a, b), max(a, b)))
                ordered_edges.append((a, b, True))
    for a, b in links:
        if (min(a, b), max(a, b)) not in cyc_edges:
            ordered_edges.append((a, b, False))
    return CharacterSpace(point_ids, coords=np.asarray(coords, dtype=complex), edges=ordered_edges)


def _linked_space(fib):
    base = fib.base
    links = []
    for i, j, _ in base.edges:
        fa, fb = fib.fibres[i], fib.fibres[j]
        pairs = match_with_multiplicity(
            [r for r, _ in fa], [m for _, m in fa], [r for r, _ in fb], [m for _, m in fb], edge=(i, j)
        )
        for a, b in pairs:
            links.append((fib.global_index(i, a), fib.global_index(j, b)))
    coord = fib.distinct_roots()
    comps = components_from_edges(fib.point_count(), links, coord)
    ids = [f"{base.points[k]}#{j}" for k, j, _, _ in fib.distinct_points()]
    space = linked_space(base, ids, coord, fib.projection(), links, comps)
    return space, comps


def loop_components(fib):
    """Connected components of the collapsed fibration; cyclic ones are flagged."""
    return fib.components()


__all__ = [
    "FibredSpace",
    "RootSeparation",
    "LoopComponent",
    "LocalTrivialization",
    "build_fibration",
    "gelfand_ah",
    "root_separation",
    "fibre_separator",
    "local_trivialization",
    "loop_components",
]
