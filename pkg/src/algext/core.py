"""Finite models of commutative unital algebras.

A base algebra is represented by complex functions on a finite set of
characters, with pointwise operations and the supremum norm. Every object
here is immutable once built.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from numbers import Number

import networkx as nx
import numpy as np

from .errors import LogOnCut, NotInvertible, SpaceMismatch

ZERO_TOL = 1e-12
SPECTRUM_TOL = 1e-9
CUT_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class CharacterSpace:
    """A finite character space.

    Parameters
    ----------
    points : sequence of str
        Distinct character identifiers.
    coords : array_like, optional
        Either one complex number per point or an ``(N, d)`` real array.
    edges : sequence of (i, j) or (i, j, loop)
        Adjacency as index pairs. Edges flagged ``loop=True`` must assemble
        into simple cycles; those cycles are the declared loops.
    """

    __slots__ = ("_points", "_coords", "_edges", "_token", "_loops", "_index")

    def __init__(self, points, coords=None, edges=()):
        points = tuple(str(p) for p in points)
        if len(set(points)) != len(points):
            raise ValueError("character identifiers must be distinct")
        if not points:
            raise ValueError("a character space needs at least one point")
        n = len(points)
        if coords is not None:
            coords = np.asarray(coords)
            if coords.shape[0] != n:
                raise ValueError("coords must cover every point")
            if not np.iscomplexobj(coords):
                coords = coords.astype(float)
            coords = _frozen(coords)
        norm_edges = []
        seen = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            loop = bool(e[2]) if len(e) > 2 else False
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad edge {e!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            norm_edges.append((i, j, loop))
        self._points = points
        self._coords = coords
        self._edges = tuple(norm_edges)
        self._index = {p: k for k, p in enumerate(points)}
        self._loops = self._assemble_loops()
        self._token = self._compute_token()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def interval(cls, n, lo=0.0, hi=1.0):
        """``n`` equally spaced parameters on ``[lo, hi]`` joined as a path."""
        t = np.linspace(lo, hi, n)
        edges = [(k, k + 1) for k in range(n - 1)]
        return cls([f"t{k}" for k in range(n)], coords=t, edges=edges)

    @classmethod
    def circle(cls, n, radius=1.0, center=0.0):
        """``n`` points of a circle, declared as one loop (counterclockwise)."""
        theta = 2 * np.pi * np.arange(n) / n
        z = center + radius * np.exp(1j * theta)
        edges = [(k, (k + 1) % n, True) for k in range(n)]
        return cls([f"z{k}" for k in range(n)], coords=z, edges=edges)

    @classmethod
    def plane_grid(cls, nx_, ny, xlim=(-1.0, 1.0), ylim=(-1.0, 1.0)):
        xs = np.linspace(xlim[0], xlim[1], nx_)
        ys = np.linspace(ylim[0], ylim[1], ny)
        pts, coords, edges = [], [], []
        for r, y in enumerate(ys):
            for c, x in enumerate(xs):
                pts.append(f"g{r}_{c}")
                coords.append(complex(x, y))
        for r in range(ny):
            for c in range(nx_):
                k = r * nx_ + c
                if c + 1 < nx_:
                    edges.append((k, k + 1))
                if r + 1 < ny:
                    edges.append((k, k + nx_))
        return cls(pts, coords=np.array(coords), edges=edges)

    # -- properties -----------------------------------------------------------

    @property
    def points(self):
        return self._points

    @property
    def coords(self):
        return self._coords

    @property
    def edges(self):
        return self._edges

    @property
    def loops(self):
        """Declared loops as ordered tuples of point indices."""
        return self._loops

    @property
    def token(self):
        return self._token

    def __len__(self):
        return len(self._points)

    def index(self, point_id):
        return self._index[point_id]

    def __eq__(self, other):
        return isinstance(other, CharacterSpace) and other._token == self._token

    def __hash__(self):
        return hash(self._token)

    def __repr__(self):
        return f"CharacterSpace(n={len(self)}, edges={len(self._edges)}, loops={len(self._loops)})"

    def graph(self):
        g = nx.Graph()
        g.add_nodes_from(range(len(self)))
        g.add_edges_from((i, j) for i, j, _ in self._edges)
        return g

    def neighbors(self):
        nbrs = [[] for _ in range(len(self))]
        for i, j, _ in self._edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        return [sorted(v) for v in nbrs]

    def complex_coords(self):
        """Coordinates as complex numbers (real 1-d coords are promoted)."""
        if self._coords is None:
            raise ValueError("space has no coordinates")
        c = self._coords
        if c.ndim == 1:
            return c.astype(complex)
        if c.shape[1] == 2:
            return c[:, 0] + 1j * c[:, 1]
        raise ValueError("coordinates are not planar")

    # -- internals ------------------------------------------------------------

    def _assemble_loops(self):
        g = nx.Graph()
        g.add_edges_from((i, j) for i, j, loop in self._edges if loop)
        loops = []
        for comp in sorted(nx.connected_components(g), key=min):
            sub = g.subgraph(comp)
            if any(d != 2 for _, d in sub.degree()) or len(comp) < 3:
                raise ValueError(f"loop edges on {sorted(comp)} do not form a simple cycle")
            start = min(comp)
            # orientation follows the declared direction of the edge leaving start
            nxt = None
            for i, j, loop in self._edges:
                if loop and i == start:
                    nxt = j
                    break
            if nxt is None:
                nxt = min(sub.neighbors(start))
            order = [start, nxt]
            while True:
                a, b = order[-2], order[-1]
                c = [v for v in sub.neighbors(b) if v != a][0]
                if c == start:
                    break
                order.append(c)
            loops.append(tuple(order))
        return tuple(loops)

    def _compute_token(self):
        h = hashlib.sha1()
        h.update(json.dumps(self._points).encode())
        if self._coords is not None:
            h.update(np.ascontiguousarray(self._coords).tobytes())
            h.update(str(self._coords.dtype).encode())
        h.update(json.dumps(self._edges).encode())
        return h.hexdigest()[:16]

    # -- serialization --------------------------------------------------------

    def to_json(self):
        out = {"points": list(self._points)}
        if self._coords is not None:
            if np.iscomplexobj(self._coords):
                out["coords"] = [[float(z.real), float(z.imag)] for z in self._coords]
                out["coord_kind"] = "complex"
            else:
                out["coords"] = self._coords.tolist()
                out["coord_kind"] = "real"
        out["adjacency"] = [{"pair": [i, j], "loop": loop} for i, j, loop in self._edges]
        return out

    @classmethod
    def from_json(cls, data):
        coords = data.get("coords")
        if coords is not None:
            kind = data.get("coord_kind", "real")
            if kind == "complex":
                coords = np.array([complex(re, im) for re, im in coords])
            else:
                coords = np.asarray(coords, dtype=float)
        edges = [(e["pair"][0], e["pair"][1], e.get("loop", False)) for e in data.get("adjacency", [])]
        return cls(data["points"], coords=coords, edges=edges)


class Element:
    """A complex function on a :class:`CharacterSpace`."""

    __slots__ = ("space", "values")
    __array_priority__ = 100

    def __init__(self, space, values):
        vals = np.asarray(values, dtype=complex)
        if vals.ndim == 0:
            vals = np.full(len(space), complex(vals))
        if vals.shape != (len(space),):
            raise ValueError(f"expected {len(space)} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("element values must be finite")
        self.space = space
        self.values = _frozen(vals)

    @classmethod
    def const(cls, space, c):
        return cls(space, np.full(len(space), complex(c)))

    @classmethod
    def coordinate(cls, space):
        return cls(space, space.complex_coords())

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"Element({np.array2string(self.values, precision=4, threshold=6)})"

    def _other(self, other):
        if isinstance(other, Element):
            if other.space.token != self.space.token:
                raise SpaceMismatch("elements live on different character spaces")
            return other.values
        if isinstance(other, Number):
            return complex(other)
        return NotImplemented

    def __add__(self, other):
        v = self._other(other)
        return NotImplemented if v is NotImplemented else Element(self.space, self.values + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        return NotImplemented if v is NotImplemented else Element(self.space, self.values - v)

    def __rsub__(self, other):
        v = self._other(other)
        return NotImplemented if v is NotImplemented else Element(self.space, v - self.values)

    def __mul__(self, other):
        v = self._other(other)
        return NotImplemented if v is NotImplemented else Element(self.space, self.values * v)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Element):
            return self * invert(other)
        if isinstance(other, Number):
            return Element(self.space, self.values / complex(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Number):
            return invert(self) * other
        return NotImplemented

    def __neg__(self):
        return Element(self.space, -self.values)

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return invert(self) ** (-k)
        return Element(self.space, self.values**k)

    def conj(self):
        return Element(self.space, self.values.conj())

    def norm(self):
        return sup_norm(self)

    def allclose(self, other, atol=1e-12):
        return bool(np.max(np.abs(self.values - self._other(other)), initial=0.0) <= atol)

    def to_json(self):
        return {"space": self.space.token, "values": [[float(z.real), float(z.imag)] for z in self.values]}

    @classmethod
    def from_json(cls, space, data):
        if "space" in data and data["space"] != space.token:
            raise SpaceMismatch("serialized element belongs to another space")
        return cls(space, np.array([complex(re, im) for re, im in data["values"]]))


def same_space(*elements):
    tok = elements[0].space.token
    for e in elements[1:]:
        if e.space.token != tok:
            raise SpaceMismatch("elements live on different character spaces")
    return elements[0].space


def sup_norm(e):
    return float(np.max(np.abs(e.values)))


def zero_tolerance(e):
    return ZERO_TOL * max(1.0, sup_norm(e))


def is_invertible(e):
    return bool(np.min(np.abs(e.values)) > zero_tolerance(e))


def invert(e):
    """Pointwise reciprocal; raises :class:`NotInvertible` on a (near) zero."""
    mods = np.abs(e.values)
    k = int(np.argmin(mods))
    if mods[k] <= zero_tolerance(e):
        raise NotInvertible(k, complex(e.values[k]))
    return Element(e.space, 1.0 / e.values)


def spectrum(e, tol=SPECTRUM_TOL):
    """Distinct values of ``e`` (deduplicated to ``tol``), in first-seen order."""
    out = []
    for v in e.values:
        if not any(abs(v - w) <= tol for w in out):
            out.append(complex(v))
    return out


def quasi_product(a, b):
    """The quasi-product ``a + b - ab``; ``0`` is its identity."""
    same_space(a, b)
    return a + b - a * b


def quasi_inverse(b):
    """The ``c`` with ``quasi_product(b, c) == 0``; needs ``1 - b`` invertible."""
    return 1 - invert(1 - b)


def exp_elem(e):
    return Element(e.space, np.exp(e.values))


def _cut_rotation(cut_angle):
    return np.exp(-1j * (cut_angle - np.pi)), cut_angle - np.pi


def log_principal(e, cut_angle=np.pi):
    """Pointwise logarithm with the branch cut along the ray at ``cut_angle``.

    The argument is taken in ``(cut_angle - 2*pi, cut_angle]``; the default
    cut is the nonpositive real axis.
    """
    rot, shift = _cut_rotation(cut_angle)
    w = e.values * rot
    dist = np.where(w.real <= 0, np.abs(w.imag), np.abs(w))
    bad = dist <= CUT_TOL * np.maximum(1.0, np.abs(e.values))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise LogOnCut(k, complex(e.values[k]))
    arg = np.angle(w) + shift
    return Element(e.space, np.log(np.abs(e.values)) + 1j * arg)


@dataclass(frozen=True)
class Unitized:
    """Element ``(a, lam)`` of the standard unitisation ``A + C``.

    Multiplication is ``(a, l)(b, m) = (ab + l b + m a, l m)`` and the norm
    is ``||a|| + |l|``.
    """

    a: Element
    lam: complex

    def __mul__(self, other):
        a, b = self.a, other.a
        return Unitized(a * b + self.lam * b + other.lam * a, self.lam * other.lam)

    def norm(self):
        return sup_norm(self.a) + abs(self.lam)

    def is_unit(self, tol=1e-12):
        return sup_norm(self.a) <= tol and abs(self.lam - 1) <= tol


def unitization_inverse(b, mu):
    """Inverse of ``(-mu*b, mu)`` built from the quasi-inverse of ``b``.

    Returns the pair ``(Unitized(-mu*b, mu), Unitized(-c/mu, 1/mu))`` where
    ``c`` is the quasi-inverse of ``b``.
    """
    if mu == 0:
        raise ValueError("mu must be nonzero")
    c = quasi_inverse(b)
    return Unitized(-mu * b, complex(mu)), Unitized(-(1 / mu) * c, 1 / complex(mu))


def argument_increments(values):
    """Principal argument increments around a closed sequence of nonzero values."""
    v = np.asarray(values, dtype=complex)
    return np.angle(np.roll(v, -1) / v)
