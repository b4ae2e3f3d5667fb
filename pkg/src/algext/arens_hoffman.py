"""Arens-Hoffman extensions ``A[x]/(alpha(x))`` over a finite-model base."""

from __future__ import annotations

from numbers import Number

import numpy as np

from .core import Element, same_space, sup_norm
from .errors import MixedExtensions, NotARoot, NotInvertible
from .poly import (
    MonicPoly,
    PolyOverA,
    divmod_arrays,
    horner,
    polymul_arrays,
    resultant_array,
    roots_array,
)

PARAM_TOL = 1e-12
EUCLID_PIVOT = 1e-12
INVERT_TOL = 1e-9


def _condition(t, n, norms):
    return t**n - sum(c * t**k for k, c in enumerate(norms))


def min_norm_param(alpha, floor=1.0):
    """Smallest ``t >= floor`` with ``t^n >= sum ||a_k|| t^k`` (bisection to 1e-12)."""
    if floor < 1:
        raise ValueError("floor must be >= 1")
    norms = [float(v) for v in alpha.norms()]
    n = alpha.degree
    if _condition(floor, n, norms) >= -PARAM_TOL:
        return float(floor)
    lo, hi = float(floor), float(floor) + sum(norms)
    while hi - lo > PARAM_TOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _condition(mid, n, norms) >= -PARAM_TOL:
            hi = mid
        else:
            lo = mid
    return hi


class AHExtension:
    """The Arens-Hoffman extension ``A_alpha`` with norm parameter ``t``."""

    __slots__ = ("alpha", "t", "space")

    def __init__(self, alpha, t=None):
        if t is None:
            t = min_norm_param(alpha, 1.0)
        t = float(t)
        if t < 1:
            raise ValueError("norm parameter must be >= 1")
        slack = _condition(t, alpha.degree, alpha.norms())
        if slack < -PARAM_TOL * max(1.0, t**alpha.degree):
            raise ValueError(f"t={t} violates t^n >= sum ||a_k|| t^k (slack {slack:.3e})")
        self.alpha = alpha
        self.t = t
        self.space = alpha.space

    @property
    def degree(self):
        return self.alpha.degree

    def embed(self, a):
        if isinstance(a, Number):
            a = Element.const(self.space, a)
        same_space(a, self.alpha.coeffs[0])
        zero = np.zeros(len(self.space), dtype=complex)
        return AHElement(self, [a] + [Element(self.space, zero)] * (self.degree - 1))

    def one(self):
        return self.embed(1.0)

    def xbar(self):
        """The coset of ``x``."""
        if self.degree == 1:
            return self.embed(-self.alpha.coeffs[0])
        coeffs = np.zeros((self.degree, len(self.space)), dtype=complex)
        coeffs[1] = 1.0
        return AHElement.from_array(self, coeffs)

    def reduce(self, beta):
        """Canonical representative of a polynomial (PolyOverA or array) of any degree."""
        arr = beta.array if isinstance(beta, PolyOverA) else np.asarray(beta, dtype=complex)
        _, rem = divmod_arrays(arr, self.alpha.array)
        out = np.zeros((self.degree, len(self.space)), dtype=complex)
        out[: rem.shape[0]] = rem[: self.degree]
        return AHElement.from_array(self, out)

    def __repr__(self):
        return f"AHExtension(n={self.degree}, t={self.t:.6g})"


class AHElement:
    """``b_0 + b_1 xbar + ... + b_{n-1} xbar^{n-1}`` in an Arens-Hoffman extension."""

    __slots__ = ("ext", "coeffs", "_arr")

    def __init__(self, ext, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != ext.degree:
            raise ValueError(f"expected {ext.degree} coefficients, got {len(coeffs)}")
        same_space(ext.alpha.coeffs[0], *coeffs)
        self.ext = ext
        self.coeffs = coeffs
        arr = np.vstack([c.values for c in coeffs])
        arr.setflags(write=False)
        self._arr = arr

    @classmethod
    def from_array(cls, ext, arr):
        return cls(ext, [Element(ext.space, row) for row in np.asarray(arr)])

    @property
    def array(self):
        return self._arr

    def _check(self, other):
        if not isinstance(other, AHElement) or other.ext is not self.ext:
            raise MixedExtensions("operands belong to different extensions")

    def __add__(self, other):
        if isinstance(other, (Number, Element)):
            other = self.ext.embed(other)
        self._check(other)
        return AHElement.from_array(self.ext, self._arr + other._arr)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (Number, Element)):
            other = self.ext.embed(other)
        self._check(other)
        return AHElement.from_array(self.ext, self._arr - other._arr)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return AHElement.from_array(self.ext, -self._arr)

    def __mul__(self, other):
        if isinstance(other, Number):
            return AHElement.from_array(self.ext, self._arr * complex(other))
        if isinstance(other, Element):
            same_space(other, self.coeffs[0])
            return AHElement.from_array(self.ext, self._arr * other.values)
        return ah_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return ah_invert(self) ** (-k)
        acc = self.ext.one()
        base = self
        while k:
            if k & 1:
                acc = ah_mul(acc, base)
            base = ah_mul(base, base)
            k >>= 1
        return acc

    def norm(self):
        return ah_norm(self)

    def as_poly(self):
        return PolyOverA(list(self.coeffs))

    def evaluate(self, lam):
        """``sum_k b_k(omega) lam^k`` per character; ``lam`` is ``(N,)`` or ``(N, m)``."""
        return horner(self._arr, lam)

    def to_json(self, extension_id="ext0"):
        return {"extension": extension_id, "coeffs": [c.to_json() for c in self.coeffs]}

    def __repr__(self):
        return f"AHElement(n={self.ext.degree}, norm={ah_norm(self):.6g})"


def ah_mul(u, v):
    u._check(v)
    prod = polymul_arrays(u._arr, v._arr)
    return u.ext.reduce(prod)


def ah_norm(u):
    t = u.ext.t
    return float(sum(sup_norm(c) * t**k for k, c in enumerate(u.coeffs)))


def fibre_min(u):
    """Smallest ``|u^(omega, lambda)|`` over the fibration, with its location.

    Returns ``(modulus, character, root)``.
    """
    roots = roots_array(u.ext.alpha.array)
    vals = np.abs(u.evaluate(roots))
    k, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    return float(vals[k, j]), int(k), complex(roots[k, j])


def invert_tolerance(u):
    return INVERT_TOL * max(1.0, ah_norm(u))


def ah_resultant(u):
    return Element(u.ext.space, resultant_array(u.ext.alpha.array, u._arr))


def _trim(p, scale):
    k = len(p)
    while k > 0 and abs(p[k - 1]) <= EUCLID_PIVOT * scale:
        k -= 1
    return p[:k]


def _pdivmod(a, b):
    """Division of complex coefficient vectors (low to high); ``b`` nonzero leading."""
    a = a.astype(complex).copy()
    db = len(b) - 1
    if len(a) - 1 < db:
        return np.zeros(1, dtype=complex), a
    q = np.zeros(len(a) - db, dtype=complex)
    lead = b[-1]
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] / lead
        q[k - db] = c
        a[k - db : k + 1] -= c * b
    return q, a[:db] if db > 0 else np.zeros(0, dtype=complex)


def _pmul(a, b):
    return np.convolve(a, b)


def _psub(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[: len(a)] += a
    out[: len(b)] -= b
    return out


def euclid_inverse(u_coeffs, alpha_full):
    """Inverse of ``u`` modulo monic ``alpha`` over C by the extended Euclidean algorithm.

    Returns the coefficient vector of length ``n``, or ``None`` when the
    polynomials are not coprime (a remainder collapses below the pivot).
    """
    n = len(alpha_full) - 1
    scale = max(1.0, float(np.max(np.abs(u_coeffs))), float(np.max(np.abs(alpha_full))))
    r0 = np.asarray(alpha_full, dtype=complex)
    r1 = _trim(np.asarray(u_coeffs, dtype=complex), scale)
    s0 = np.zeros(1, dtype=complex)
    s1 = np.ones(1, dtype=complex)
    if len(r1) == 0:
        return None
    while len(r1) > 1:
        lead = r1[-1]
        r1n, s1n = r1 / lead, s1 / lead
        q, rem = _pdivmod(r0, r1n)
        rem = _trim(rem, scale)
        s_next = _psub(s0, _pmul(q, s1n))
        r0, s0 = r1n, s1n
        r1, s1 = rem, s_next
        if len(r1) == 0:
            return None
    inv = s1 / r1[0]
    _, red = _pdivmod(inv, np.asarray(alpha_full, dtype=complex)) if len(inv) > n else (None, inv)
    out = np.zeros(n, dtype=complex)
    out[: len(red)] = red[:n]
    return out


def ah_invert(u):
    """Inverse in ``A_alpha`` via per-character extended Euclid.

    Raises :class:`NotInvertible` carrying the character and fibre root
    where the Gelfand transform of ``u`` vanishes.
    """
    ext = u.ext
    mod, k, root = fibre_min(u)
    if mod <= invert_tolerance(u):
        raise NotInvertible(k, complex(u.evaluate(np.full(len(ext.space), root))[k]), root=root)
    full = ext.alpha.full_array()
    out = np.zeros_like(u.array)
    for w in range(len(ext.space)):
        inv = euclid_inverse(u.array[:, w], full[:, w])
        if inv is None:
            raise NotInvertible(k, mod, root=root)
        out[:, w] = inv
    v = AHElement.from_array(ext, out)
    # one Newton step v <- v(2 - uv) polishes the Euclid roundoff
    v = v * (2 - ah_mul(u, v))
    return v


def ah_invert_lagrange(u):
    """Cross-check inverse through interpolation of ``1/u^`` on simple fibres."""
    ext = u.ext
    roots = roots_array(ext.alpha.array)
    vals = u.evaluate(roots)
    out = np.zeros_like(u.array)
    for w in range(len(ext.space)):
        vander = np.vander(roots[w], ext.degree, increasing=True)
        out[:, w] = np.linalg.solve(vander, 1.0 / vals[w])
    return AHElement.from_array(ext, out)


def universal_morphism(ext, theta, y, tol=1e-9):
    """The unique unital homomorphism sending ``xbar`` to ``y`` and extending ``theta``.

    ``theta`` maps base Elements into a target algebra whose elements support
    ``+``, ``*`` and ``.norm()``; ``y`` must be a root of ``theta(alpha)``.
    """
    images = [theta(a) for a in ext.alpha.coeffs]
    acc = y * 0 + 1
    for c in reversed(images):
        acc = acc * y + c
    if acc.norm() > tol:
        raise NotARoot(f"theta(alpha)(y) has norm {acc.norm():.3e}")

    def phi(u):
        if u.ext is not ext:
            raise MixedExtensions("element is not in the source extension")
        out = theta(u.coeffs[-1])
        for c in reversed(u.coeffs[:-1]):
            out = out * y + theta(c)
        return out

    return phi


def extension_from_roots(roots, t=None):
    return AHExtension(MonicPoly.from_roots(roots), t)
