"""Polynomials over a finite-model algebra.

Coefficients are :class:`~algext.core.Element` objects; internally every
routine works on ``(degree+1, N)`` complex arrays so that all characters are
handled in one vectorised pass.
"""

from __future__ import annotations

import numpy as np

from .core import Element, same_space
from .errors import DegreeTooHigh

DEGREE_CAP = 8


def _stack(elements):
    return np.vstack([e.values for e in elements]) if elements else None


class MonicPoly:
    """``a_0 + a_1 x + ... + a_{n-1} x^{n-1} + x^n`` over a base algebra."""

    __slots__ = ("coeffs", "space", "_arr")

    def __init__(self, coeffs, cap=DEGREE_CAP):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a monic polynomial needs degree n >= 1")
        if len(coeffs) > cap:
            raise ValueError(f"degree {len(coeffs)} exceeds the cap {cap}")
        self.space = same_space(*coeffs)
        self.coeffs = coeffs
        arr = _stack(coeffs)
        arr.setflags(write=False)
        self._arr = arr

    @classmethod
    def from_roots(cls, roots, cap=DEGREE_CAP):
        """Monic polynomial ``prod (x - r)`` for a list of root Elements."""
        space = same_space(*roots)
        acc = np.ones((1, len(space)), dtype=complex)
        for r in roots:
            nxt = np.zeros((acc.shape[0] + 1, acc.shape[1]), dtype=complex)
            nxt[1:] += acc
            nxt[:-1] -= acc * r.values
            acc = nxt
        return cls([Element(space, row) for row in acc[:-1]], cap=cap)

    @classmethod
    def from_array(cls, space, arr, cap=DEGREE_CAP):
        return cls([Element(space, row) for row in np.asarray(arr)], cap=cap)

    @property
    def degree(self):
        return len(self.coeffs)

    @property
    def array(self):
        """Coefficients ``a_0..a_{n-1}`` as an ``(n, N)`` array."""
        return self._arr

    def full_array(self):
        """Coefficients ``a_0..a_{n-1}, 1`` as an ``(n+1, N)`` array."""
        return np.vstack([self._arr, np.ones((1, self._arr.shape[1]))])

    def at(self, k):
        """Coefficients at character ``k`` (low to high, leading 1 included)."""
        return self.full_array()[:, k]

    def __call__(self, y):
        """Evaluate at an element (Horner) of any algebra supporting + and *."""
        acc = y * 0 + 1
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc

    def eval_at(self, lam):
        """Evaluate per character at complex points ``lam`` of shape ``(N,)`` or ``(N, m)``."""
        return horner(self.full_array(), lam)

    def norms(self):
        return np.max(np.abs(self._arr), axis=1)

    def to_json(self):
        return {"monic": True, "coeffs": [c.to_json() for c in self.coeffs]}

    def __repr__(self):
        return f"MonicPoly(degree={self.degree}, N={self._arr.shape[1]})"


class PolyOverA:
    """A general polynomial ``b_0 + b_1 x + ... + b_m x^m``."""

    __slots__ = ("coeffs", "space", "_arr")

    def __init__(self, coeffs, space=None):
        coeffs = list(coeffs)
        if not coeffs:
            if space is None:
                raise ValueError("empty polynomial needs an explicit space")
            coeffs = [Element.const(space, 0)]
        self.space = same_space(*coeffs)
        while len(coeffs) > 1 and not np.any(coeffs[-1].values):
            coeffs.pop()
        self.coeffs = tuple(coeffs)
        arr = _stack(self.coeffs)
        arr.setflags(write=False)
        self._arr = arr

    @classmethod
    def from_array(cls, space, arr):
        return cls([Element(space, row) for row in np.asarray(arr)])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def array(self):
        return self._arr

    def padded(self, length):
        if length < len(self.coeffs):
            raise DegreeTooHigh(f"polynomial of degree {self.degree} does not fit {length} slots")
        out = np.zeros((length, self._arr.shape[1]), dtype=complex)
        out[: len(self.coeffs)] = self._arr
        return out

    def eval_at(self, lam):
        return horner(self._arr, lam)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyOverA.from_array(self.space, self.padded(n) + other.padded(n))

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyOverA.from_array(self.space, self.padded(n) - other.padded(n))

    def __mul__(self, other):
        if isinstance(other, PolyOverA):
            same_space(self.coeffs[0], other.coeffs[0])
            return PolyOverA.from_array(self.space, polymul_arrays(self._arr, other._arr))
        return PolyOverA([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def __repr__(self):
        return f"PolyOverA(degree={self.degree})"


def horner(coeffs, lam):
    """Evaluate ``sum_k coeffs[k] * lam**k`` per character.

    ``coeffs`` has shape ``(d+1, N)``; ``lam`` has shape ``(N,)`` or
    ``(N, m)`` (several points per character).
    """
    lam = np.asarray(lam, dtype=complex)
    extra = lam.ndim - 1
    acc = np.zeros(lam.shape, dtype=complex)
    for c in coeffs[::-1]:
        acc = acc * lam + c.reshape(c.shape + (1,) * extra)
    return acc


def polymul_arrays(p, q):
    out = np.zeros((p.shape[0] + q.shape[0] - 1, p.shape[1]), dtype=complex)
    for i in range(p.shape[0]):
        out[i : i + q.shape[0]] += p[i] * q
    return out


def divmod_arrays(beta, alpha_low):
    """Synthetic division of ``beta`` by the monic polynomial with low coefficients ``alpha_low``."""
    n = alpha_low.shape[0]
    m = beta.shape[0] - 1
    rem = np.array(beta, dtype=complex, copy=True)
    if m < n:
        return np.zeros((1, beta.shape[1]), dtype=complex), rem
    quo = np.zeros((m - n + 1, beta.shape[1]), dtype=complex)
    for k in range(m, n - 1, -1):
        q = rem[k].copy()
        quo[k - n] = q
        rem[k - n : k] -= q * alpha_low
        rem[k] = 0
    return quo, rem[:n]


def monic_divmod(beta, alpha):
    """Return ``(q, r)`` with ``beta = q*alpha + r`` and ``deg r < n``."""
    same_space(beta.coeffs[0], alpha.coeffs[0])
    quo, rem = divmod_arrays(beta.array, alpha.array)
    return PolyOverA.from_array(alpha.space, quo), PolyOverA.from_array(alpha.space, rem)


def sylvester_stack(alpha_low, beta):
    """Batched ``(N, 2n-1, 2n-1)`` resultant matrices.

    The first ``n-1`` rows carry ``1, a_{n-1}, ..., a_0`` shifted one column
    per row; the last ``n`` rows carry ``b_{n-1}, ..., b_0`` likewise.
    """
    n, N = alpha_low.shape
    size = 2 * n - 1
    mats = np.zeros((N, size, size), dtype=complex)
    arow = np.vstack([np.ones((1, N)), alpha_low[::-1]]).T  # 1, a_{n-1}, .., a_0
    brow = beta[::-1].T  # b_{n-1}, .., b_0
    for i in range(n - 1):
        mats[:, i, i : i + n + 1] = arow
    for j in range(n):
        mats[:, n - 1 + j, j : j + n] = brow
    return mats


def resultant_array(alpha_low, beta):
    n = alpha_low.shape[0]
    if beta.shape[0] > n:
        if np.any(beta[n:]):
            raise DegreeTooHigh(f"resultant needs deg beta <= {n - 1}")
        beta = beta[:n]
    if beta.shape[0] < n:
        beta = np.vstack([beta, np.zeros((n - beta.shape[0], beta.shape[1]))])
    return np.linalg.det(sylvester_stack(alpha_low, beta))


def resultant(alpha, beta):
    """Resultant of monic ``alpha`` (degree n) and ``beta`` (degree <= n-1), per character.

    Equals the product of ``beta`` over the roots of ``alpha`` with
    multiplicity, without any sign factor.
    """
    if isinstance(beta, PolyOverA):
        same_space(beta.coeffs[0], alpha.coeffs[0])
        arr = beta.array
    else:
        arr = _stack(list(beta))
    if arr.shape[0] > alpha.degree:
        raise DegreeTooHigh(f"deg beta = {arr.shape[0] - 1} >= n = {alpha.degree}")
    return Element(alpha.space, resultant_array(alpha.array, arr))


def resultant_poly_coeffs_array(alpha_low, b_rest):
    """Coefficients ``p_0..p_{n-1}`` of ``P(c) = res(alpha, c + b_1 x + ...)``.

    ``P`` is monic of degree n in ``c``. It is recovered by evaluating the
    resultant at the (n+1)-th roots of unity and inverting the DFT, which is
    perfectly conditioned (integer nodes 0..n are not).
    """
    n, N = alpha_low.shape
    m = n + 1
    nodes = np.exp(2j * np.pi * np.arange(m) / m)
    vals = np.empty((m, N), dtype=complex)
    beta = np.zeros((n, N), dtype=complex)
    beta[1 : 1 + b_rest.shape[0]] = b_rest
    for k, c in enumerate(nodes):
        beta[0] = c
        vals[k] = resultant_array(alpha_low, beta)
    coeffs = np.fft.fft(vals, axis=0) / m
    return coeffs[:n]


def resultant_as_poly_in_c(alpha, b_rest):
    """Elements ``p_0..p_{n-1}`` with ``res(alpha, c + sum b_k x^k) = P(c)``."""
    n = alpha.degree
    b_rest = list(b_rest)
    if len(b_rest) > n - 1:
        raise DegreeTooHigh("expected at most n-1 higher coefficients")
    arr = _stack(b_rest) if b_rest else np.zeros((0, len(alpha.space)), dtype=complex)
    p = resultant_poly_coeffs_array(alpha.array, arr)
    return [Element(alpha.space, row) for row in p]


def newton_sums_array(alpha_low, count):
    """Power sums ``s_0..s_count`` of the roots, from the coefficient recursion."""
    n, N = alpha_low.shape
    a = alpha_low
    s = np.zeros((count + 1, N), dtype=complex)
    s[0] = n
    for k in range(1, count + 1):
        if k <= n:
            acc = k * a[n - k]
            for i in range(1, k):
                acc = acc + a[n - i] * s[k - i]
        else:
            acc = np.zeros(N, dtype=complex)
            for i in range(1, n + 1):
                acc = acc + a[n - i] * s[k - i]
        s[k] = -acc
    return s


def newton_sums(alpha, count):
    """Newton sums ``s_0..s_count`` as Elements; ``s_0`` is exactly ``n``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return [Element(alpha.space, row) for row in newton_sums_array(alpha.array, count)]


def rescale_poly(alpha, mu):
    """``alpha^mu``: coefficient k becomes ``mu**(n-k) * a_k``; roots scale by ``mu``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    n = alpha.degree
    return MonicPoly([c * (mu ** (n - k)) for k, c in enumerate(alpha.coeffs)])


def companion_stack(alpha_low):
    n, N = alpha_low.shape
    comp = np.zeros((N, n, n), dtype=complex)
    if n > 1:
        idx = np.arange(n - 1)
        comp[:, idx + 1, idx] = 1.0
    comp[:, :, n - 1] = -alpha_low.T
    return comp


def roots_array(alpha_low):
    """Roots per character, shape ``(N, n)``, via companion-matrix eigenvalues."""
    n = alpha_low.shape[0]
    if n == 1:
        return -alpha_low.T.copy()
    return np.linalg.eigvals(companion_stack(alpha_low))


def cluster_tolerance(coeff_column):
    return 1e-7 * (1.0 + float(np.max(np.abs(coeff_column))))


def cluster_roots(roots, tol):
    """Group roots closer than ``tol`` (single linkage).

    Returns ``[(center, multiplicity), ...]`` sorted by ``(re, im)``; the
    center is the cluster mean.
    """
    roots = list(roots)
    groups = []
    for r in roots:
        hit = [g for g in groups if any(abs(r - s) <= tol for s in g)]
        merged = [r]
        for g in hit:
            merged.extend(g)
            groups.remove(g)
        groups.append(merged)
    out = [(complex(np.mean(g)), len(g)) for g in groups]
    out.sort(key=lambda p: (round(p[0].real, 12), round(p[0].imag, 12)))
    return out
