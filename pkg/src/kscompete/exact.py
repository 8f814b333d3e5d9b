"""Compensated 3x3 determinants and Cramer solves.

Products are split into exact pairs (Dekker's two-product) and the signed
terms are summed with ``math.fsum``, so the determinant is the correctly
rounded value of the exact determinant of the floating-point entries, barring
overflow or underflow. This matters when large diffusion products cancel.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_product(a: float, b: float) -> tuple[float, float]:
    """Return (p, e) with p = fl(a*b) and p + e == a*b exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _sign(perm: tuple[int, ...]) -> int:
    s = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


_PERMS = [(perm, _sign(perm)) for perm in permutations(range(3))]


def det3(m) -> float:
    """Correctly rounded determinant of a 3x3 matrix."""
    a = [[float(x) for x in row] for row in m]
    terms: list[float] = []
    for perm, sgn in _PERMS:
        p, e = two_product(a[0][perm[0]], a[1][perm[1]])
        c = a[2][perm[2]]
        for part in (p, e):
            q, f = two_product(part, c)
            terms.append(sgn * q)
            terms.append(sgn * f)
    return math.fsum(terms)


def cramer3(m, rhs) -> tuple[np.ndarray, float]:
    """Solve a 3x3 system by Cramer's rule; returns (solution, det)."""
    a = np.asarray(m, dtype=float)
    b = np.asarray(rhs, dtype=float)
    d = det3(a)
    if d == 0.0:
        raise ZeroDivisionError("singular 3x3 system")
    x = np.empty(3)
    for i in range(3):
        ai = a.copy()
        ai[:, i] = b
        x[i] = det3(ai) / d
    return x, d


def row_norm_product(m) -> float:
    a = np.asarray(m, dtype=float)
    return float(np.prod(np.linalg.norm(a, axis=1)))
