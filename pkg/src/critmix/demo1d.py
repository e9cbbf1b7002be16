"""One-dimensional fold pedagogy: the cubic map p -> p^3 - 3p.

The map's critical points (+-1) and critical images (-+2) partition the
target line into regions with 3, 2 or 1 solutions of F(p) = q, which is
the whole inversion story in one dimension.
"""

from __future__ import annotations

import numpy as np

CRITICAL_POINTS = (-1.0, 1.0)
CRITICAL_IMAGES = (2.0, -2.0)  # F(-1), F(+1)


def cubic_map(p):
    return p ** 3 - 3.0 * p


def invert_cubic_map(q: float, bracket: tuple[float, float] = (-4.0, 4.0),
                     tol: float = 1e-12) -> list[float]:
    """All real solutions of p^3 - 3p = q inside the bracket, ascending.

    The map is monotone between its critical points, so bisection on each
    monotone piece finds every simple root; a root sitting exactly on a
    critical point (a double root, |q| = 2) is caught by direct residual
    check and reported once.
    """
    lo, hi = bracket
    cuts = sorted({lo, hi, *(c for c in CRITICAL_POINTS if lo < c < hi)})
    roots: list[float] = []

    def push(p):
        if not any(abs(p - r) <= 1e-9 for r in roots):
            roots.append(p)

    for cp in CRITICAL_POINTS:
        if lo <= cp <= hi and abs(cubic_map(cp) - q) <= tol * 100:
            push(cp)

    for a, b in zip(cuts[:-1], cuts[1:]):
        fa = cubic_map(a) - q
        fb = cubic_map(b) - q
        if abs(fa) <= tol:
            push(a)
            continue
        if abs(fb) <= tol:
            push(b)
            continue
        if np.sign(fa) == np.sign(fb):
            continue
        x0, x1 = a, b
        for _ in range(200):
            m = 0.5 * (x0 + x1)
            fm = cubic_map(m) - q
            if abs(fm) <= tol or (x1 - x0) < tol:
                break
            if np.sign(fm) == np.sign(fa):
                x0, fa = m, fm
            else:
                x1 = m
        push(0.5 * (x0 + x1))

    return sorted(roots)


def solution_count(q: float) -> int:
    return len(invert_cubic_map(q))
