"""Independent reference implementations used as test oracles."""

import math
import random
from fractions import Fraction
from itertools import product

import mpmath

# dense polynomials as {exponent tuple: Fraction}


def p_add(a, b, sign=1):
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + sign * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def p_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def p_diff(a, j):
    out = {}
    for e, c in a.items():
        if e[j]:
            f = list(e)
            f[j] -= 1
            out[tuple(f)] = c * e[j]
    return out


def p_eval(a, pt):
    return sum((c * math.prod(Fraction(x) ** k for x, k in zip(pt, e)) for e, c in a.items()), Fraction(0))


def bracket(A, B):
    n = len(A)
    out = []
    for k in range(n):
        acc = {}
        for j in range(n):
            acc = p_add(acc, p_mul(A[j], p_diff(B[k], j)))
            acc = p_add(acc, p_mul(B[j], p_diff(A[k], j)), -1)
        out.append(acc)
    return out


def rank(rows):
    m = [list(r) for r in rows]
    r = 0
    if not m:
        return 0
    cols = len(m[0])
    for c in range(cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    return r


def all_words_depth(fields, point, max_len):
    """Least length at which every bracketing of every word spans at the point."""
    n = len(point)
    trees = {1: list(fields)}
    rows = [[p_eval(c, point) for c in X] for X in fields]
    if rank(rows) == n:
        return 1
    for ell in range(2, max_len + 1):
        trees[ell] = [bracket(a, b) for i in range(1, ell) for a in trees[i] for b in trees[ell - i]]
        rows += [[p_eval(c, point) for c in X] for X in trees[ell]]
        if rank(rows) == n:
            return ell
    return None


def random_field_instance(rng: random.Random, max_dim=3, max_deg=2):
    n = rng.randint(1, max_dim)
    k = rng.randint(1, 3)
    exps = [e for e in product(range(max_deg + 1), repeat=n) if sum(e) <= max_deg]
    fields = []
    for _ in range(k):
        comps = []
        for _ in range(n):
            poly = {}
            for _ in range(rng.randint(0, 2)):
                e = rng.choice(exps)
                c = rng.randint(-2, 2)
                if c:
                    poly = p_add(poly, {e: Fraction(c)})
            comps.append(poly)
        fields.append(comps)
    point = tuple(rng.randint(-1, 1) for _ in range(n))
    return n, fields, point


def weierstrass_sinh(x):
    """prod (1 + x^2/p^2) = sinh(pi x)/(pi x)."""
    x = mpmath.mpf(x)
    return mpmath.sinh(mpmath.pi * x) / (mpmath.pi * x)
