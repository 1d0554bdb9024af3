"""Pure-Python versions of the inner loops in _kernels.pyx.

Results are bit-identical to the compiled versions: both round the orbit
point to double exactly once and call the same libm functions.
"""

import math

from .fixedpoint import int_to_limbs, limbs_to_int


def fill_orbit(alpha, x, count, frac_out, dist_out):
    L = len(alpha)
    mod = 1 << (64 * L)
    half = mod >> 1
    A = limbs_to_int(alpha)
    X = limbs_to_int(x)
    fracs = [0.0] * count
    dists = [0.0] * count
    for n in range(count):
        X += A
        if X >= mod:
            X -= mod
        fracs[n] = X / mod
        dists[n] = fracs[n] if X < half else (mod - X) / mod
    frac_out[:count] = fracs
    dist_out[:count] = dists
    x[:] = int_to_limbs(X, L)


def eval_terms(kind, frac, dist, a, b, length, two_e, out):
    log, sin, pi = math.log, math.sin, math.pi
    count = len(frac)
    if kind == 0:
        vals = [log(2.0 * sin(pi * d)) if d > 0.0 else -math.inf for d in dist[:count].tolist()]
    elif kind == 1:
        vals = [log(two_e * d) if d > 0.0 else -math.inf for d in dist[:count].tolist()]
    elif kind == 2:
        vals = [x - 0.5 for x in frac.tolist()]
    elif kind == 3:
        inside, outside = 1.0 - length, 0.0 - length
        vals = [inside if a <= x <= b else outside for x in frac.tolist()]
    else:
        raise ValueError("unknown summand kind")
    out[:count] = vals


def compensated_prefix(terms, out, s, c):
    vals = [0.0] * len(terms)
    for n, t in enumerate(terms.tolist()):
        u = s + t
        if abs(s) >= abs(t):
            c += (s - u) + t
        else:
            c += (t - u) + s
        s = u
        vals[n] = s + c
    out[: len(vals)] = vals
    return s, c
