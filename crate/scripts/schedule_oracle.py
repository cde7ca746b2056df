#!/usr/bin/env python3
"""Independent exact/high-precision evaluation of the sample-size constants.

Used to freeze expected values in the Rust tests.  Uses only fractions and
mpmath, never the Rust code paths.
"""
from fractions import Fraction
from math import comb
import mpmath

mpmath.mp.dps = 60


def eps1(r, b2, eps):
    return (eps / (6 * b2 * comb(r, 2))) ** 2


def const_c(r, h, b2, e1):
    k = comb(r, 2) * h * h
    return mpmath.sqrt(2) * k * (b2 / mpmath.sqrt(mpmath.mpf(e1.numerator) / e1.denominator)) ** (k - 1)


def n_tilde(r, h, b2, eps):
    """Exact: C^2 is rational, so the inequality can be squared without rounding."""
    e1 = eps1(r, b2, eps)
    k = comb(r, 2) * h * h
    c2 = 2 * k * k * (Fraction(b2 * b2) / e1) ** (k - 1)
    target2 = (Fraction(eps) / (2 * comb(r, 2))) ** 2
    ok = lambda n: c2 * b2 ** 3 / n <= target2
    x = b2 ** 3 * (2 * comb(r, 2)) ** 2 * c2 / Fraction(eps) ** 2
    n = max(1, -(-x.numerator // x.denominator))
    return n, ok(n), ok(n - 1) if n > 1 else False


def m_seq(r, h, b1, b2, eps, upto):
    e1 = eps1(r, b2, eps)
    sq = Fraction(eps) / (6 * b2 * comb(r, 2))  # sqrt(eps1), exact
    m = [0]
    for _ in range(upto):
        big_m = (Fraction(b1 * b2 ** ((r - 1) * m[-1])) / sq) ** (r * h)
        big_m = -(-big_m.numerator // big_m.denominator)
        m.append(m[-1] + big_m * h)
    return m


def frozen_tuples(count=20, seed=20240601):
    """Random parameter tuples with their exact constants, as JSON-ready dicts."""
    import random

    rnd = random.Random(seed)
    out = []
    while len(out) < count:
        r = rnd.choice([2, 2, 3, 4])
        h = rnd.choice([1, 1, 2])
        b1 = rnd.randint(1, 3)
        b2 = rnd.randint(1, 3)
        eps = Fraction(rnd.randint(1, 19), 20)
        if comb(r, 2) * h * h > 6:
            continue  # keep n_tilde printable
        e1 = eps1(r, b2, eps)
        c = const_c(r, h, b2, e1)
        n, _, _ = n_tilde(r, h, b2, eps)
        ms = m_seq(r, h, b1, b2, eps, 1)
        out.append({
            "r": r, "h": h, "b1": b1, "b2": b2,
            "eps": f"{eps.numerator}/{eps.denominator}",
            "eps1": f"{e1.numerator}/{e1.denominator}",
            "c": mpmath.nstr(c, 30),
            "n_tilde": str(n),
            "m1": str(ms[1]),
        })
    return out


if __name__ == "__main__":
    import json
    import sys

    if sys.argv[1:] == ["--tuples"]:
        json.dump(frozen_tuples(), sys.stdout, indent=1)
        print()
        sys.exit(0)
    e = Fraction(6, 10)
    print("eps1(2,2,0.6) =", eps1(2, 2, e))
    print("C(2,1,2,eps1) =", mpmath.nstr(const_c(2, 1, 2, eps1(2, 2, e)), 15))
    print("C(2,2,2,eps1) =", mpmath.nstr(const_c(2, 2, 2, eps1(2, 2, e)), 15), "256000*sqrt2 =", mpmath.nstr(256000 * mpmath.sqrt(2), 15))
    print("n_tilde(2,1,2,0.6) =", n_tilde(2, 1, 2, e))
    ms = m_seq(2, 1, 1, 2, e, 2)
    print("m(1) =", ms[1])
    print("m(2) digits =", len(str(ms[2])), "m(2) > 2^800:", ms[2] > 2 ** 800, "log2 =", mpmath.nstr(mpmath.log(ms[2], 2), 12))
    print("n_tilde(2,1,2,0.25) =", n_tilde(2, 1, 2, Fraction(1, 4)))
    print("n_tilde(3,1,2,0.5) =", n_tilde(3, 1, 2, Fraction(1, 2)))
    print("n_tilde(2,2,2,0.6) =", n_tilde(2, 2, 2, e)[0])
    print("C(3,1,3,eps1(3,3,0.5)) =", mpmath.nstr(const_c(3, 1, 3, eps1(3, 3, Fraction(1, 2))), 15))
    print("m seq r=3 h=1 b=(2,2) eps=0.5:", m_seq(3, 1, 2, 2, Fraction(1, 2), 1))
