#!/usr/bin/env python3
"""Regenerate the reference zero tables under tests/data with mpmath.

The tables are independent of the C++ evaluator: zeta ordinates come from
mpmath.zetazero, and L-function ordinates from a sign-change scan of the
real-valued Hardy-type function of mpmath.dirichlet, polished by findroot.
"""
import os
import sys

import mpmath

mpmath.mp.dps = 30
HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "data")


def zeta_table(count):
    path = os.path.join(HERE, "zeta_zeros.txt")
    with open(path, "w") as out:
        out.write("# first %d ordinates of nontrivial zeta zeros (mpmath.zetazero)\n" % count)
        for n in range(1, count + 1):
            out.write(mpmath.nstr(mpmath.zetazero(n).imag, 18, strip_zeros=False) + "\n")


def l_table(q, chi, parity, t_max, name):
    def hardy(t):
        s = mpmath.mpf(0.5) + 1j * t
        theta = (t / 2) * mpmath.log(q / mpmath.pi) + mpmath.im(mpmath.loggamma((s + parity) / 2))
        return mpmath.re(mpmath.exp(1j * theta) * mpmath.dirichlet(s, chi))

    roots = []
    step = mpmath.mpf("0.02")
    t = mpmath.mpf("0.5")
    prev = hardy(t)
    while t < t_max:
        nxt = hardy(t + step)
        if prev * nxt < 0:
            roots.append(mpmath.findroot(hardy, (t, t + step), solver="anderson"))
        prev = nxt
        t += step
    path = os.path.join(HERE, name)
    with open(path, "w") as out:
        out.write("# ordinates of nontrivial zeros of L(s, chi) mod %d up to %s (mpmath)\n" % (q, t_max))
        for r in roots:
            out.write(mpmath.nstr(r, 18, strip_zeros=False) + "\n")


if __name__ == "__main__":
    zeta_table(int(sys.argv[1]) if len(sys.argv) > 1 else 750)
    l_table(3, [0, 1, -1], 1, 60, "l_mod3_zeros.txt")
    l_table(4, [0, 1, 0, -1], 1, 60, "l_mod4_zeros.txt")
