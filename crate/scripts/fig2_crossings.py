#!/usr/bin/env python3
"""Regenerates crates/cli/tests/golden/fig2_crossings.csv.

Independent of the Rust code: evaluates R (one B-step on Y-basis key bits,
then CSS) and r' (separate-batch six-state rate) in 50-digit arithmetic and
locates the crossings by scanning and bisection.

    python3 scripts/fig2_crossings.py > crates/cli/tests/golden/fig2_crossings.csv
"""
from mpmath import mp, mpf, log

mp.dps = 50
CASES = ["0", "0.005", "0.01", "0.02"]
STEP = mpf("0.001")


def shannon(ps):
    return -sum(p * log(p, 2) for p in ps if p > 0)


def channel(qy, total):
    side = (total - qy) / 2
    return 1 - total, side, qy, side


def r_prime(qy, total):
    return 1 - shannon(channel(qy, total))


def big_r(qy, total):
    qi, qx, qy_, qz = channel(qy, total)
    # Y-basis key bits see (q_x, q_y, q_z) -> (q_z, q_x, q_y).
    i, x, y, z = qi, qz, qx, qy_
    agree = (i + z) ** 2 + (x + y) ** 2
    out = [(i * i + z * z) / agree, (x * x + y * y) / agree, 2 * x * y / agree, 2 * i * z / agree]
    return agree / 2 * (1 - shannon(out))


def first_rise(lo, g):
    a, ga = lo, g(lo)
    while a < 1:
        b = min(a + STEP, mpf(1))
        gb = g(b)
        if ga <= 0 < gb:
            for _ in range(200):
                mid = (a + b) / 2
                if g(mid) > 0:
                    b = mid
                else:
                    a = mid
            return (a + b) / 2
        a, ga = b, gb
    return None


def fx(v):
    return "NA" if v is None else f"{float(v):.6f}"


print("# asymqkd sweep-fig2 crossings schema=1")
print("# config: grid=0:0.4:0.01 cases=" + ",".join(fx(mpf(c)) for c in CASES) + " q_x0=q_z0 key_basis=Y")
print("# seed: none")
print("case,q_y0,R_exceeds_r_prime_from,r_prime_zero,R_zero")
for i, c in enumerate(CASES):
    qy = mpf(c)
    cross = first_rise(qy, lambda t: big_r(qy, t) - r_prime(qy, t))
    rz = first_rise(qy, lambda t: -r_prime(qy, t))
    bz = first_rise(qy, lambda t: -big_r(qy, t))
    print(",".join([chr(ord("A") + i), fx(qy), fx(cross), fx(rz), fx(bz)]))
