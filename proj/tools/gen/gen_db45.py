#!/usr/bin/env python3
"""Regenerate data/db45.txt: Daubechies-45 scaling filter by minimum-phase
spectral factorization in 200-digit arithmetic."""
import sys
import mpmath as mp

mp.mp.dps = 200
N = 45

# P(y) = sum_k C(N-1+k, k) y^k, with y = sin^2(w/2) = (1 - cos w)/2
coeffs = [mp.binomial(N - 1 + k, k) for k in range(N)]
yroots = mp.polyroots(list(reversed(coeffs)), maxsteps=2000, extraprec=2000)

# Each root y0 maps to z + 1/z = 2 - 4 y0; keep the root inside the unit circle.
zroots = []
for y0 in yroots:
    b = 2 - 4 * y0
    disc = mp.sqrt(b * b - 4)
    z1 = (b + disc) / 2
    z2 = (b - disc) / 2
    zroots.append(z1 if abs(z1) < 1 else z2)

poly = [mp.mpc(1)]
def mul(p, q):
    out = [mp.mpc(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, c in enumerate(q):
            out[i + j] += a * c
    return out
for _ in range(N):
    poly = mul(poly, [mp.mpc(1), mp.mpc(1)])
for z in zroots:
    poly = mul(poly, [mp.mpc(1), -z])

h = [mp.re(c) for c in poly]
s = mp.fsum(h)
h = [c * mp.sqrt(2) / s for c in h]

assert len(h) == 2 * N
assert abs(mp.fsum(h) - mp.sqrt(2)) < mp.mpf('1e-100')
assert abs(mp.fsum(c * c for c in h) - 1) < mp.mpf('1e-100')
for k in range(1, N):
    assert abs(mp.fsum(h[i] * h[i + 2 * k] for i in range(2 * N - 2 * k))) < mp.mpf('1e-100')

out = sys.argv[1] if len(sys.argv) > 1 else 'data/db45.txt'
with open(out, 'w') as f:
    f.write('# db45 scaling (lowpass decomposition) filter, 90 taps\n')
    f.write('# sum = sqrt(2), sum of squares = 1\n')
    for c in h:
        f.write(mp.nstr(c, 25, min_fixed=-1, max_fixed=-1, strip_zeros=False) + '\n')
