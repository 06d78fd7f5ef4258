#!/usr/bin/env python3
"""Regenerate data/colormap_bgy256.csv: 256-entry dark-blue -> green -> yellow
map, piecewise-linear between fixed anchors, rounded to 8 bits."""
import sys

ANCHORS = [
    (0.000, (0.2422, 0.1504, 0.6603)),
    (0.125, (0.2788, 0.3556, 0.9777)),
    (0.250, (0.1540, 0.5902, 0.9218)),
    (0.375, (0.0265, 0.7113, 0.8120)),
    (0.500, (0.2328, 0.7849, 0.5547)),
    (0.625, (0.5381, 0.7891, 0.3053)),
    (0.750, (0.8438, 0.7346, 0.1864)),
    (0.875, (0.9917, 0.8021, 0.1813)),
    (1.000, (0.9769, 0.9839, 0.0805)),
]

def color(x):
    for (x0, c0), (x1, c1) in zip(ANCHORS, ANCHORS[1:]):
        if x <= x1:
            t = (x - x0) / (x1 - x0)
            return tuple(a + t * (b - a) for a, b in zip(c0, c1))
    return ANCHORS[-1][1]

out = sys.argv[1] if len(sys.argv) > 1 else 'data/colormap_bgy256.csv'
with open(out, 'w') as f:
    f.write('# colormap bgy256 v1: index,r,g,b\n')
    for i in range(256):
        r, g, b = (int(round(255 * v)) for v in color(i / 255))
        f.write(f'{i},{r},{g},{b}\n')
