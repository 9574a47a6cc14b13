"""Tour of the Poincare-disc primitives.

Distances use the arctanh normalization, under which the unit disc's
Kobayashi distance and the hyperbolic distance coincide.
"""

import numpy as np

from koblab import disc_geodesic, mobius_transport, poincare_distance

print("== distances ==")
print("p(0, 0.5)        =", poincare_distance(0, 0.5))
print("p(0.25, 0.0625)  =", poincare_distance(0.25, 0.0625))
print("p is symmetric   :", poincare_distance(0.3j, -0.4) == poincare_distance(-0.4, 0.3j))

print()
print("== automorphisms ==")
a = 0.25
print(f"transport by a={a} sends a to", mobius_transport(a, a))
print("and 0.0625 to", mobius_transport(a, 0.0625), "(= -4/21)")

print()
print("== geodesics ==")
curve = disc_geodesic(0, 0.5, 9)
print("radial geodesic from 0 to 0.5, arclength-parametrized:")
for s, z in zip(curve.params, curve.points[:, 0]):
    print(f"  s = {s:.4f}   z = {z.real:+.6f}{z.imag:+.6f}j")

print()
print("the polyline length reproduces the distance:")
zs = curve.points[:, 0]
length = sum(poincare_distance(zs[i], zs[i + 1]) for i in range(len(zs) - 1))
print("  sum of steps =", length, " vs p =", curve.param_length)

print()
print("== invariance spot check ==")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    a, z, w = (complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(3))
    before = poincare_distance(z, w)
    after = poincare_distance(mobius_transport(a, z), mobius_transport(a, w))
    worst = max(worst, abs(after - before))
print("worst Mobius-invariance defect over 200 random triples:", worst)
