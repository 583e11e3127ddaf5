"""
Norms and Lipschitz seminorms on a quantum torus
================================================

Build a few Fourier polynomials on the rotation algebra with golden-ratio
twist, bracket their operator norms, and compute the Lipschitz seminorm of a
cosine, which is ``2 pi`` for every lattice norm.
"""

import numpy as np

from qtorus import (GNSConfig, ThetaMatrix, adjoint, generator, lipschitz_L,
                    multiply, norm_interval, one)

t = (np.sqrt(5) - 1) / 2
theta = ThetaMatrix([[0.0, t], [-t, 0.0]])
u, v = generator(theta, 1), generator(theta, 2)

# the defining relation: v u = e^{2 pi i t} u v
print("relation defect:", (multiply(v, u) - multiply(u, v).scale(np.exp(2j * np.pi * t))).max_abs())

config = GNSConfig(radii=(4, 8, 12))
for name, a in [("u", u), ("1 + u", one(theta) + u), ("1 + u + v", one(theta) + u + v)]:
    iv = norm_interval(a, config)
    print(f"||{name}|| in [{iv.lower:.6f}, {iv.upper:.6f}]  ({iv.method})")

###############################################################################
# The cosine ``(u + u*)/2`` has derivative ``2 pi i sin`` along the first axis.

c = (u + adjoint(u)).scale(0.5)
for norm in ("l1", "l2", "linf"):
    est = lipschitz_L(c, norm, config)
    print(f"L_{norm}(cos) in [{est.lower:.9f}, {est.upper:.9f}]  vs 2 pi = {2 * np.pi:.9f}")
