"""
Rescaled metrics are at distance zero
=====================================

Scaling a metric by ``r`` multiplies D-norms by ``sqrt(r)`` and leaves the
connection unchanged, so the bridge between ``r.g`` and ``s.g`` with unit
pivot and anchors matched by ``sqrt(r/s)`` has every quantity equal to zero.
"""

import numpy as np

from qtorus import (GNSConfig, ThetaMatrix, TorusElement, bridge_quantities, conformal_metric,
                    d_norm, levi_civita, random_module_vector, scaling_bridge)

t = (np.sqrt(5) - 1) / 2
theta = ThetaMatrix([[0.0, t], [-t, 0.0]])
h = TorusElement.from_dict(theta, {(1, 0): 0.2, (-1, 0): 0.2, (0, 1): 0.15, (0, -1): 0.15})
g = conformal_metric(theta, h, 1.0)
config = GNSConfig(radii=(4, 8), seed=7)

x = random_module_vector(theta, np.random.default_rng(0))
for r in (1.0, 2.0, 5.0):
    gr = g.scaled(r)
    iv = d_norm(gr, levi_civita(gr), x, "l2", config).interval.scale(1 / np.sqrt(r))
    print(f"D_(r g)(X) / sqrt(r), r={r}: [{iv.lower:.6f}, {iv.upper:.6f}]")

###############################################################################
# The bridge itself.  Reach, height and imprint vanish by construction and the
# deck values cancel coefficientwise.

bridge = scaling_bridge(g, 2.0, 5.0, anchors=8, config=config)
q = bridge_quantities(bridge).to_dict()
print("max deck value:", max(d["upper"] for d in q["deck"]))
for key in ("basic_reach", "height", "imprint"):
    print(f"{key}: {q[key]['upper']}  ({q[key]['justification']})")
print("length:", q["length"])
