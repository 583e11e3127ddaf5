"""Norms ``N`` on ``R^n`` used for the length function and the derivation norm."""

from __future__ import annotations

import itertools
from enum import Enum

import numpy as np


class NormChoice(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("ℓ", "l").replace("_", "")
        aliases = {"l1": cls.L1, "1": cls.L1, "l2": cls.L2, "2": cls.L2,
                   "linf": cls.LINF, "inf": cls.LINF, "max": cls.LINF}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown norm {value!r}; expected l1, l2 or linf") from None

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        order = {NormChoice.L1: 1, NormChoice.L2: 2, NormChoice.LINF: np.inf}[self]
        return float(np.linalg.norm(r, order))

    def extreme_points(self, n):
        """Extreme points of the unit ball modulo the sign flip ``r -> -r``.

        ``None`` for the Euclidean ball, whose extreme points form a sphere.
        """
        if self is NormChoice.L1:
            return np.eye(n)
        if self is NormChoice.LINF:
            signs = [s for s in itertools.product((1.0, -1.0), repeat=n) if s[0] > 0]
            return np.array(signs)
        return None
