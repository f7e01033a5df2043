"""Constant index tensors for exterior algebra on an oriented 4-chart.

Storage conventions used across the package:

* 2-forms keep the 6 independent components in pair order
  PAIRS = (01, 02, 03, 12, 13, 23); antisymmetry is implied by storage.
* 3-forms keep 4 components; component l is the coefficient of
  dx^i ^ dx^j ^ dx^k with (i,j,k) the increasing complement of axis l.
* The self-dual frame basis (unit norm for an orthonormal coframe e^a) is
      eta_1 = (e^0^e^1 + e^2^e^3)/sqrt(2)
      eta_2 = (e^0^e^2 + e^3^e^1)/sqrt(2)
      eta_3 = (e^0^e^3 + e^1^e^2)/sqrt(2)
  and the anti-self-dual triple flips the sign of the second wedge.
"""

from __future__ import annotations

import itertools

import numpy as np

PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_INDEX = {p: i for i, p in enumerate(PAIRS)}

# complement triples, increasing: TRIPLES[l] omits axis l
TRIPLES: tuple[tuple[int, int, int], ...] = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))

# permutation symbol, eps[0,1,2,3] = +1
EPS = np.zeros((4, 4, 4, 4))
for perm in itertools.permutations(range(4)):
    sgn = 1
    p = list(perm)
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                sgn = -sgn
    EPS[perm] = sgn
EPS.flags.writeable = False

# expansion tensors: full antisymmetric components from stored ones
X2 = np.zeros((6, 4, 4))
for p, (i, j) in enumerate(PAIRS):
    X2[p, i, j] = 1.0
    X2[p, j, i] = -1.0
X2.flags.writeable = False

X3 = np.zeros((4, 4, 4, 4))
for l, (i, j, k) in enumerate(TRIPLES):
    for perm in itertools.permutations((i, j, k)):
        X3[l][perm] = EPS[perm + (l,)] * EPS[(i, j, k, l)]
X3.flags.writeable = False


def _eta(sign: float) -> np.ndarray:
    pairs = (((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2)))
    H = np.zeros((3, 4, 4))
    for a, ((i, j), (k, l)) in enumerate(pairs):
        H[a, i, j], H[a, j, i] = 1.0, -1.0
        H[a, k, l], H[a, l, k] = sign, -sign
    H /= np.sqrt(2.0)
    H.flags.writeable = False
    return H


ETA_PLUS = _eta(+1.0)   # frame components of the self-dual basis
ETA_MINUS = _eta(-1.0)  # anti-self-dual counterpart

# wedge pairing of stored 2-forms: (alpha ^ beta)_{0123} = alpha_p WEDGE2[p,q] beta_q
WEDGE2 = np.zeros((6, 6))
for p, (i, j) in enumerate(PAIRS):
    for q, (k, l) in enumerate(PAIRS):
        WEDGE2[p, q] = EPS[i, j, k, l]
WEDGE2.flags.writeable = False
