"""horizonlab: a desk-scale numerical laboratory for trapped-surface and
apparent-horizon formation from large characteristic shear data, with a
Penrose-inequality margin audit.

Modules: regime (parameter algebra), sphere (S^2 discretization), shear
(initial data construction and verification), transport (null-cone
focusing and the interior slab model), mots (quasilinear elliptic MOTS
solves), horizon (assembly, areas, spacelike test), penrose (mass window
and margin classification), cli (config-driven pipeline).
"""

__version__ = "0.1.0"
