"""Exact toolkit for polarized horosymmetric varieties.

Exact lane: root data, restricted root systems, moment polytopes,
Duistermaat-Heckman integration, coercivity and Kahler-Einstein criteria,
all over rational arithmetic.  Float lane: Monge-Ampere densities, scalar
curvature and Mabuchi functional for torus-invariant potentials.
"""

__version__ = "0.1.0"
