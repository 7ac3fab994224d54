"""Equivariant holonomy and Chern-Simons actions for U(1)/SU(2) families.

Library layout:

* :mod:`equihol.circle`   -- values on R/Z
* :mod:`equihol.lie`      -- structure groups and invariant pairings
* :mod:`equihol.fields`   -- sampled differential forms on product grids
* :mod:`equihol.gauge`    -- gauge maps, curvature, families of connections
* :mod:`equihol.cschar`   -- transgression, actions, mapping-torus values
* :mod:`equihol.equivariant` -- character axioms, cocycles, holonomy
* :mod:`equihol.abelian_oracle` -- exact rational U(1) lattice cross-check
* :mod:`equihol.fixtures` -- deterministic test fixtures
* :mod:`equihol.cli`      -- command line interface
"""

__version__ = "0.1.0"

from .circle import CircleValue, circle_distance  # noqa: F401
from .lie import SU2, U1, group_by_name, invariant_pair  # noqa: F401
