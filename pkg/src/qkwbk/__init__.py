"""qkwbk: exact Weitzenboeck calculus for quaternion-Kaehler bundles.

Subpackages by concern:

* ``qfield``    -- exact arithmetic over Q(n) and linear solving
* ``reps``      -- Sp(1)Sp(n) weights, bundles, dimensions, gradient edges
* ``operators`` -- operator symbols, expressions, identities
* ``engine``    -- identity database, derivation and verification engine
* ``spectra``   -- minimal-eigenvalue bounds and vanishing sets
* ``stability`` -- Einstein stability, index identities, Wolf classification
* ``cli``       -- the ``wbk`` command-line tool
"""

__version__ = "0.1.0"
