"""hhdx: exact homological computations for divided-power differential
operators over prime fields.

Subpackages cover prime-field arithmetic (gfp), sparse truncated
polynomials (poly), divided-power differential operators (dpdo), exact
linear algebra and spectral sequences (linalg), Hochschild cochains
(hochschild), poset-indexed diagram cochains (gs), and inverse limits of
Frobenius towers (tower).  The `hhdx` console script exposes end-to-end
scenarios emitting deterministic JSON reports.
"""

__version__ = "0.1.0"
