"""Certification toolkit for intrinsic-dimension functional inequalities.

The package computes both sides of a family of sharpened functional
inequalities (log-Sobolev type bounds whose right-hand sides see the full
spectrum of a Fisher information matrix rather than just its trace, their
product-space and curved-space relatives) and emits machine-readable
verification reports.

Layout:

- ``measures``: densities on R^n and finite product spaces, quadrature.
- ``info_functionals``: relative entropy, Fisher matrices, discrete forms.
- ``euclidean_improvers``: the sharpened Euclidean inequalities and their
  optimal scaling parameters.
- ``tensorization``: nonlinear entropy tensorization on product spaces.
- ``riccati``: matrix/scalar Riccati comparison envelopes and bound formulas.
- ``space_forms``: constant-curvature geometry, heat kernels, stochastic
  simulation.
- ``verifier``: suite orchestration and reports.
- ``service`` / ``cli``: FastAPI wrapper and its thin command-line client.
"""

__version__ = "0.1.0"
