"""Variable-exponent function-space norms and potential-theoretic solvers
for Stokes and Poisson problems on uniform grids.

Submodules
----------
grids      boxes, grid functions, quadrature, finite differences, file formats
exponents  variable exponent catalog, duals, reflections, log-regularity
norms      modulars, Luxemburg/Sobolev norms, dual-norm estimator, checks
kernels    closed-form singular kernels and spherical diagnostics
operators  direct-sum potentials, principal values, layer potentials, cutoffs
solvers    whole/half-space Poisson and Stokes solution formulas, estimates
acceptance quantitative acceptance suite over frozen fixtures
cli        config-driven experiment runner and command-line entry points
"""

__version__ = "0.1.0"
