"""Exact dynamics of the one-dimensional delta-interaction Bose gas.

The repulsive Lieb-Liniger gas admits an exact time-dependent Green's
function written as a sum over permutations of plane-wave integrals
weighted by two-body scattering factors.  This package evaluates that
permutation sum numerically (with a small imaginary-time regulator
making every momentum integral absolutely convergent), evolves physical
Gaussian wave-packet initial states, evaluates the impenetrable-boson
determinant limit in closed form, and cross-checks everything against
independent oracles: an exact two-body semi-analytic reduction, closed
free/impenetrable limits, finite-difference residuals of the equation
of motion and of the contact (cusp) condition, and a mollified-potential
Crank-Nicolson lattice solver.

Subpackages
-----------
bethe       permutations, inversions, S-matrix, amplitudes
quadrature  truncated momentum grids, tensor-product integration
propagator  the Green's function and its closed-form special cases
packets     Gaussian wave packets and their Fourier transforms
evolution   spectral / convolution evolution of packet initial states
lattice     two-particle Crank-Nicolson oracle
verify      the orchestrated verification suite
cli         command-line entry points
"""

__version__ = "0.1.0"
