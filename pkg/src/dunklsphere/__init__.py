"""Weighted approximation on the sphere for reflection-invariant Dunkl weights.

Modules
-------
sphere
    Spherical geometry, separated sets and quadrature on caps.
weight
    Root systems, the weight ``h_kappa^2`` and cap measures.
harmonics
    h-harmonic bases, reproducing kernels, projections and Dunkl operators.
cubature
    Positive cubature rules and Marcinkiewicz-Zygmund checks.
ball_entropy
    Entropy-number brackets for finite-dimensional ``l_p`` balls.
pipeline
    Upper and lower entropy bounds for weighted Sobolev classes.
cli
    Command-line runner writing JSON and CSV artifacts.
"""

__version__ = "0.1.0"
