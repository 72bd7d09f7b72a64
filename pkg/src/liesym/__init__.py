"""Lie point-symmetry analysis of the cylindrical generalized Fisher equation.

    u_t = f(u) + (1/x) (x g(u) u_x)_x

The package mechanizes the symbolic pipeline (prolongation, determining
system, classification, similarity reduction) on a small purpose-built
expression engine, and cross-checks every invariant solution numerically.
"""

__version__ = "0.1.0"
