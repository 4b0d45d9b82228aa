"""Spacetime-algebra Dirac-Hestenes solver for spherically symmetric potentials."""
