"""Numerical laboratory for axial compression of a thin elastic cylinder
mounted on a rigid mandrel: energies, wrinkling constructions, scaling-law
oracles, certificate checks, and constrained minimization."""

__version__ = "0.1.0"
