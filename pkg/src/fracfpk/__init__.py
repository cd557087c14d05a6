"""Numerical machinery for Fokker-Planck equations of SDEs driven by
time-changed fractional Brownian motion.

Submodules mirror the pipeline: special functions (`specfun`), Laplace
transforms (`laplace`), subordinator densities and sampling
(`subordinators`), fractional calculus (`fraccalc`), PDE solvers (`fpk`),
the subordination / G-operator layer (`gops`), Monte Carlo cross-validation
(`mc`), and the experiment CLI (`cli`).
"""

from . import specfun, laplace, subordinators, fraccalc, fpk, gops, mc  # noqa: F401

__version__ = "0.1.0"
