"""Numerical toolkit for harmonic-oscillator eigenfunction analysis.

Core pieces:

* stable evaluation of normalized Hermite functions to very high order
  (:mod:`hermlp.hermite`),
* spectral bookkeeping for the operator -Laplacian + |x|^2
  (:mod:`hermlp.spectral`),
* the oscillatory-integral form of the spectral projection kernel and its
  critical-point geometry (:mod:`hermlp.phase`, :mod:`hermlp.mehler`),
* a generic stationary-phase expansion engine (:mod:`hermlp.stationary`),
* closed-form local concentration bounds (:mod:`hermlp.bounds`),
* quadrature helpers for restricted norms (:mod:`hermlp.normquad`),
* explicit concentrated eigenfunctions built from lattice index sets
  (:mod:`hermlp.construct`),
* a sweep runner and CLI (:mod:`hermlp.config`, :mod:`hermlp.runner`,
  :mod:`hermlp.cli`).
"""

__version__ = "0.1.0"
