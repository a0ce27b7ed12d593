"""Numerical toolkit for quantum weak values.

Modules
-------
qcore        dense states, observables and propagators
weakval      two-boundary weak values, energy shifts, Rabi traces
vonneumann   impulsive pointer coupling and its linear response
genmeas      Kraus sets, contextual values, conditioned-average decomposition
quasiprob    Kirkwood-Dirac / Terletsky-Margenau-Hill tables and Wigner grids
cqed         dispersive qubit-resonator dynamics
hjac         local momentum, quantum potential, Hamilton-Jacobi residuals
cli          scenario runner (``weakvalues`` / ``python -m weakvalues``)
"""

from .errors import WeakValueError
from .qcore import Observable
from .weakval import TwoBoundaryScenario, weak_value

__all__ = ["Observable", "TwoBoundaryScenario", "WeakValueError", "weak_value"]
__version__ = "0.1.0"
