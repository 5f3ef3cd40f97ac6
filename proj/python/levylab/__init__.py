"""Malliavin calculus laboratory for finite-activity Levy processes.

Thin python surface over the C++ core: process model and measures, path
simulation, first and multiple integrals of elementary kernels, the
two-parameter derivative operator, exact chaos-moment oracles and the
experiment harness.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:  # development layout: _core built next to the package
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__version__ = "0.1.0"
