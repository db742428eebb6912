"""Fermionic state sum model on a triangulated interval and circle.

Grassmann algebra and Berezin integration, gluing of edge partition
functions, the discrete Dirac operator and its spectrum, and the zeta
regularised continuum determinant it is compared against.
"""

__version__ = "0.1.0"
