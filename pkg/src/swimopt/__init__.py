"""Energy-optimal periodic strokes for axisymmetric creeping-flow swimmers.

Units throughout: lengths mm, time s, viscosity mPa s. Forces then come out
in nN, power in pW, and energy in pJ.
"""

__version__ = "0.1.0"
