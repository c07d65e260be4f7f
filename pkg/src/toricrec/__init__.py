"""Exact integral affine constructions of torus fibres that never return.

Builds nodal charts for canonical types (hat class, M, w, parked heights),
computes the level length g(h), checks the piecewise unimodular map tau and
certifies each fibre height as non-recurrent or periodic.
"""

from .canonical import CanonicalType, EndType, HatClass, g, k_of, recurrent_heights, rotation_number
from .chart import NodalChart, natural_chart, make_s2xs2, wedge_level_length
from .dynamics import RecurrenceVerdict, orbit_gaps, scan, verdict
from .exactnum import QuadraticNumber, parse_literal, qn
from .polygon import DelzantPolygon, level_length, ridge
from .tau import build_tau, verify_iso

__version__ = "0.1.0"
