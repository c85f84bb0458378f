"""
planar networks, minimality certification and honeycomb generators
"""
from .exp import length, check_minimal, canonical_rotation
