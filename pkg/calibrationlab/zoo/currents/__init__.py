"""
lattice currents of minimal networks and the identity-form calibration
"""
from .exp import exp
