"""
certificates for planar minimal networks: lattice-current calibrations,
paired partition calibrations and the comparison results built on them
"""
__version__ = "0.1.0"
