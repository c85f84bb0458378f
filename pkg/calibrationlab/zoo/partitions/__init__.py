"""
three-region partitions around a minimal network: tube domain, face
coloring, paired calibration fields, flux identities and the
corner-cutting counterexample
"""
from .exp import (build_partition_domain, three_color_faces, assign_fields, verify_paired_calibration,
                  perimeter_energy, flux_check, counterexample, counterexample_threshold, partition_from_interfaces)
