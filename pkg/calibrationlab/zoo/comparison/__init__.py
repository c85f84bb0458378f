"""
length comparisons between a minimal network and competitors: same graph,
richer graph through an embedded copy, poorer graph through a quotient,
plus a brute force Steiner oracle on at most five terminals
"""
from .exp import (compare_same_topology, compare_embedded_copy, find_embedded_copy, compare_quotient_richer,
                  compare_quotient_poorer, steiner_oracle, identity_embedding)
