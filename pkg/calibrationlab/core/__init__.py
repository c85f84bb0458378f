from .exp_runner import ExpRunner
from .configs import Config, ToleranceConfig, DEFAULT_TOLERANCE
from .base import BaseModel, BaseCertificate
from .errors import *
from .exact import QSqrt3, SQRT3
from .geometry import (Vec2, Point2, Vector2, Segment, Polygon, Intersection, G1, G2, G3, HEXAGON_VERTICES,
                       hex_norm, hex_dual_norm, rotate, rotate_twelfth, segment_intersection,
                       polygon_offset_network, construction_threshold)
from .utils import ParallelManager, to_jsonable, dumps
