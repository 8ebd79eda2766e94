"""Concentration of measure observables for finite metric measure spaces."""
from .errors import MMError
from .mmcore import FiniteMMSpace, PushforwardMeasure, SubsetMask, build_space, neighborhood, pushforward
from .screens import EuclideanScreen, HyperbolicScreen, MetricTree, TreePoint, parse_screen, screen_distance

__version__ = "0.1.0"

__all__ = [
    "EuclideanScreen",
    "FiniteMMSpace",
    "HyperbolicScreen",
    "MMError",
    "MetricTree",
    "PushforwardMeasure",
    "SubsetMask",
    "TreePoint",
    "build_space",
    "neighborhood",
    "parse_screen",
    "pushforward",
    "screen_distance",
]
