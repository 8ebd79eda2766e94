"""Concentration observables of finite mm-spaces."""
from .diameters import map_partial_diameter, obs_diameter, partial_diameter, pd_1d, pd_ball, pd_enumerate
from .fields import Report, ScalarField, ScreenMap, audit_field, audit_map, field_excess, lipschitz_excess
from .levy import (
    alpha_estimate,
    alpha_exact_many,
    concentration_function,
    levy_mean,
    levy_means,
    levy_radii,
    levy_radius,
    sep_estimate,
    sep_exact2,
    separation,
)
from .tree_mean import TreeSplit, pre_levy_mean_tree, split_masses
from .variation import central_radius, lp_from_distances, lp_variation, obs_central_radius, obs_lp_variation

__all__ = [
    "Report",
    "ScalarField",
    "ScreenMap",
    "TreeSplit",
    "alpha_estimate",
    "alpha_exact_many",
    "audit_field",
    "audit_map",
    "central_radius",
    "concentration_function",
    "field_excess",
    "levy_mean",
    "levy_means",
    "levy_radii",
    "levy_radius",
    "lipschitz_excess",
    "lp_from_distances",
    "lp_variation",
    "map_partial_diameter",
    "obs_central_radius",
    "obs_diameter",
    "obs_lp_variation",
    "partial_diameter",
    "pd_1d",
    "pd_ball",
    "pd_enumerate",
    "pre_levy_mean_tree",
    "sep_estimate",
    "sep_exact2",
    "separation",
    "split_masses",
]
