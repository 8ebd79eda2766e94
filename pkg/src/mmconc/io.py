"""JSON readers and writers for spaces, trees and reports."""
from __future__ import annotations

import json
import os

import numpy as np
from scipy.spatial.distance import squareform

from .errors import BadSpace
from .mmcore import FiniteMMSpace, build_space
from .observables.fields import Report
from .screens.tree import MetricTree


def _load(src):
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            return json.load(fh)
    return src


def space_from_dict(data: dict, check: bool = True) -> FiniteMMSpace:
    if "dist" in data:
        D = np.asarray(data["dist"], dtype=float)
    elif "dist_condensed" in data:
        c = np.asarray(data["dist_condensed"], dtype=float)
        n = int(round((1 + np.sqrt(1 + 8 * len(c))) / 2))
        if n * (n - 1) // 2 != len(c):
            raise BadSpace(f"condensed distance list of length {len(c)} is not triangular")
        D = squareform(c, checks=False)
    else:
        raise BadSpace("space file needs 'dist' or 'dist_condensed'")
    return build_space(data.get("labels"), D, data.get("weights"), check=check)


def load_space(src, check: bool = True) -> FiniteMMSpace:
    return space_from_dict(_load(src), check)


def space_to_dict(space: FiniteMMSpace) -> dict:
    return {
        "labels": [x if isinstance(x, (str, int)) else str(x) for x in space.labels],
        "dist_condensed": squareform(np.asarray(space.dist), checks=False).tolist(),
        "weights": space.weights.tolist(),
    }


def save_space(space: FiniteMMSpace, path) -> None:
    with open(path, "w") as fh:
        json.dump(space_to_dict(space), fh)


def load_tree(src) -> MetricTree:
    if isinstance(src, (str, os.PathLike)):
        return MetricTree.from_json(str(src))
    return MetricTree.from_json(src)


def save_tree(tree: MetricTree, path) -> None:
    with open(path, "w") as fh:
        json.dump(tree.to_json(), fh)


def load_report(src) -> Report:
    data = json.loads(src) if isinstance(src, str) and src.lstrip().startswith("{") else _load(src)
    return Report.from_dict(data)
