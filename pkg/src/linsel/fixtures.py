"""Worked examples shipped with the package.

Each fixture is a problem document that the CLI can run directly
(``--input fixture:NAME``); a few builders also return library objects for
tests.
"""

from __future__ import annotations

from fractions import Fraction

from .cone import Cone
from .polytope import Polytope
from .svmap import BooleanRegion, PointwiseMap, polytope_space

# Cone over the unit square {(a, b, 1)}.  Generators 0 and 1 span the side
# a = 0; the cone keeps the apex, the two rays on that side, the open side
# itself and the interior, and drops every other boundary piece.
SQUARE_BASE_GENERATORS = ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1))
SQUARE_BASE_REGIONS = {
    "apex": (),
    "S1": (0,),
    "S2": (1,),
    "S0": (0, 1),
    "int": (0, 1, 2, 3),
}
# The Riesz instance needs (1/2, 0, 1), which lies on the open side a < 1,
# b = 0; this variant keeps that side as well.
SQUARE_BASE_RIESZ_EXTRA = {"S3": (0, 2)}


def square_base_cone(with_riesz_side: bool = False) -> Cone:
    regions = dict(SQUARE_BASE_REGIONS)
    if with_riesz_side:
        regions.update(SQUARE_BASE_RIESZ_EXTRA)
    return Cone(SQUARE_BASE_GENERATORS, faces=tuple(regions.values()))


def square_base_names(with_riesz_side: bool = False) -> dict:
    regions = dict(SQUARE_BASE_REGIONS)
    if with_riesz_side:
        regions.update(SQUARE_BASE_RIESZ_EXTRA)
    return {frozenset(f): n for n, f in regions.items()}


def square_base_map(values: dict) -> BooleanRegion:
    """Boolean map on the square-base cone from {region name: 0 or 1}."""
    return BooleanRegion(
        square_base_cone(),
        {SQUARE_BASE_REGIONS[n]: v for n, v in values.items()},
        square_base_names(),
    )


SUBMAP_FIXTURE_VALUES = {"apex": 0, "S1": 0, "S2": 0, "S0": 1, "int": 1}


def segment_map() -> PointwiseMap:
    """x -> segment from (0, 0) to (x, 1), on the real line."""
    return PointwiseMap(
        Cone(((1,), (-1,))),
        lambda x: Polytope([(0, 0), (x[0], 1)]),
        polytope_space(2),
        name="segment to (x, 1)",
    )


def unit_square() -> Polytope:
    return Polytope.box((0, 0), (1, 1))


def dyadic_leaves(depth: int) -> list:
    """2^depth atoms of equal mass in R^(2^depth)."""
    n = 2**depth
    return [[Fraction(1, n) if i == k else 0 for i in range(n)] for k in range(n)]


_CONE_DOC = {
    "generators": [list(g) for g in SQUARE_BASE_GENERATORS],
    "regions": {n: list(f) for n, f in SQUARE_BASE_REGIONS.items()},
}
_RIESZ_CONE_DOC = {
    "generators": _CONE_DOC["generators"],
    "regions": {**_CONE_DOC["regions"], **{n: list(f) for n, f in SQUARE_BASE_RIESZ_EXTRA.items()}},
}


def _doc(kind: str, payload: dict) -> dict:
    return {"schema_version": 1, "kind": kind, "payload": payload}


# name -> (anchor, problem document)
FIXTURES = {
    "square-base-cone-6-maps": (
        "square-base cone: exactly 6 superlinear region-constant boolean maps",
        _doc("submap", {"cone": _CONE_DOC, "census": {"trials": 10000}}),
    ),
    "square-base-greatest-submap": (
        "square-base cone: greatest linear submap of 1 on S0 and int, 0 elsewhere",
        _doc(
            "submap",
            {
                "cone": _CONE_DOC,
                "values": SUBMAP_FIXTURE_VALUES,
                "points": [["0", "1/2", "1"], ["0", "0", "1"], ["0", "1", "1"], ["1/2", "1/2", "1"], ["1/3", "1/4", "1"]],
                "trials": 10000,
            },
        ),
    ),
    "square-base-riesz-failure": (
        "square-base cone: the interpolation property fails",
        _doc(
            "riesz",
            {"cone": _RIESZ_CONE_DOC, "xs": [["0", "1/2", "1"], ["1/2", "0", "1"]], "ys": [["1/2", "1/2", "1"], ["0", "0", "1"]]},
        ),
    ),
    "discontinuous-tomo-selection": (
        "segment map [(0,0),(x,1)]: tomographical selection through (0,(0,0)) is discontinuous",
        _doc(
            "select",
            {
                "segment_map": {"start": ["0", "0"], "direction": ["1", "0"], "offset": ["0", "1"]},
                "x": ["0"],
                "y": ["0", "0"],
                "probes": [["-1"], ["-1/2"], ["0"], ["1/2"], ["1"]],
            },
        ),
    ),
    "square-envelope": (
        "unit square: the concave envelope of |x+y-1| is not affine",
        _doc(
            "envelope",
            {
                "polytope": [["0", "0"], ["1", "0"], ["0", "1"], ["1", "1"]],
                "vertex_values": [[["0", "0"], "1"], [["1", "0"], "0"], [["0", "1"], "0"], [["1", "1"], "1"]],
                "points": [["1/2", "1/2"]],
                "midpoint_pairs": [[["1/2", "0"], ["1/2", "1"]]],
            },
        ),
    ),
    "triangle-simplex": (
        "triangle: a simplex",
        _doc("simplex", {"polytope": [["0", "0"], ["2", "0"], ["0", "2"]]}),
    ),
    "triangle-tomo": (
        "triangle: tomographical coordinates of (1,1)",
        _doc("tomo", {"polytope": [["0", "0"], ["2", "0"], ["0", "2"]], "point": ["1", "1"]}),
    ),
    "right-inverse-row": (
        "right inverse of T = [1 1] with C = 1",
        _doc("right-inverse", {"T": [["1", "1"]], "C": "1"}),
    ),
    "right-inverse-preserve": (
        "right inverse of T = [1 1] with C = 1 fixing z = (1,0)",
        _doc("right-inverse", {"T": [["1", "1"]], "C": "1", "z": ["1", "0"]}),
    ),
    "right-inverse-impossible": (
        "right inverse of T = [1 1] with C = 1 fixing z = (2,-1): impossible",
        _doc("right-inverse", {"T": [["1", "1"]], "C": "1", "z": ["2", "-1"]}),
    ),
    "nesting-dyadic": (
        "nesting basis of 4 atoms with T(b) = [0, mass(b)], y0 = 3/4",
        _doc(
            "nesting",
            {
                "leaves": [[str(v) for v in leaf] for leaf in dyadic_leaves(2)],
                "map": {
                    "generators": [[1 if i == k else 0 for i in range(4)] for k in range(4)],
                    "values": [[["0"], ["1"]]] * 4,
                },
                "y0": ["3/4"],
                "split_rule": "midpoint",
            },
        ),
    ),
}


def manifest() -> list:
    return [{"name": name, "anchor": anchor, "kind": doc["kind"]} for name, (anchor, doc) in sorted(FIXTURES.items())]


def load(name: str) -> dict:
    from .errors import InputError

    try:
        return FIXTURES[name][1]
    except KeyError:
        raise InputError(f"unknown fixture {name!r}") from None
