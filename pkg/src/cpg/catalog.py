"""Named domains: one per entry of the low-dimensional canonical lists, plus test extras."""

from __future__ import annotations

from dataclasses import dataclass

from cpg.classification import Label
from cpg.domains import (
    Ball,
    ConvexDomain,
    DomainError,
    HPoly,
    HyperbolaRegion,
    LorentzCone,
    Paraboloid,
    Product,
    halfspace,
    simplex_cone,
    space,
)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    domain: ConvexDomain
    expected_class: Label
    provenance: str
    quasi_homogeneous: bool = True


def _entries() -> list[CatalogEntry]:
    P2 = Paraboloid(2)
    square = HPoly(((1, 0), (-1, 0), (0, 1), (0, -1)), (1, 0, 1, 0))
    tetra = HPoly(((-1, 0, 0), (0, -1, 0), (0, 0, -1), (1, 1, 1)), (0, 0, 0, 1))
    E = CatalogEntry
    return [
        # dimension 2
        E("plane2", space(2), Label.PLANE, "2D list: the plane"),
        E("half-plane2", halfspace(2), Label.HALF_PLANE, "2D list: {y > 0}"),
        E("quadrant", simplex_cone(2), Label.QUADRANT, "2D list: {x > 0, y > 0}"),
        E("parabola", P2, Label.PARABOLA, "2D list: {y > x^2}"),
        # dimension 3
        E("space3", space(3), Label.SPACE_3, "3D list: R^3"),
        E("half-space3", halfspace(3), Label.HALF_SPACE_3, "3D list: {z > 0}"),
        E("parabola-x-r", Product((P2, space(1))), Label.PARABOLA_x_R, "3D list: {y > x^2} in R^3"),
        E("quadrant-x-r", Product((simplex_cone(2), space(1))), Label.QUADRANT_x_R, "3D list: {x > 0, y > 0} in R^3"),
        E("parabola-x-rplus", Product((P2, halfspace(1))), Label.PARABOLA_x_RPLUS, "3D list: {y > x^2, z > 0}"),
        E("paraboloid3", Paraboloid(3), Label.PARABOLOID_3, "3D list: {z > x^2 + y^2}"),
        E("simplex-cone3", simplex_cone(3), Label.SIMPLEX_CONE_3, "3D list: simplex cone (positive octant)"),
        E("elliptic-cone3", LorentzCone(3), Label.STRICT_CONE_3, "3D list: strictly convex cone, the nappe x > 0 of x^2 - y^2 - z^2 > 0"),
        # dimension 4
        E("space4", space(4), Label.SPACE_4, "4D list: R^4"),
        E("half-space4", halfspace(4), Label.HALF_SPACE_4, "4D list: R^3 x R+"),
        E("parabola-x-r2", Product((space(2), P2)), Label.PARABOLA_x_R2, "4D list: R^2 x {y > x^2}"),
        E("quadrant-x-r2", Product((space(2), simplex_cone(2))), Label.QUADRANT_x_R2, "4D list: R^2 x {x > 0, y > 0}"),
        E("paraboloid3-x-r", Product((space(1), Paraboloid(3))), Label.PARABOLOID_3_x_R, "4D list: R x {z > x^2 + y^2}"),
        E("parabola-x-rplus-x-r", Product((space(1), halfspace(1), P2)), Label.PARABOLA_x_RPLUS_x_R, "4D list: R x R+ x {y > x^2}"),
        E("elliptic-cone3-x-r", Product((space(1), LorentzCone(3))), Label.PROPER_CONE_3_x_R, "4D list: R x a properly convex cone of dimension 3"),
        E("elliptic-cone4", LorentzCone(4), Label.PROPER_CONE_4, "4D list: a properly convex cone of dimension 4"),
        # extras used by tests and examples
        E("ball2", Ball(2), Label.NOT_CLASSIFIED, "bounded disc, not quasi-homogeneous as an affine domain", False),
        E("interval", Ball(1), Label.NOT_CLASSIFIED, "open interval (-1, 1)", False),
        E("hyperbola", HyperbolaRegion(), Label.NOT_CLASSIFIED, "{x > 0, y > 1/x}, sections are not cone translates", False),
        E("paraboloid4", Paraboloid(4), Label.PARABOLOID_4, "4-dimensional paraboloid (quasi-homogeneous, not in the divisible list)"),
        E("simplex-cone4", simplex_cone(4), Label.PROPER_CONE_4, "positive orthant of R^4"),
        E("square", square, Label.NOT_CLASSIFIED, "unit square, bounded", False),
        E("tetrahedron", tetra, Label.NOT_CLASSIFIED, "standard simplex in R^3, bounded", False),
    ]


CATALOG: dict[str, CatalogEntry] = {e.name: e for e in _entries()}

# entries that stand for an item of one of the canonical lists
LIST_ENTRIES = [
    "plane2", "half-plane2", "quadrant", "parabola",
    "space3", "half-space3", "parabola-x-r", "quadrant-x-r", "parabola-x-rplus",
    "paraboloid3", "simplex-cone3", "elliptic-cone3",
    "space4", "half-space4", "parabola-x-r2", "quadrant-x-r2", "paraboloid3-x-r",
    "parabola-x-rplus-x-r", "elliptic-cone3-x-r", "elliptic-cone4",
]


def get(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise DomainError(f"unknown catalog name {name!r}; known names: {', '.join(sorted(CATALOG))}") from None


def names() -> list[str]:
    return sorted(CATALOG)
