"""Computations on convex affine and projective domains."""

from cpg.classification import CanonicalClass, Label, classify, verify_witness
from cpg.domains import (
    AffineImage,
    Ball,
    ConvexDomain,
    DomainError,
    HPoly,
    LorentzCone,
    Membership,
    Paraboloid,
    ProjectiveImage,
    Product,
    domain_from_json,
    halfspace,
    simplex_cone,
    space,
)
from cpg.hilbert import hilbert_distance, orbit_distance
from cpg.limits import analyze_limit, domain_sequence_limit

__version__ = "0.1.0"

__all__ = [
    "AffineImage", "Ball", "CanonicalClass", "ConvexDomain", "DomainError", "HPoly", "Label",
    "LorentzCone", "Membership", "Paraboloid", "ProjectiveImage", "Product", "analyze_limit",
    "classify", "domain_from_json", "domain_sequence_limit", "halfspace", "hilbert_distance",
    "orbit_distance", "simplex_cone", "space", "verify_witness",
]
