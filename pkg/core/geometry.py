"""
Domain Geometry for Carnot Hardy Verifier
Half-spaces, convex polytopes, boundary distances, angle functions and facet partitions.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from core.group_core import (
    GroupSpec,
    Polynomial,
    Scalar,
    apply_field_poly,
    is_exact_sequence,
    step2_constants,
    to_scalar,
)
from utils.validators import ValidationError

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12


def _as_normal(nu: Sequence[Any]) -> Tuple[Scalar, ...]:
    values = tuple(to_scalar(v) for v in nu)
    if not values:
        raise ValidationError("Normal vector must be non-empty")
    norm = math.sqrt(sum(float(v) ** 2 for v in values))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise ValidationError(f"Normal vector must have unit length, got |nu| = {norm!r}")
    return values


@dataclass(frozen=True)
class HalfSpace:
    """``{x : <x, nu> > d}`` with boundary distance ``<x, nu> - d``."""

    nu: Tuple[Scalar, ...]
    d: Scalar = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", _as_normal(self.nu))
        object.__setattr__(self, "d", to_scalar(self.d))

    @classmethod
    def from_normal(cls, direction: Sequence[float], d: float = 0.0) -> "HalfSpace":
        """Normalize an arbitrary nonzero direction."""
        vec = np.asarray(direction, dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValidationError("Direction must be nonzero")
        return cls(tuple(float(v) for v in vec / norm), d)

    @property
    def n(self) -> int:
        return len(self.nu)

    @property
    def nu_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.nu])

    def to_dict(self) -> Dict[str, Any]:
        return {"nu": [_jsonable(v) for v in self.nu], "d": _jsonable(self.d)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HalfSpace":
        if "nu" not in data:
            raise ValidationError("Half-space needs a 'nu' entry")
        return cls(tuple(data["nu"]), data.get("d", 0))


def _jsonable(value: Scalar) -> Union[int, float, str]:
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return value


class FacetPartition(NamedTuple):
    """Nearest facet of a point and its distance."""

    index: int
    distance: float


@dataclass(frozen=True)
class ConvexPolytope:
    """Intersection of half-spaces ``<x, nu_j> > d_j`` with inward normals.

    ``witness`` must be a strictly interior point; it certifies nonemptiness.
    """

    facets: Tuple[HalfSpace, ...]
    witness: Tuple[float, ...]

    def __post_init__(self) -> None:
        facets = tuple(
            f if isinstance(f, HalfSpace) else HalfSpace(tuple(f[0]), f[1]) for f in self.facets
        )
        if not facets:
            raise ValidationError("Polytope needs at least one facet")
        n = facets[0].n
        if any(f.n != n for f in facets):
            raise ValidationError("All facet normals must have the same dimension")
        witness = tuple(float(v) for v in self.witness)
        if len(witness) != n:
            raise ValidationError(f"Witness must have {n} coordinates")
        object.__setattr__(self, "facets", facets)
        object.__setattr__(self, "witness", witness)
        if np.any(self.distances(np.array(witness)) <= 0):
            raise ValidationError("Witness point is not strictly inside the polytope")

    @property
    def n(self) -> int:
        return self.facets[0].n

    @property
    def normals(self) -> np.ndarray:
        return np.stack([f.nu_array for f in self.facets])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([float(f.d) for f in self.facets])

    def distances(self, points: np.ndarray) -> np.ndarray:
        """Signed distance to every facet hyperplane; shape (..., facets)."""
        x = np.asarray(points, dtype=float)
        return x @ self.normals.T - self.offsets

    def to_dict(self) -> Dict[str, Any]:
        return {"facets": [f.to_dict() for f in self.facets], "witness": list(self.witness)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ConvexPolytope":
        try:
            facets = tuple(HalfSpace.from_dict(f) for f in data["facets"])
            witness = tuple(data["witness"])
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Polytope needs 'facets' and 'witness': {e}")
        return cls(facets, witness)


def load_polytope(path: Union[str, Path]) -> ConvexPolytope:
    """Read a JSON polytope file."""
    path = Path(path)
    try:
        return ConvexPolytope.from_dict(json.loads(path.read_text()))
    except FileNotFoundError:
        raise ValidationError(f"Polytope file not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in polytope file {path}: {e}")


# Distances and angle functions


def dist_halfspace(H: HalfSpace, x: Any) -> Any:
    """``<x, nu> - d``; exact for rational input, batched float otherwise."""
    if is_exact_sequence(x) and is_exact_sequence(H.nu):
        if len(x) != H.n:
            raise ValidationError(f"Point has {len(x)} coordinates, expected {H.n}")
        return sum(a * b for a, b in zip(x, H.nu)) - H.d
    points = np.asarray(x, dtype=float)
    if points.shape[-1] != H.n:
        raise ValidationError(f"Point has {points.shape[-1]} coordinates, expected {H.n}")
    return points @ H.nu_array - float(H.d)


def _check_dims(G: GroupSpec, nu: Sequence[Any]) -> None:
    if len(nu) != G.n:
        raise ValidationError(f"Normal has {len(nu)} components, group dimension is {G.n}")


def pairing_polynomial(G: GroupSpec, nu: Sequence[Scalar], i: int) -> Polynomial:
    """The polynomial ``x -> <X_i(x), nu>``."""
    _check_dims(G, nu)
    row = G.frame[G.generator_index(i)]
    result = Polynomial.zero(G.n)
    for a, v in zip(row, nu):
        if v != 0 and not a.is_zero:
            result = result + a * v
    return result


def field_normal_derivative_polynomial(G: GroupSpec, nu: Sequence[Scalar], i: int) -> Polynomial:
    """The polynomial ``X_i <X_i(x), nu>``."""
    return apply_field_poly(G, i, pairing_polynomial(G, nu, i))


def normal_pairings(G: GroupSpec, nu: Sequence[float], x: Any) -> np.ndarray:
    """``<X_i(x), nu>`` for every generator; shape (..., N1)."""
    _check_dims(G, nu)
    return G.frame_at(np.asarray(x, dtype=float)) @ np.asarray(nu, dtype=float)


def angle_W(G: GroupSpec, H: HalfSpace, x: Any) -> np.ndarray:
    """Angle function ``sqrt(sum_i <X_i(x), nu>^2)``."""
    return np.sqrt(np.sum(normal_pairings(G, H.nu_array, x) ** 2, axis=-1))


def angle_Wp(G: GroupSpec, H: HalfSpace, x: Any, p: float) -> np.ndarray:
    """``(sum_i |<X_i(x), nu>|^p)^(1/p)``.

    Raises:
        ValidationError: If ``p <= 1``.
    """
    if not p > 1:
        raise ValidationError(f"Exponent p must exceed 1, got {p}")
    g = np.abs(normal_pairings(G, H.nu_array, x))
    return np.sum(g ** p, axis=-1) ** (1.0 / p)


def field_normal_derivative(G: GroupSpec, H: HalfSpace, i: int, x: Any) -> Any:
    """``X_i <X_i(x), nu>`` evaluated exactly for rational points and normals."""
    poly = field_normal_derivative_polynomial(G, H.nu, i)
    if is_exact_sequence(x):
        return poly.evaluate(tuple(x))
    return poly.evaluate_array(np.asarray(x, dtype=float))


def step2_K_constant(G: GroupSpec, nu: Sequence[Any], beta: float) -> Scalar:
    """``beta * sum_s sum_i a[s][i][i] nu''_s`` for a step-two group.

    Raises:
        ValidationError: If ``G`` is not of step two.
    """
    a = step2_constants(G)
    _check_dims(G, nu)
    N = G.N1
    total: Scalar = 0
    for s, block in enumerate(a):
        trace = sum(block[i][i] for i in range(N))
        total = total + trace * to_scalar(nu[N + s])
    return beta * total


# Polytope partition


def facet_partition(P: ConvexPolytope, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest facet index and distance for every point (lowest index on ties)."""
    dists = P.distances(points)
    idx = np.argmin(dists, axis=-1)
    return idx, np.take_along_axis(dists, idx[..., None], axis=-1)[..., 0]


def nearest_facet(P: ConvexPolytope, x: Sequence[float]) -> FacetPartition:
    """Nearest facet of an interior point.

    Raises:
        ValidationError: If ``x`` is not strictly inside ``P``.
    """
    point = np.asarray(x, dtype=float)
    if point.shape != (P.n,):
        raise ValidationError(f"Point must have {P.n} coordinates")
    dists = P.distances(point)
    if np.any(dists <= 0):
        raise ValidationError(f"Point {tuple(point)} is not inside the polytope")
    j = int(np.argmin(dists))
    return FacetPartition(j, float(dists[j]))


def interface_normal(nu_j: Sequence[float], nu_l: Sequence[float]) -> Tuple[np.ndarray, float]:
    """Unit normal ``(nu_j - nu_l) / |nu_j - nu_l|`` of the interface and the gap.

    Raises:
        ValidationError: If the normals coincide.
    """
    diff = np.asarray(nu_j, dtype=float) - np.asarray(nu_l, dtype=float)
    gap = float(np.linalg.norm(diff))
    if gap < UNIT_TOLERANCE:
        raise ValidationError("Interface between facets with equal normals is degenerate")
    return diff / gap, gap


def sample_interface(
    P: ConvexPolytope,
    j: int,
    l: int,
    count: int,
    box: Sequence[Tuple[float, float]],
    seed: int = 0,
    tolerance: float = 1e-10,
    max_rounds: int = 50,
) -> np.ndarray:
    """Points of ``P`` on the hyperplane Gamma_jl where facets j and l are jointly nearest.

    Candidates are drawn uniformly in ``box`` and projected onto the
    hyperplane; up to ``count`` accepted points are returned.

    Raises:
        ValidationError: If j == l, indices are out of range or no point is found.
    """
    m = len(P.facets)
    if not (0 <= j < m and 0 <= l < m):
        raise ValidationError(f"Facet indices must lie in 0..{m - 1}")
    if j == l:
        raise ValidationError("An interface needs two distinct facets")
    bounds = np.asarray(box, dtype=float)
    if bounds.shape != (P.n, 2) or np.any(bounds[:, 1] <= bounds[:, 0]):
        raise ValidationError("Sampling box must give a nonempty interval per coordinate")
    normals, offsets = P.normals, P.offsets
    diff = normals[j] - normals[l]
    if float(np.linalg.norm(diff)) < UNIT_TOLERANCE:
        raise ValidationError("Interface between facets with equal normals is degenerate")
    rng = np.random.default_rng(seed)
    accepted: List[np.ndarray] = []
    have = 0
    batch = max(4 * count, 256)
    for _ in range(max_rounds):
        cand = rng.uniform(bounds[:, 0], bounds[:, 1], size=(batch, P.n))
        shift = (cand @ diff - (offsets[j] - offsets[l])) / float(diff @ diff)
        cand = cand - shift[:, None] * diff
        dists = cand @ normals.T - offsets
        d_j = dists[:, j]
        others = np.delete(dists, [j, l], axis=1)
        ok = (d_j > 0) & (np.abs(d_j - dists[:, l]) <= tolerance)
        if others.shape[1]:
            ok &= np.all(others >= d_j[:, None], axis=1)
        if ok.any():
            accepted.append(cand[ok])
            have += int(ok.sum())
        if have >= count:
            break
    if not have:
        raise ValidationError(f"Facets {j} and {l} share no sampled interface (non-adjacent)")
    return np.concatenate(accepted)[:count]


# Polytope builders


def slab(n: int, axis: int, lo: float, hi: float) -> ConvexPolytope:
    """``{lo < x_axis < hi}`` (0-based ``axis``)."""
    if not lo < hi:
        raise ValidationError("Slab needs lo < hi")
    up = [0.0] * n
    up[axis] = 1.0
    down = [0.0] * n
    down[axis] = -1.0
    witness = [0.0] * n
    witness[axis] = 0.5 * (lo + hi)
    return ConvexPolytope((HalfSpace(tuple(up), lo), HalfSpace(tuple(down), -hi)), tuple(witness))


def square_prism(
    n: int, axes: Tuple[int, int], center: Sequence[float], half_side: float
) -> ConvexPolytope:
    """Square of half-side ``half_side`` in the plane of ``axes``, infinite in the rest.

    Facet order: low side of axes[0], low side of axes[1], high side of
    axes[0], high side of axes[1].
    """
    if half_side <= 0:
        raise ValidationError("Half side must be positive")
    c = [float(v) for v in center]
    if len(c) != n:
        raise ValidationError(f"Center must have {n} coordinates")
    facets = []
    for sign in (1.0, -1.0):
        for axis in axes:
            nu = [0.0] * n
            nu[axis] = sign
            facets.append(HalfSpace(tuple(nu), sign * c[axis] - half_side))
    return ConvexPolytope(tuple(facets), tuple(c))


def regular_polygon_prism(
    n: int,
    axes: Tuple[int, int],
    sides: int,
    circumradius: float,
    center: Sequence[float],
    rotation: float = 0.0,
) -> ConvexPolytope:
    """Regular polygon with vertices at angles ``rotation + 2 pi k / sides``."""
    if sides < 3:
        raise ValidationError("A polygon needs at least three sides")
    if circumradius <= 0:
        raise ValidationError("Circumradius must be positive")
    c = np.asarray(center, dtype=float)
    if c.shape != (n,):
        raise ValidationError(f"Center must have {n} coordinates")
    inradius = circumradius * math.cos(math.pi / sides)
    facets = []
    for k in range(sides):
        theta = rotation + 2.0 * math.pi * (k + 0.5) / sides
        outward = np.zeros(n)
        outward[axes[0]] = math.cos(theta)
        outward[axes[1]] = math.sin(theta)
        facets.append(HalfSpace(tuple(-outward), -inradius - float(outward @ c)))
    return ConvexPolytope(tuple(facets), tuple(c))


def polygon_prism_sequence(
    n: int,
    axes: Tuple[int, int],
    circumradius: float,
    center: Sequence[float],
    levels: int,
    initial_sides: int = 4,
) -> List[ConvexPolytope]:
    """Nested inscribed polygons (sides doubling) increasing to a disk cylinder."""
    if levels < 1:
        raise ValidationError("Need at least one level")
    return [
        regular_polygon_prism(n, axes, initial_sides * 2 ** k, circumradius, center)
        for k in range(levels)
    ]


def support_inside_halfspace(H: HalfSpace, box: Sequence[Tuple[float, float]]) -> float:
    """Minimum of ``<x, nu> - d`` over a closed box."""
    nu = H.nu_array
    lows = np.array([lo for lo, _ in box], dtype=float)
    highs = np.array([hi for _, hi in box], dtype=float)
    return float(np.sum(np.minimum(nu * lows, nu * highs)) - float(H.d))


def support_inside_polytope(P: ConvexPolytope, box: Sequence[Tuple[float, float]]) -> float:
    """Minimum facet distance over a closed box."""
    return min(support_inside_halfspace(f, box) for f in P.facets)
