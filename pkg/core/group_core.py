"""
Stratified Group Core for Carnot Hardy Verifier
Polynomial left-invariant frames, horizontal gradients, sub-Laplacians and group laws.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from utils.validators import ValidationError

Scalar = Union[int, Fraction, float]
Exponents = Tuple[int, ...]
CoeffKey = Tuple[int, int, int]

logger = logging.getLogger(__name__)


class UnsupportedOperationError(Exception):
    """Raised when an operation needs structure a group does not carry."""
    pass


class SmoothFunction(Protocol):
    """Anything with batched analytic value, gradient and Hessian."""

    def value(self, points: np.ndarray) -> np.ndarray: ...

    def gradient(self, points: np.ndarray) -> np.ndarray: ...

    def hessian(self, points: np.ndarray) -> np.ndarray: ...


def to_scalar(value: Any) -> Scalar:
    """Coerce a config value into an exact rational when possible."""
    if isinstance(value, bool):
        raise ValidationError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"Cannot parse rational coefficient: {value!r}")
    raise ValidationError(f"Expected a number, got {type(value).__name__}")


def is_exact_sequence(values: Any) -> bool:
    """True when every entry is an int or Fraction (not a numpy array)."""
    if isinstance(values, np.ndarray):
        return False
    try:
        return all(
            isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values
        )
    except TypeError:
        return False


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial in ``n_vars`` ambient coordinates.

    ``terms`` is canonicalized at construction: duplicate exponent vectors are
    merged, zero coefficients dropped and terms sorted by exponent vector.
    """

    n_vars: int
    terms: Tuple[Tuple[Exponents, Scalar], ...] = ()

    def __post_init__(self) -> None:
        if self.n_vars < 1:
            raise ValidationError("Polynomial needs at least one variable")
        merged: Dict[Exponents, Scalar] = {}
        for exps, coeff in self.terms:
            exps_t = tuple(int(e) for e in exps)
            if len(exps_t) != self.n_vars:
                raise ValidationError(
                    f"Exponent vector {tuple(exps)} has length {len(exps_t)}, "
                    f"expected {self.n_vars}"
                )
            if any(e < 0 or e != raw for e, raw in zip(exps_t, exps)):
                raise ValidationError(
                    f"Exponents must be nonnegative integers: {tuple(exps)}"
                )
            merged[exps_t] = merged.get(exps_t, 0) + coeff
        canonical = tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", canonical)

    # Construction helpers

    @classmethod
    def zero(cls, n_vars: int) -> "Polynomial":
        return cls(n_vars, ())

    @classmethod
    def constant(cls, n_vars: int, value: Scalar) -> "Polynomial":
        return cls(n_vars, (((0,) * n_vars, value),))

    @classmethod
    def variable(cls, n_vars: int, index: int, coeff: Scalar = 1) -> "Polynomial":
        """Monomial ``coeff * x_index`` (0-based index)."""
        if not 0 <= index < n_vars:
            raise ValidationError(f"Variable index {index} out of range 0..{n_vars - 1}")
        exps = [0] * n_vars
        exps[index] = 1
        return cls(n_vars, ((tuple(exps), coeff),))

    @classmethod
    def from_monomials(
        cls, n_vars: int, monomials: Sequence[Mapping[str, Any]]
    ) -> "Polynomial":
        """Build from group-file monomials ``{"exps": [...], "num": p, "den": q}``."""
        terms = []
        for mono in monomials:
            try:
                den = int(mono.get("den", 1))
                if den == 0:
                    raise ValidationError("Monomial denominator must be nonzero")
                coeff = Fraction(int(mono["num"]), den)
                terms.append((tuple(mono["exps"]), coeff))
            except (KeyError, TypeError, ValueError) as e:
                raise ValidationError(f"Malformed monomial {mono!r}: {e}")
        return cls(n_vars, tuple(terms))

    # Structure

    @property
    def variables(self) -> Tuple[int, ...]:
        """0-based indices of coordinates the polynomial actually depends on."""
        used = set()
        for exps, _ in self.terms:
            used.update(j for j, e in enumerate(exps) if e)
        return tuple(sorted(used))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(not any(exps) for exps, _ in self.terms)

    def constant_value(self) -> Scalar:
        if not self.is_constant:
            raise ValidationError("Polynomial is not constant")
        return self.terms[0][1] if self.terms else 0

    def weighted_degrees(self, weights: Sequence[int]) -> Tuple[int, ...]:
        """Weighted degree of every monomial, sorted and deduplicated."""
        return tuple(
            sorted({sum(w * e for w, e in zip(weights, exps)) for exps, _ in self.terms})
        )

    # Arithmetic

    def _coerce(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n_vars != self.n_vars:
                raise ValidationError("Polynomials live in different ambient spaces")
            return other
        return Polynomial.constant(self.n_vars, other)

    def __add__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        other_p = self._coerce(other)
        return Polynomial(self.n_vars, self.terms + other_p.terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n_vars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(self.n_vars, tuple((e, c * other) for e, c in self.terms))
        other_p = self._coerce(other)
        terms = []
        for e1, c1 in self.terms:
            for e2, c2 in other_p.terms:
                terms.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Polynomial(self.n_vars, tuple(terms))

    __rmul__ = __mul__

    def derivative(self, index: int) -> "Polynomial":
        """Formal partial derivative with respect to coordinate ``index`` (0-based)."""
        if not 0 <= index < self.n_vars:
            raise ValidationError(f"Variable index {index} out of range")
        terms = []
        for exps, coeff in self.terms:
            e = exps[index]
            if e:
                lowered = exps[:index] + (e - 1,) + exps[index + 1:]
                terms.append((lowered, coeff * e))
        return Polynomial(self.n_vars, tuple(terms))

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace coordinate j by ``images[j]`` (all in a common space)."""
        if len(images) != self.n_vars:
            raise ValidationError("Need one image polynomial per variable")
        target = images[0].n_vars
        result = Polynomial.zero(target)
        for exps, coeff in self.terms:
            term = Polynomial.constant(target, coeff)
            for j, e in enumerate(exps):
                for _ in range(e):
                    term = term * images[j]
            result = result + term
        return result

    # Evaluation

    def evaluate(self, point: Sequence[Scalar]) -> Scalar:
        """Evaluate at a single point; exact for int/Fraction inputs."""
        if len(point) != self.n_vars:
            raise ValidationError(
                f"Point has {len(point)} coordinates, expected {self.n_vars}"
            )
        total: Scalar = 0
        for exps, coeff in self.terms:
            term: Scalar = coeff
            for x, e in zip(point, exps):
                if e:
                    term = term * x ** e
            total = total + term
        return total

    def evaluate_array(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation over the last axis of ``points``."""
        x = np.asarray(points, dtype=float)
        if x.shape[-1] != self.n_vars:
            raise ValidationError(
                f"Points have {x.shape[-1]} coordinates, expected {self.n_vars}"
            )
        out = np.zeros(x.shape[:-1])
        for exps, coeff in self.terms:
            term = np.full(x.shape[:-1], float(coeff))
            for j, e in enumerate(exps):
                if e:
                    term = term * x[..., j] ** e
            out = out + term
        return out

    @cached_property
    def _gradient_polys(self) -> Tuple["Polynomial", ...]:
        return tuple(self.derivative(j) for j in range(self.n_vars))

    @cached_property
    def _hessian_polys(self) -> Tuple[Tuple["Polynomial", ...], ...]:
        return tuple(
            tuple(g.derivative(k) for k in range(self.n_vars)) for g in self._gradient_polys
        )

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate_array(points)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        return np.stack([g.evaluate_array(points) for g in self._gradient_polys], axis=-1)

    def hessian(self, points: np.ndarray) -> np.ndarray:
        rows = [
            np.stack([h.evaluate_array(points) for h in row], axis=-1)
            for row in self._hessian_polys
        ]
        return np.stack(rows, axis=-2)

    def to_monomials(self) -> List[Dict[str, Any]]:
        out = []
        for exps, coeff in self.terms:
            frac = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
            out.append(
                {"exps": list(exps), "num": frac.numerator, "den": frac.denominator}
            )
        return out


@dataclass(frozen=True)
class GroupSpec:
    """A stratified group presented by the coefficients of its generators.

    Generator ``X_k`` (1-based ``k``) is ``d/dx'_k`` plus, for every stratum
    ``l >= 2`` and index ``m``, ``coeffs[(k, l, m)](x) d/dx^{(l)}_m``.
    ``group_law`` optionally holds the coordinates of ``x o y`` as polynomials
    in the ``2n`` variables ``(x, y)``.
    """

    strata_dims: Tuple[int, ...]
    coeffs: Mapping[CoeffKey, Polynomial] = field(default_factory=dict)
    name: str = "custom"
    group_law: Optional[Tuple[Polynomial, ...]] = None

    def __post_init__(self) -> None:
        dims = tuple(self.strata_dims)
        if not dims or any(not isinstance(d, int) or d < 1 for d in dims):
            raise ValidationError(f"Strata dimensions must be positive integers: {dims}")
        object.__setattr__(self, "strata_dims", dims)
        object.__setattr__(self, "coeffs", dict(self.coeffs))
        weights = self.weights
        for key, poly in self.coeffs.items():
            k, l, m = key
            if not 1 <= k <= dims[0]:
                raise ValidationError(f"Generator index {k} out of range 1..{dims[0]}")
            if not 2 <= l <= len(dims):
                raise ValidationError(f"Stratum {l} out of range 2..{len(dims)}")
            if not 1 <= m <= dims[l - 1]:
                raise ValidationError(f"Index {m} out of range for stratum {l}")
            if poly.n_vars != self.n:
                raise ValidationError(
                    f"Coefficient {key} has {poly.n_vars} variables, expected {self.n}"
                )
            if any(weights[j] >= l for j in poly.variables):
                raise ValidationError(
                    f"Coefficient {key} depends on coordinates of stratum >= {l}"
                )
            degrees = poly.weighted_degrees(weights)
            if degrees and degrees != (l - 1,):
                raise ValidationError(
                    f"Coefficient {key} is not homogeneous of weighted degree {l - 1}"
                )
        if self.group_law is not None:
            law = tuple(self.group_law)
            if len(law) != self.n or any(p.n_vars != 2 * self.n for p in law):
                raise ValidationError("Group law needs n polynomials in 2n variables")
            object.__setattr__(self, "group_law", law)

    @property
    def n(self) -> int:
        return sum(self.strata_dims)

    @property
    def step(self) -> int:
        return len(self.strata_dims)

    @property
    def N1(self) -> int:
        return self.strata_dims[0]

    @property
    def Q(self) -> int:
        return sum(l * d for l, d in enumerate(self.strata_dims, start=1))

    @property
    def weights(self) -> Tuple[int, ...]:
        """Stratum number of every ambient coordinate."""
        out: List[int] = []
        for l, d in enumerate(self.strata_dims, start=1):
            out.extend([l] * d)
        return tuple(out)

    def slot(self, l: int, m: int) -> int:
        """0-based ambient index of coordinate ``m`` of stratum ``l`` (both 1-based)."""
        return sum(self.strata_dims[: l - 1]) + m - 1

    def generator_index(self, i: int) -> int:
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= self.N1:
            raise ValidationError(f"Generator index {i} out of range 1..{self.N1}")
        return int(i) - 1

    @cached_property
    def frame(self) -> Tuple[Tuple[Polynomial, ...], ...]:
        """``frame[i][j]``: polynomial coefficient of generator i+1 on coordinate j."""
        rows = []
        for i in range(self.N1):
            row = [Polynomial.zero(self.n) for _ in range(self.n)]
            row[i] = Polynomial.constant(self.n, 1)
            for (k, l, m), poly in self.coeffs.items():
                if k == i + 1:
                    row[self.slot(l, m)] = poly
            rows.append(tuple(row))
        return tuple(rows)

    @cached_property
    def drift(self) -> Tuple[Tuple[Polynomial, ...], ...]:
        """``drift[i][j] = X_i(frame[i][j])``, the first-order part of X_i X_i."""
        return tuple(
            tuple(apply_field_poly(self, i + 1, a) for a in self.frame[i])
            for i in range(self.N1)
        )

    @cached_property
    def law_jacobian(self) -> Tuple[Tuple[Polynomial, ...], ...]:
        """``law_jacobian[k][j] = d(x o y)_k / d y_j`` as polynomials in (x, y)."""
        if self.group_law is None:
            raise UnsupportedOperationError(f"Group '{self.name}' carries no group law")
        return tuple(
            tuple(p.derivative(self.n + j) for j in range(self.n)) for p in self.group_law
        )

    def frame_at(self, points: np.ndarray) -> np.ndarray:
        """All generators at once: array of shape (..., N1, n)."""
        x = np.asarray(points, dtype=float)
        if x.shape[-1] != self.n:
            raise ValidationError(f"Point has {x.shape[-1]} coordinates, expected {self.n}")
        out = np.zeros(x.shape[:-1] + (self.N1, self.n))
        for i, row in enumerate(self.frame):
            out[..., i, i] = 1.0
            for j in range(self.N1, self.n):
                if not row[j].is_zero:
                    out[..., i, j] = row[j].evaluate_array(x)
        return out

    def to_dict(self) -> Dict[str, Any]:
        """Group-definition file representation."""
        return {
            "strata": list(self.strata_dims),
            "coeffs": [
                {"k": k, "l": l, "m": m, "monomials": poly.to_monomials()}
                for (k, l, m), poly in sorted(self.coeffs.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], name: str = "custom") -> "GroupSpec":
        try:
            strata = tuple(int(d) for d in data["strata"])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"Group definition needs integer 'strata': {e}")
        n = sum(strata)
        coeffs: Dict[CoeffKey, Polynomial] = {}
        for entry in data.get("coeffs", []):
            try:
                key = (int(entry["k"]), int(entry["l"]), int(entry["m"]))
            except (KeyError, TypeError, ValueError) as e:
                raise ValidationError(f"Coefficient entry needs k, l, m: {e}")
            poly = Polynomial.from_monomials(n, entry.get("monomials", []))
            coeffs[key] = coeffs[key] + poly if key in coeffs else poly
        return cls(strata, coeffs, name=name)


# Field actions


def vector_field_at(G: GroupSpec, i: int, x: Any) -> np.ndarray:
    """Coefficient vector ``X_i(x)`` (``i`` is 1-based); batched over leading axes."""
    idx = G.generator_index(i)
    return G.frame_at(np.asarray(x, dtype=float))[..., idx, :]


def vector_field_exact(G: GroupSpec, i: int, x: Sequence[Scalar]) -> Tuple[Scalar, ...]:
    """Exact rational evaluation of ``X_i(x)`` at a single point."""
    idx = G.generator_index(i)
    if len(x) != G.n:
        raise ValidationError(f"Point has {len(x)} coordinates, expected {G.n}")
    return tuple(a.evaluate(x) for a in G.frame[idx])


def apply_field(G: GroupSpec, i: int, u: SmoothFunction, x: Any) -> np.ndarray:
    """``(X_i u)(x)`` from the Euclidean gradient of ``u``."""
    points = np.asarray(x, dtype=float)
    field_vec = vector_field_at(G, i, points)
    return np.einsum("...j,...j->...", field_vec, u.gradient(points))


def apply_field_poly(G: GroupSpec, i: int, poly: Polynomial) -> Polynomial:
    """Exact ``X_i`` applied to a polynomial."""
    idx = G.generator_index(i)
    result = Polynomial.zero(G.n)
    for j, a in enumerate(G.frame[idx]):
        if not a.is_zero:
            result = result + a * poly.derivative(j)
    return result


def bracket_field(G: GroupSpec, i: int, j: int) -> Tuple[Polynomial, ...]:
    """Coefficient polynomials of the commutator ``[X_i, X_j]``."""
    a = G.frame[G.generator_index(i)]
    b = G.frame[G.generator_index(j)]
    return tuple(
        apply_field_poly(G, i, b[k]) - apply_field_poly(G, j, a[k]) for k in range(G.n)
    )


def horizontal_gradient(G: GroupSpec, u: SmoothFunction, x: Any) -> np.ndarray:
    """``(X_1 u, ..., X_N1 u)`` at ``x``; shape (..., N1)."""
    points = np.asarray(x, dtype=float)
    return np.einsum("...ij,...j->...i", G.frame_at(points), u.gradient(points))


def horizontal_divergence(G: GroupSpec, fields: Sequence[SmoothFunction], x: Any) -> np.ndarray:
    """``sum_k X_k f_k`` at ``x``."""
    if len(fields) != G.N1:
        raise ValidationError(f"Need {G.N1} component functions, got {len(fields)}")
    points = np.asarray(x, dtype=float)
    frames = G.frame_at(points)
    total = np.zeros(points.shape[:-1])
    for k, f in enumerate(fields):
        total = total + np.einsum("...j,...j->...", frames[..., k, :], f.gradient(points))
    return total


def sub_laplacian(G: GroupSpec, u: SmoothFunction, x: Any) -> np.ndarray:
    """``sum_k X_k X_k u`` via the product rule on coefficient polynomials."""
    points = np.asarray(x, dtype=float)
    frames = G.frame_at(points)
    grad = u.gradient(points)
    hess = u.hessian(points)
    total = np.einsum("...kj,...jl,...kl->...", frames, hess, frames)
    for k in range(G.N1):
        for j, d in enumerate(G.drift[k]):
            if not d.is_zero:
                total = total + d.evaluate_array(points) * grad[..., j]
    return total


def dilate(G: GroupSpec, x: Any, lam: float) -> np.ndarray:
    """``delta_lambda x``: stratum-l coordinates scaled by ``lam**l``."""
    points = np.asarray(x, dtype=float)
    return points * np.power(float(lam), np.asarray(G.weights, dtype=float))


def check_homogeneity(
    G: GroupSpec, lambdas: Sequence[float], points: np.ndarray
) -> float:
    """Largest |a(delta_lambda x) - lambda^(l-1) a(x)| over coefficients and samples."""
    worst = 0.0
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    for (k, l, m), poly in G.coeffs.items():
        base = poly.evaluate_array(pts)
        for lam in lambdas:
            scaled = poly.evaluate_array(dilate(G, pts, lam))
            worst = max(worst, float(np.max(np.abs(scaled - lam ** (l - 1) * base))))
    return worst


# Group laws


def group_law(G: GroupSpec, x: Any, y: Any) -> Any:
    """``x o y``. Exact tuples for int/Fraction inputs, float arrays otherwise.

    Raises:
        UnsupportedOperationError: If ``G`` carries no group law.
    """
    if G.group_law is None:
        raise UnsupportedOperationError(f"Group '{G.name}' carries no group law")
    if is_exact_sequence(x) and is_exact_sequence(y):
        xs, ys = tuple(x), tuple(y)
        if len(xs) != G.n or len(ys) != G.n:
            raise ValidationError(f"Points must have {G.n} coordinates")
        joint = xs + ys
        return tuple(p.evaluate(joint) for p in G.group_law)
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape[-1] != G.n or ya.shape[-1] != G.n:
        raise ValidationError(f"Points must have {G.n} coordinates")
    xa, ya = np.broadcast_arrays(xa, ya)
    joint_a = np.concatenate([xa, ya], axis=-1)
    return np.stack([p.evaluate_array(joint_a) for p in G.group_law], axis=-1)


def check_left_invariance(
    G: GroupSpec, i: int, u: SmoothFunction, x: Any, y: Any
) -> np.ndarray:
    """``|X_i(u o L_x)(y) - (X_i u)(x o y)|`` from the chain rule through the law."""
    idx = G.generator_index(i)
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    xa, ya = np.broadcast_arrays(xa, ya)
    z = group_law(G, xa, ya)
    joint = np.concatenate([xa, ya], axis=-1)
    jac = np.stack(
        [np.stack([d.evaluate_array(joint) for d in row], axis=-1) for row in G.law_jacobian],
        axis=-2,
    )
    grad_z = u.gradient(z)
    pulled_back = np.einsum("...kj,...k->...j", jac, grad_z)
    lhs = np.einsum("...j,...j->...", G.frame_at(ya)[..., idx, :], pulled_back)
    rhs = np.einsum("...j,...j->...", G.frame_at(z)[..., idx, :], grad_z)
    return np.abs(lhs - rhs)


def check_divergence(
    G: GroupSpec, fields: Sequence[Any], box: Sequence[Tuple[float, float]], nodes: int = 32
) -> float:
    """``|integral of sum_k X_k f_k|`` for compactly supported ``f_k`` inside ``box``.

    Each component is integrated by a Gauss rule over its own support box.

    Raises:
        ValidationError: If a support is not strictly inside ``box``.
    """
    from core.quadrature import QuadratureRule, RuleKind, integrate

    if len(fields) != G.N1:
        raise ValidationError(f"Need {G.N1} component functions, got {len(fields)}")
    bounds = [(float(lo), float(hi)) for lo, hi in box]
    if len(bounds) != G.n:
        raise ValidationError(f"Box must have {G.n} intervals")
    total = 0.0
    for k, f in enumerate(fields):
        support = getattr(f, "support_box", None)
        if support is None:
            if isinstance(f, Polynomial) and f.is_zero:
                continue
            raise ValidationError(f"Component {k + 1} has no declared compact support")
        for (lo, hi), (slo, shi) in zip(bounds, support):
            if not (lo < slo and shi < hi):
                raise ValidationError(
                    f"Support of component {k + 1} is not strictly inside the box"
                )
        rule = QuadratureRule(RuleKind.GAUSS, tuple(support), nodes=nodes)
        generator = k + 1
        total += integrate(rule, lambda pts, f=f, g=generator: apply_field(G, g, f, pts))
    return abs(total)


# Built-in groups


def _law_vars(n: int) -> Tuple[List[Polynomial], List[Polynomial]]:
    xs = [Polynomial.variable(2 * n, j) for j in range(n)]
    ys = [Polynomial.variable(2 * n, n + j) for j in range(n)]
    return xs, ys


def make_euclidean(n: int) -> GroupSpec:
    """Abelian R^n: one stratum, ``X_i = d/dx_i``, law ``x + y``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"Euclidean dimension must be >= 1, got {n!r}")
    xs, ys = _law_vars(n)
    law = tuple(a + b for a, b in zip(xs, ys))
    return GroupSpec((n,), {}, name=f"euclidean:{n}", group_law=law)


def make_heisenberg() -> GroupSpec:
    """Heisenberg group with ``X_1 = d1 + 2x_2 d3`` and ``X_2 = d2 - 2x_1 d3``."""
    x1 = Polynomial.variable(3, 0)
    x2 = Polynomial.variable(3, 1)
    coeffs = {(1, 2, 1): x2 * 2, (2, 2, 1): x1 * -2}
    xs, ys = _law_vars(3)
    law = (
        xs[0] + ys[0],
        xs[1] + ys[1],
        xs[2] + ys[2] + (xs[1] * ys[0] - xs[0] * ys[1]) * 2,
    )
    return GroupSpec((2, 1), coeffs, name="heisenberg", group_law=law)


ENGEL_CONVENTIONS = ("printed", "group-law")


def make_engel(convention: str = "printed") -> GroupSpec:
    """Engel group in exponential coordinates.

    ``"printed"`` uses ``X_1 = d1 - x_2/2 d3 - (x_3/2 - x_1 x_2/12) d4`` and
    carries no group law. ``"group-law"`` uses the fields generated by the
    law below, whose x_4 coefficient of ``X_1`` is ``-(x_3/2 + x_1 x_2/12)``.
    Both share ``X_2 = d2 + x_1/2 d3 + x_1^2/12 d4``.
    """
    if convention not in ENGEL_CONVENTIONS:
        raise ValidationError(
            f"Unknown Engel convention '{convention}', expected one of {ENGEL_CONVENTIONS}"
        )
    x1 = Polynomial.variable(4, 0)
    x2 = Polynomial.variable(4, 1)
    x3 = Polynomial.variable(4, 2)
    half = Fraction(1, 2)
    twelfth = Fraction(1, 12)
    sign = -1 if convention == "printed" else 1
    coeffs = {
        (1, 2, 1): x2 * -half,
        (1, 3, 1): -(x3 * half + x1 * x2 * (sign * twelfth)),
        (2, 2, 1): x1 * half,
        (2, 3, 1): x1 * x1 * twelfth,
    }
    if convention == "printed":
        return GroupSpec((2, 1, 1), coeffs, name="engel")

    xs, ys = _law_vars(4)
    p1 = (xs[0] * ys[1] - xs[1] * ys[0]) * half
    p2 = (xs[0] * ys[2] - xs[2] * ys[0]) * half + (
        xs[0] * xs[0] * ys[1]
        - xs[0] * ys[0] * xs[1]
        - xs[0] * ys[0] * ys[1]
        + xs[1] * ys[0] * ys[0]
    ) * twelfth
    law = (xs[0] + ys[0], xs[1] + ys[1], xs[2] + ys[2] + p1, xs[3] + ys[3] + p2)
    return GroupSpec((2, 1, 1), coeffs, name="engel-law", group_law=law)


def make_step2(N: int, N2: int, a: Sequence[Sequence[Sequence[Any]]], name: str = "step2") -> GroupSpec:
    """Step-two group with ``X_i = d/dx'_i + sum_{s,m} a[s][m][i] x'_m d/dx''_s``.

    ``a`` is indexed ``a[s][m][i]`` with 0-based ``s < N2`` and ``m, i < N``.

    Raises:
        ValidationError: If ``a`` does not have shape ``N2 x N x N``.
    """
    if N < 1 or N2 < 1:
        raise ValidationError("Step-two dimensions must be positive")
    if len(a) != N2 or any(len(row) != N for row in a) or any(
        len(col) != N for row in a for col in row
    ):
        raise ValidationError(f"Group constants must have shape {N2} x {N} x {N}")
    n = N + N2
    coeffs: Dict[CoeffKey, Polynomial] = {}
    for i in range(N):
        for s in range(N2):
            poly = Polynomial.zero(n)
            for m in range(N):
                c = to_scalar(a[s][m][i])
                if c != 0:
                    poly = poly + Polynomial.variable(n, m, c)
            if not poly.is_zero:
                coeffs[(i + 1, 2, s + 1)] = poly
    return GroupSpec((N, N2), coeffs, name=name)


def step2_constants(G: GroupSpec) -> List[List[List[Scalar]]]:
    """Recover ``a[s][m][i]`` from the linear coefficients of a step-two group."""
    if G.step != 2:
        raise ValidationError(f"Group '{G.name}' has step {G.step}, expected 2")
    N, N2 = G.strata_dims
    a: List[List[List[Scalar]]] = [[[0] * N for _ in range(N)] for _ in range(N2)]
    for (k, _, s), poly in G.coeffs.items():
        for exps, coeff in poly.terms:
            m = exps.index(1)
            a[s - 1][m][k - 1] = coeff
    return a


def load_group_file(path: Union[str, Path]) -> GroupSpec:
    """Read a JSON group-definition file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"Group file not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid JSON in group file {path}: {e}")
    return GroupSpec.from_dict(data, name=path.stem)


def load_step2_file(path: Union[str, Path]) -> GroupSpec:
    """Read ``{"N": .., "N2": .., "a": [[[...]]]}`` into a step-two group."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        return make_step2(int(data["N"]), int(data["N2"]), data["a"], name=f"step2:{path.stem}")
    except FileNotFoundError:
        raise ValidationError(f"Step-two file not found: {path}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Malformed step-two file {path}: {e}")


def load_group(ref: str, base_dir: Optional[Path] = None) -> GroupSpec:
    """Resolve a group reference used in run configs.

    Accepts ``euclidean:n``, ``heisenberg``, ``engel``, ``engel-law``,
    ``step2:<file>`` and ``file:<path>``; relative paths resolve against
    ``base_dir``.
    """
    if not isinstance(ref, str) or not ref.strip():
        raise ValidationError("Group reference must be a non-empty string")
    ref = ref.strip()

    def resolve(p: str) -> Path:
        candidate = Path(p)
        if not candidate.is_absolute() and base_dir is not None:
            candidate = base_dir / candidate
        return candidate

    if ref == "heisenberg":
        return make_heisenberg()
    if ref == "engel":
        return make_engel("printed")
    if ref == "engel-law":
        return make_engel("group-law")
    if ref.startswith("euclidean:"):
        try:
            return make_euclidean(int(ref.split(":", 1)[1]))
        except ValueError:
            raise ValidationError(f"Bad Euclidean dimension in '{ref}'")
    if ref.startswith("step2:"):
        return load_step2_file(resolve(ref.split(":", 1)[1]))
    if ref.startswith("file:"):
        return load_group_file(resolve(ref.split(":", 1)[1]))
    raise ValidationError(f"Unknown group reference '{ref}'")
