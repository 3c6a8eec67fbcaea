"""
Quadrature Rules for Carnot Hardy Verifier
Tensor Gauss-Legendre, midpoint Riemann, Gauss-Jacobi and Monte Carlo integration over boxes.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, reduce
from typing import Any, Callable, Dict, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from utils.validators import ValidationError

logger = logging.getLogger(__name__)

Box = Tuple[Tuple[float, float], ...]
Integrand = Callable[[np.ndarray], np.ndarray]
MultiIntegrand = Callable[[np.ndarray], Mapping[str, np.ndarray]]

DEFAULT_CHUNK = 262144
MC_ERROR_MULTIPLIER = 3.0


class RuleKind(Enum):
    """Supported node families."""

    GAUSS = "gauss"
    RIEMANN = "riemann"
    MONTE_CARLO = "montecarlo"
    GAUSS_JACOBI = "gauss-jacobi"


def _parse_kind(kind: Any) -> RuleKind:
    if isinstance(kind, RuleKind):
        return kind
    try:
        return RuleKind(str(kind).lower())
    except ValueError:
        valid = ", ".join(k.value for k in RuleKind)
        raise ValidationError(f"Unknown quadrature kind '{kind}', expected one of: {valid}")


def _check_box(box: Sequence[Tuple[float, float]]) -> Box:
    bounds = tuple((float(lo), float(hi)) for lo, hi in box)
    if not bounds or any(not lo < hi for lo, hi in bounds):
        raise ValidationError("Integration box must give a nonempty interval per coordinate")
    return bounds


@dataclass(frozen=True)
class QuadratureRule:
    """Node/weight set over a box.

    ``gauss-jacobi`` places Gauss-Jacobi nodes for the weight
    ``(x_k - lo_k)^singular_exponent`` on ``singular_axis`` and divides the
    weight back out, so integrands behaving like that power near the lower
    face are integrated accurately.
    """

    kind: RuleKind
    box: Box
    nodes: int = 32
    samples: int = 2_000_000
    seed: int = 7
    singular_axis: Optional[int] = None
    singular_exponent: float = 0.0
    singular_nodes: Optional[int] = None
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _parse_kind(self.kind))
        object.__setattr__(self, "box", _check_box(self.box))
        if self.nodes < 1:
            raise ValidationError("Rule needs at least one node per axis")
        if self.samples < 2:
            raise ValidationError("Monte Carlo needs at least two samples")
        if self.chunk_size < 1:
            raise ValidationError("Chunk size must be positive")
        if self.kind is RuleKind.GAUSS_JACOBI:
            if self.singular_axis is None or not 0 <= self.singular_axis < self.n:
                raise ValidationError("Gauss-Jacobi rule needs a valid singular axis")
            if not self.singular_exponent > -1.0:
                raise ValidationError("Singular exponent must exceed -1")

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.box]))

    def _gauss_axis(self, lo: float, hi: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
        t, w = leggauss(count)
        half = 0.5 * (hi - lo)
        return lo + half * (t + 1.0), w * half

    def _jacobi_axis(self, lo: float, hi: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
        gamma = self.singular_exponent
        t, w = roots_jacobi(count, 0.0, gamma)
        half = 0.5 * (hi - lo)
        x = lo + half * (t + 1.0)
        return x, w * half ** (gamma + 1.0) / (x - lo) ** gamma

    def _axis(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self.box[j]
        if self.kind is RuleKind.RIEMANN:
            h = (hi - lo) / self.nodes
            return lo + h * (np.arange(self.nodes) + 0.5), np.full(self.nodes, h)
        if self.kind is RuleKind.GAUSS_JACOBI and j == self.singular_axis:
            return self._jacobi_axis(lo, hi, self.singular_nodes or self.nodes)
        return self._gauss_axis(lo, hi, self.nodes)

    @cached_property
    def points_and_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.kind is RuleKind.MONTE_CARLO:
            rng = np.random.default_rng(self.seed)
            lows = np.array([lo for lo, _ in self.box])
            highs = np.array([hi for _, hi in self.box])
            points = rng.uniform(lows, highs, size=(self.samples, self.n))
            return points, np.full(self.samples, self.volume / self.samples)
        axes = [self._axis(j) for j in range(self.n)]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=-1)
        weights = reduce(np.multiply.outer, [a[1] for a in axes]).ravel()
        return points, weights

    @property
    def size(self) -> int:
        return len(self.points_and_weights[1])

    def chunks(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        points, weights = self.points_and_weights
        for start in range(0, len(weights), self.chunk_size):
            stop = start + self.chunk_size
            yield points[start:stop], weights[start:stop]

    def with_density(self, factor: float) -> "QuadratureRule":
        """Same rule with node or sample counts scaled by ``factor``."""
        return replace(
            self,
            nodes=max(2, int(round(self.nodes * factor))),
            samples=max(2, int(round(self.samples * factor))),
            singular_nodes=(
                None
                if self.singular_nodes is None
                else max(2, int(round(self.singular_nodes * factor)))
            ),
        )

    def companion(self) -> "QuadratureRule":
        """Half-density rule used for error estimates."""
        return self.with_density(0.5)

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"kind": self.kind.value, "box": [list(b) for b in self.box]}
        if self.kind is RuleKind.MONTE_CARLO:
            info.update(samples=self.samples, seed=self.seed)
        else:
            info["nodes"] = self.nodes
        if self.kind is RuleKind.GAUSS_JACOBI:
            info.update(
                singular_axis=self.singular_axis,
                singular_exponent=self.singular_exponent,
                singular_nodes=self.singular_nodes or self.nodes,
            )
        return info


@dataclass(frozen=True)
class RuleSpec:
    """Run-config rule description, bound to a box at evaluation time."""

    kind: RuleKind = RuleKind.GAUSS
    nodes: int = 32
    samples: int = 2_000_000
    seed: int = 7
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _parse_kind(self.kind))
        if self.kind is RuleKind.GAUSS_JACOBI:
            raise ValidationError("Gauss-Jacobi rules are chosen automatically for probes")
        if self.nodes < 1 or self.samples < 2:
            raise ValidationError("Rule needs positive node and sample counts")

    def bind(self, box: Sequence[Tuple[float, float]], **overrides: Any) -> QuadratureRule:
        params: Dict[str, Any] = dict(
            kind=self.kind,
            box=tuple(box),
            nodes=self.nodes,
            samples=self.samples,
            seed=self.seed,
            chunk_size=self.chunk_size,
        )
        params.update(overrides)
        return QuadratureRule(**params)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind is RuleKind.MONTE_CARLO:
            return {"kind": self.kind.value, "samples": self.samples, "seed": self.seed}
        return {"kind": self.kind.value, "nodes": self.nodes}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], chunk_size: int = DEFAULT_CHUNK) -> "RuleSpec":
        if not isinstance(data, Mapping):
            raise ValidationError("Rule spec must be an object")
        try:
            return cls(
                kind=_parse_kind(data.get("kind", "gauss")),
                nodes=int(data.get("nodes", 32)),
                samples=int(data.get("samples", 2_000_000)),
                seed=int(data.get("seed", 7)),
                chunk_size=chunk_size,
            )
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Malformed rule spec {dict(data)!r}: {e}")


def default_rule_spec(n: int, settings: Any = None) -> RuleSpec:
    """Gauss for low dimensions, Monte Carlo from the configured dimension on."""
    if settings is None:
        from config.settings import get_settings

        settings = get_settings()
    q = settings.quadrature
    if n >= q.montecarlo_min_dimension:
        return RuleSpec(
            RuleKind.MONTE_CARLO,
            samples=q.montecarlo_samples,
            seed=q.montecarlo_seed,
            chunk_size=q.chunk_size,
        )
    return RuleSpec(RuleKind.GAUSS, nodes=q.gauss_nodes, chunk_size=q.chunk_size)


# Integration


def integrate(rule: QuadratureRule, f: Integrand) -> float:
    """Weighted node sum of ``f`` over ``rule``."""
    total = 0.0
    for points, weights in rule.chunks():
        total += float(weights @ np.asarray(f(points), dtype=float))
    return total


def integrate_many(rule: QuadratureRule, f: MultiIntegrand) -> Dict[str, float]:
    """Integrate several named integrands in one pass over the nodes."""
    totals: Dict[str, float] = {}
    for points, weights in rule.chunks():
        for name, values in f(points).items():
            totals[name] = totals.get(name, 0.0) + float(weights @ np.asarray(values, dtype=float))
    return totals


def _mc_errors(rule: QuadratureRule, f: MultiIntegrand) -> Tuple[Dict[str, float], Dict[str, float]]:
    sums: Dict[str, float] = {}
    squares: Dict[str, float] = {}
    for points, _ in rule.chunks():
        for name, values in f(points).items():
            v = np.asarray(values, dtype=float)
            sums[name] = sums.get(name, 0.0) + float(v.sum())
            squares[name] = squares.get(name, 0.0) + float(v @ v)
    count = rule.samples
    values_out, errors = {}, {}
    for name, s in sums.items():
        mean = s / count
        var = max(squares[name] / count - mean * mean, 0.0)
        values_out[name] = rule.volume * mean
        errors[name] = MC_ERROR_MULTIPLIER * rule.volume * np.sqrt(var / count)
    return values_out, errors


def integrate_with_error(
    rule: QuadratureRule, f: MultiIntegrand
) -> Dict[str, Tuple[float, float]]:
    """Values with error estimates.

    Deterministic rules compare against the half-density companion; Monte
    Carlo reports three standard errors.
    """
    if rule.kind is RuleKind.MONTE_CARLO:
        values, errors = _mc_errors(rule, f)
    else:
        values = integrate_many(rule, f)
        coarse = integrate_many(rule.companion(), f)
        errors = {name: abs(values[name] - coarse.get(name, 0.0)) for name in values}
    logger.debug(f"Integrated {sorted(values)} with {rule.describe()}")
    return {name: (values[name], float(errors[name])) for name in values}


def integrate_adaptive(rule: QuadratureRule, f: Integrand, refine: int) -> Tuple[float, float]:
    """Integrate at densities 1, 2, ..., refine+1 times the base rule.

    Returns:
        The finest value and the absolute difference of the last two levels.

    Raises:
        ValidationError: If ``refine < 1``.
    """
    if refine < 1:
        raise ValidationError("Adaptive integration needs at least one refinement")
    history = [integrate(rule.with_density(k + 1), f) for k in range(refine + 1)]
    logger.debug(f"Refinement history: {history}")
    return history[-1], abs(history[-1] - history[-2])
